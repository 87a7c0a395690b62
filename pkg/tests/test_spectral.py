"""
Tests for Chebyshev spectral filtering on small symmetric operators
"""

import numpy as np
import pytest

from chebyshev import (
    SpectralCoeffs,
    SpectralOperator,
    apply_filter,
    eigen_filter,
    hop_distances,
    locality_certificate,
    path_laplacian,
    rescale,
    spectral_radius,
)
from core.errors import DimensionError, InvalidInputError


def random_symmetric(rng, dim):
    a = rng.standard_normal((dim, dim))
    return a + a.T


class TestRescale:

    def test_spectrum_maps_into_unit_interval(self):
        laplacian = path_laplacian(10)
        operator = rescale(laplacian)
        eigenvalues = np.linalg.eigvalsh(operator.matrix)
        assert eigenvalues.min() >= -1.0 - 1e-12
        assert eigenvalues.max() <= 1.0 + 1e-12
        assert operator.lambda_max == 1.0

    def test_explicit_lambda_max(self):
        laplacian = path_laplacian(4)
        operator = rescale(laplacian, lambda_max=4.0)
        np.testing.assert_allclose(operator.matrix, laplacian / 2.0 - np.eye(4))

    def test_identity_laplacian_maps_to_zero(self):
        np.testing.assert_allclose(rescale(np.eye(3), lambda_max=2.0).matrix, np.zeros((3, 3)))

    def test_zero_laplacian_maps_to_minus_identity(self):
        np.testing.assert_allclose(rescale(np.zeros((3, 3)), lambda_max=2.0).matrix, -np.eye(3))

    @pytest.mark.parametrize("lambda_max", [0.0, -1.0, float("nan")])
    def test_rejects_non_positive_lambda(self, lambda_max):
        with pytest.raises(InvalidInputError):
            rescale(path_laplacian(3), lambda_max=lambda_max)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInputError, match="symmetric"):
            rescale(np.array([[1.0, 2.0], [0.0, 1.0]]), lambda_max=3.0)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            SpectralOperator(np.zeros((2, 3)), 1.0)


class TestApplyFilter:
    """Matrix recurrence against the eigendecomposition oracle"""

    @pytest.mark.parametrize("dim", [1, 2, 5, 16])
    @pytest.mark.parametrize("order", [0, 1, 3, 8])
    def test_matches_eigendecomposition(self, rng, dim, order):
        matrix = random_symmetric(rng, dim)
        operator = rescale(matrix, lambda_max=max(spectral_radius(matrix), 1e-3) * 1.5)
        theta = rng.standard_normal(order + 1)
        signal = rng.standard_normal(dim)
        fast = apply_filter(operator, theta, signal)
        oracle = eigen_filter(operator, theta, signal)
        assert np.max(np.abs(fast - oracle)) < 1e-8

    def test_block_of_signals(self, rng):
        operator = rescale(path_laplacian(6))
        theta = SpectralCoeffs([0.5, -0.2, 0.1])
        block = rng.standard_normal((6, 3))
        filtered = apply_filter(operator, theta, block)
        for column in range(3):
            np.testing.assert_allclose(filtered[:, column], apply_filter(operator, theta, block[:, column]))

    def test_first_coefficients_select_polynomials(self, rng):
        operator = rescale(path_laplacian(6))
        signal = rng.standard_normal(6)
        np.testing.assert_allclose(apply_filter(operator, [1.0, 0.0, 0.0], signal), signal)
        np.testing.assert_allclose(apply_filter(operator, [0.0, 1.0], signal), operator.matrix @ signal)

    def test_order_zero_is_scaling(self, rng):
        operator = rescale(path_laplacian(5))
        signal = rng.standard_normal(5)
        np.testing.assert_allclose(apply_filter(operator, [2.5], signal), 2.5 * signal)

    def test_signal_length_mismatch(self):
        with pytest.raises(DimensionError):
            apply_filter(rescale(path_laplacian(4)), [1.0, 1.0], np.ones(5))

    def test_empty_theta(self):
        with pytest.raises(InvalidInputError):
            SpectralCoeffs([])


class TestLocality:
    """An order-K filter reaches exactly K hops"""

    def test_path_distances(self):
        distances = hop_distances(path_laplacian(5))
        assert distances[0, 4] == 4
        assert distances[2, 2] == 0
        np.testing.assert_array_equal(distances, distances.T)

    @pytest.mark.parametrize("order", [0, 1, 2, 4])
    def test_filter_is_k_localized(self, rng, order):
        theta = rng.standard_normal(order + 1)
        certificate = locality_certificate(path_laplacian(12), theta)
        assert certificate.holds
        assert certificate.max_outside <= 1e-12
        assert certificate.max_inside > 0

    def test_order_beyond_diameter_has_nothing_outside(self):
        certificate = locality_certificate(path_laplacian(4), np.ones(6))
        assert certificate.holds
        assert certificate.max_outside == 0.0

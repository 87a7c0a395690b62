"""
Spectral Filter - g_theta(L) = sum_k theta_k T_k(L~) on small symmetric operators

Responsibility: rescale a symmetric operator into [-1, 1], apply a
Chebyshev spectral filter with the matrix recurrence (never forming
T_k(L~)), and certify the result against a dense eigendecomposition and
against K-hop locality on graph Laplacians.

Interface:
  rescale(L, lambda_max) -> SpectralOperator
  apply_filter(op, theta, signal) -> ndarray
  eigen_filter(op, theta, signal) -> ndarray          (eigenbasis oracle)
  path_laplacian(d) -> ndarray
  locality_certificate(laplacian, theta) -> LocalityCertificate
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from core.errors import DimensionError, InvalidInputError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralOperator:
    """Dense symmetric operator with a bound on its spectral radius"""
    matrix: np.ndarray
    lambda_max: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError("Spectral operator must be square", matrix.shape)
        if not np.all(np.isfinite(matrix)):
            raise InvalidInputError("Spectral operator must be finite")
        asymmetry = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
        if asymmetry >= SYMMETRY_TOL:
            raise InvalidInputError(f"Spectral operator is not symmetric (max |L - L^T| = {asymmetry:.3g})")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "lambda_max", float(self.lambda_max))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralCoeffs:
    """Filter coefficients theta_0..theta_K"""
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64).reshape(-1)
        if theta.size == 0:
            raise InvalidInputError("Spectral filter needs at least theta_0")
        if not np.all(np.isfinite(theta)):
            raise InvalidInputError("Spectral coefficients must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def order(self) -> int:
        return self.theta.size - 1


@dataclass
class LocalityCertificate:
    """Largest filter-matrix entry between vertices more than K hops apart"""
    order: int
    dim: int
    max_outside: float
    max_inside: float
    violations: int = 0
    tolerance: float = 1e-12

    @property
    def holds(self) -> bool:
        return self.violations == 0


def spectral_radius(matrix: np.ndarray) -> float:
    """Largest |eigenvalue| of a symmetric matrix"""
    eigenvalues = np.linalg.eigvalsh(np.asarray(matrix, dtype=np.float64))
    return float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0


def rescale(laplacian: np.ndarray, lambda_max: Optional[float] = None) -> SpectralOperator:
    """
    L~ = 2 L / lambda_max - I

    For positive semidefinite L with lambda_max >= its largest eigenvalue the
    spectrum of L~ lies in [-1, 1]. lambda_max defaults to the exact spectral radius.
    """
    matrix = np.asarray(laplacian, dtype=np.float64)
    if lambda_max is None:
        lambda_max = spectral_radius(matrix)
    if not np.isfinite(lambda_max) or lambda_max <= 0:
        raise InvalidInputError(f"lambda_max must be > 0, got {lambda_max}")
    # Validate symmetry of the input before scaling
    SpectralOperator(matrix, lambda_max)
    scaled = 2.0 * matrix / lambda_max - np.eye(matrix.shape[0])
    return SpectralOperator(scaled, 1.0)


def _as_coeffs(theta: Union[SpectralCoeffs, Sequence[float], np.ndarray]) -> SpectralCoeffs:
    return theta if isinstance(theta, SpectralCoeffs) else SpectralCoeffs(np.asarray(theta))


def apply_filter(
    operator: SpectralOperator,
    theta: Union[SpectralCoeffs, Sequence[float], np.ndarray],
    signal: np.ndarray
) -> np.ndarray:
    """
    sum_k theta_k T_k(L~) s by the recurrence z_0 = s, z_1 = L~ s,
    z_{k+1} = 2 L~ z_k - z_{k-1}

    Signals may be a d-vector or a (d, m) block of column signals.
    """
    coeffs = _as_coeffs(theta)
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[0] != operator.dim or signal.ndim > 2:
        raise DimensionError("Signal length does not match operator", signal.shape, operator.matrix.shape)

    z_prev = signal
    result = coeffs.theta[0] * z_prev
    if coeffs.order == 0:
        return result
    z_curr = operator.matrix @ signal
    result = result + coeffs.theta[1] * z_curr
    for k in range(2, coeffs.order + 1):
        z_prev, z_curr = z_curr, 2.0 * (operator.matrix @ z_curr) - z_prev
        result = result + coeffs.theta[k] * z_curr
    return result


def eigen_filter(
    operator: SpectralOperator,
    theta: Union[SpectralCoeffs, Sequence[float], np.ndarray],
    signal: np.ndarray
) -> np.ndarray:
    """Oracle: U diag(sum_k theta_k T_k(lambda)) U^T s from a dense eigendecomposition"""
    coeffs = _as_coeffs(theta)
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[0] != operator.dim:
        raise DimensionError("Signal length does not match operator", signal.shape, operator.matrix.shape)
    eigenvalues, eigenvectors = np.linalg.eigh(operator.matrix)
    response = np.polynomial.chebyshev.chebval(eigenvalues, coeffs.theta)
    block = signal.reshape(operator.dim, -1)
    filtered = eigenvectors @ (response[:, None] * (eigenvectors.T @ block))
    return filtered.reshape(signal.shape)


def path_laplacian(dim: int) -> np.ndarray:
    """Combinatorial Laplacian D - A of the path graph on `dim` vertices"""
    if dim < 1:
        raise InvalidInputError(f"Path graph needs at least one vertex, got {dim}")
    adjacency = np.zeros((dim, dim), dtype=np.float64)
    idx = np.arange(dim - 1)
    adjacency[idx, idx + 1] = 1.0
    adjacency[idx + 1, idx] = 1.0
    return np.diag(adjacency.sum(axis=1)) - adjacency


def hop_distances(laplacian: np.ndarray) -> np.ndarray:
    """All-pairs hop counts of the graph underlying a Laplacian (BFS over nonzero off-diagonals)"""
    matrix = np.asarray(laplacian)
    dim = matrix.shape[0]
    adjacency = (np.abs(matrix) > 0) & ~np.eye(dim, dtype=bool)
    distances = np.full((dim, dim), np.inf)
    for source in range(dim):
        distances[source, source] = 0
        frontier = [source]
        depth = 0
        while frontier:
            depth += 1
            reached = np.flatnonzero(adjacency[frontier].any(axis=0) & np.isinf(distances[source]))
            distances[source, reached] = depth
            frontier = list(reached)
    return distances


def locality_certificate(
    laplacian: np.ndarray,
    theta: Union[SpectralCoeffs, Sequence[float], np.ndarray],
    lambda_max: Optional[float] = None,
    tolerance: float = 1e-12
) -> LocalityCertificate:
    """
    Check that an order-K filter moves no mass farther than K hops

    The filter matrix is built column by column by filtering unit impulses.
    """
    coeffs = _as_coeffs(theta)
    operator = rescale(laplacian, lambda_max)
    filter_matrix = apply_filter(operator, coeffs, np.eye(operator.dim))
    distances = hop_distances(laplacian)
    outside = distances > coeffs.order
    outside_values = np.abs(filter_matrix[outside])
    inside_values = np.abs(filter_matrix[~outside])
    certificate = LocalityCertificate(
        order=coeffs.order,
        dim=operator.dim,
        max_outside=float(outside_values.max()) if outside_values.size else 0.0,
        max_inside=float(inside_values.max()) if inside_values.size else 0.0,
        violations=int(np.count_nonzero(outside_values > tolerance)),
        tolerance=tolerance,
    )
    logger.debug(f"Locality certificate K={coeffs.order} d={operator.dim}: holds={certificate.holds}")
    return certificate

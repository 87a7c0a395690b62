# chebyshev/__init__.py
"""
Chebyshev polynomial machinery: basis evaluation, Gauss quadrature, 2D image
approximation and spectral filtering.

Example:
    from chebyshev import eval_recurrence, fit_coeffs_2d
    print(eval_recurrence(0.5, 3).values)          # [1, 0.5, -0.5, -1]
    grid = fit_coeffs_2d(lambda x, y: x * y, (3, 3))
"""
from .basis import ChebBasisEval, DomainMap, eval_recurrence, eval_grid, cheb_gauss_nodes
from .approx2d import (
    ChebCoeffGrid,
    ApproximationStep,
    fit_coeffs_2d,
    reconstruct_2d,
    sample_image_at_nodes,
    pixel_coordinates,
    approximation_curve,
)
from .spectral import (
    SpectralOperator,
    SpectralCoeffs,
    LocalityCertificate,
    rescale,
    apply_filter,
    eigen_filter,
    path_laplacian,
    hop_distances,
    locality_certificate,
    spectral_radius,
)

__all__ = [
    "ChebBasisEval", "DomainMap", "eval_recurrence", "eval_grid", "cheb_gauss_nodes",
    "ChebCoeffGrid", "ApproximationStep", "fit_coeffs_2d", "reconstruct_2d",
    "sample_image_at_nodes", "pixel_coordinates", "approximation_curve",
    "SpectralOperator", "SpectralCoeffs", "LocalityCertificate", "rescale", "apply_filter",
    "eigen_filter", "path_laplacian", "hop_distances", "locality_certificate", "spectral_radius",
]

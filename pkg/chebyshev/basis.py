"""
Chebyshev Basis - First-kind Chebyshev polynomials and Gauss nodes

Responsibility: exact evaluation of T_0..T_n through the three-term
recurrence T_{n+1} = 2x T_n - T_{n-1}, the Chebyshev-Gauss node set used for
quadrature, and the linear map of an arbitrary interval onto [-1, 1].

Interface:
  eval_recurrence(x, order) -> ChebBasisEval
  eval_grid(xs, order) -> ndarray (len(xs), order + 1)
  cheb_gauss_nodes(count) -> ndarray (count,)
  DomainMap(a, b).to_unit(x) / .from_unit(t)

All arithmetic is float64. Functions are pure and thread-safe.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from core.errors import InvalidInputError, OutOfDomainWarning

logger = logging.getLogger(__name__)

# Rounding slack allowed before an argument counts as outside [-1, 1]
DOMAIN_SLACK = 1e-12

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class ChebBasisEval:
    """T_0(x)..T_order(x) at a point"""
    order: int
    x: float
    values: np.ndarray

    @property
    def in_domain(self) -> bool:
        return abs(self.x) <= 1.0 + DOMAIN_SLACK


@dataclass(frozen=True)
class DomainMap:
    """Strictly increasing affine map [a, b] -> [-1, 1]"""
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise InvalidInputError(f"Interval bounds must be finite, got [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise InvalidInputError(f"Interval requires a < b, got [{self.a}, {self.b}]")

    def to_unit(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (2.0 * x - (self.a + self.b)) / (self.b - self.a)

    def from_unit(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return 0.5 * (self.b - self.a) * t + 0.5 * (self.a + self.b)


def _check_order(order: int) -> int:
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise InvalidInputError(f"Chebyshev order must be a non-negative integer, got {order!r}")
    return int(order)


def _warn_out_of_domain(xs: np.ndarray) -> None:
    outside = np.abs(xs) > 1.0 + DOMAIN_SLACK
    if outside.any():
        worst = float(np.max(np.abs(xs[outside])))
        warnings.warn(
            f"{int(outside.sum())} Chebyshev argument(s) outside [-1, 1] (max |x| = {worst:.6g}); "
            f"recurrence evaluated anyway",
            OutOfDomainWarning,
            stacklevel=3,
        )


def eval_grid(xs: ArrayLike, order: int) -> np.ndarray:
    """
    Evaluate T_0..T_order at every point

    Args:
        xs: Points (any iterable of finite reals)
        order: Highest polynomial order

    Returns:
        Matrix (len(xs), order + 1), row i = [T_0(xs[i]), ..., T_order(xs[i])]
    """
    order = _check_order(order)
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(xs)):
        raise InvalidInputError("Chebyshev arguments must be finite")

    table = np.empty((xs.size, order + 1), dtype=np.float64)
    if xs.size == 0:
        return table

    _warn_out_of_domain(xs)

    table[:, 0] = 1.0
    if order >= 1:
        table[:, 1] = xs
    for k in range(1, order):
        table[:, k + 1] = 2.0 * xs * table[:, k] - table[:, k - 1]
    return table


def eval_recurrence(x: float, order: int) -> ChebBasisEval:
    """
    T_0(x)..T_order(x) at a single point via the three-term recurrence

    Points outside [-1, 1] raise an OutOfDomainWarning but are evaluated.
    """
    x = float(x)
    if not np.isfinite(x):
        raise InvalidInputError(f"Chebyshev argument must be finite, got {x}")
    values = eval_grid([x], order)[0]
    return ChebBasisEval(order=int(order), x=x, values=values)


def cheb_gauss_nodes(count: int) -> np.ndarray:
    """
    Chebyshev-Gauss nodes x_j = cos(pi (j + 1/2) / count), j = 0..count-1

    The nodes are the roots of T_count, strictly decreasing inside (-1, 1).
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InvalidInputError(f"Node count must be a positive integer, got {count!r}")
    nodes, _ = npcheb.chebgauss(int(count))
    return nodes

"""Collocation grids, differentiation matrices and coefficient transforms.

Chebyshev grids use the Chebyshev-Gauss-Lobatto (CGL) points ordered from
x = 1 down to x = -1, so index 0 is the right endpoint.  Sinc grids are
uniform with step h.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.fft import dct
from scipy.linalg import toeplitz

from .errors import InvalidArgument


@dataclass(frozen=True)
class AffineMap:
    """Affine bijection between a physical interval [a, b] and [-1, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise InvalidArgument(f"affine map needs finite endpoints, got [{self.a}, {self.b}]")
        if not self.b > self.a:
            raise InvalidArgument(f"affine map needs b > a, got [{self.a}, {self.b}]")

    @property
    def scale(self) -> float:
        return 2.0 / (self.b - self.a)

    @property
    def offset(self) -> float:
        return -(self.a + self.b) / (self.b - self.a)

    def to_reference(self, x):
        """Physical coordinate -> [-1, 1]."""
        return self.scale * np.asarray(x, dtype=float) + self.offset

    def to_physical(self, t):
        """[-1, 1] -> physical coordinate."""
        t = np.asarray(t, dtype=float)
        return self.a + (t + 1.0) * (0.5 * (self.b - self.a))


@dataclass(frozen=True)
class ChebGrid:
    n_points: int
    nodes: np.ndarray
    d1: np.ndarray
    d2: Optional[np.ndarray] = None
    interval: tuple = (-1.0, 1.0)

    @property
    def map(self) -> AffineMap:
        return AffineMap(*self.interval)


@dataclass(frozen=True)
class SincGrid:
    n_points: int
    step_h: float
    center: float
    nodes: np.ndarray
    d2: np.ndarray = field(repr=False)

    @property
    def half_width(self) -> float:
        """M for the symmetric 2M+1 layout; half-integer for even point counts."""
        return (self.n_points - 1) / 2

    @property
    def span(self) -> tuple:
        return float(self.nodes[0]), float(self.nodes[-1])


def cgl_nodes(n: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points cos(j*pi/(n-1)), j = 0..n-1 (descending)."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"need at least 2 CGL nodes, got {n}")
    n = int(n)
    # sin form keeps the set exactly antisymmetric
    return np.sin(np.pi * np.arange(n - 1, -n, -2) / (2.0 * (n - 1)))


def cheb_diff(n: int, max_order: int = 2) -> ChebGrid:
    """Chebyshev differentiation matrices on the CGL points.

    Follows the Weideman-Reddy construction: differences x_k - x_j come
    from a trigonometric identity, the lower half is obtained by flipping
    the upper half, and diagonals are negative row sums.  The second
    derivative comes from the recursion for higher-order matrices, not from
    squaring d1.
    """
    if max_order not in (1, 2):
        raise InvalidArgument(f"max_order must be 1 or 2, got {max_order}")
    x = cgl_nodes(n)
    n = int(n)
    n1, n2 = n // 2, (n + 1) // 2
    th = (np.arange(n) * np.pi / (n - 1))[:, None]
    T = np.tile(th / 2, (1, n))
    DX = 2.0 * np.sin(T.T + T) * np.sin(T.T - T)
    DX[n1:, :] = -np.flipud(np.fliplr(DX[:n2, :]))
    np.fill_diagonal(DX, 1.0)

    C = toeplitz((-1.0) ** np.arange(n))
    C[0, :] *= 2.0
    C[-1, :] *= 2.0
    C[:, 0] /= 2.0
    C[:, -1] /= 2.0

    Z = 1.0 / DX
    np.fill_diagonal(Z, 0.0)

    mats = []
    D = np.eye(n)
    for ell in range(1, max_order + 1):
        D = ell * Z * (C * np.diag(D)[:, None] - D)
        np.fill_diagonal(D, -D.sum(axis=1))
        mats.append(D)
    d2 = mats[1] if max_order == 2 else None
    return ChebGrid(n_points=n, nodes=x, d1=mats[0], d2=d2)


def map_matrices(grid: ChebGrid, amap: AffineMap) -> ChebGrid:
    """Transplant a reference grid on [-1, 1] to [amap.a, amap.b]."""
    if grid.interval != (-1.0, 1.0):
        raise InvalidArgument("map_matrices expects a grid on [-1, 1]")
    s = amap.scale
    if amap.a == -1.0 and amap.b == 1.0:
        return grid
    d2 = None if grid.d2 is None else grid.d2 * (s * s)
    return ChebGrid(
        n_points=grid.n_points,
        nodes=amap.to_physical(grid.nodes),
        d1=grid.d1 * s,
        d2=d2,
        interval=(float(amap.a), float(amap.b)),
    )


def sinc_grid(n_points: int, h: float, center: float = 0.0) -> SincGrid:
    """Uniform sinc grid of n_points nodes centred on `center`.

    Nodes are center + (k - (n_points-1)/2) h.  An even point count gives a
    grid staggered by h/2 around the centre.
    """
    if h <= 0 or not np.isfinite(h):
        raise InvalidArgument(f"sinc step must be positive, got {h}")
    if int(n_points) != n_points or n_points < 2:
        raise InvalidArgument(f"sinc grid needs at least 2 points, got {n_points}")
    n = int(n_points)
    k = np.arange(n)
    nodes = center + (k - (n - 1) / 2.0) * h
    m = k[:, None] - k[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = -2.0 * (-1.0) ** m / (h * h * m * m)
    np.fill_diagonal(d2, -np.pi ** 2 / (3.0 * h * h))
    return SincGrid(n_points=n, step_h=float(h), center=float(center), nodes=nodes, d2=d2)


def sinc_d2(M: int, h: float, center: float = 0.0) -> SincGrid:
    """Symmetric sinc grid with 2M+1 nodes center + k h, k = -M..M."""
    if int(M) != M or M < 1:
        raise InvalidArgument(f"sinc half-width must be >= 1, got {M}")
    return sinc_grid(2 * int(M) + 1, h, center)


def cheb_coeffs(values) -> np.ndarray:
    """Chebyshev coefficients of the interpolant through values at CGL nodes."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 2:
        raise InvalidArgument("need at least 2 samples for a Chebyshev transform")
    n = v.shape[0]
    c = dct(v, type=1, axis=0) / (n - 1)
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def cheb_values(coeffs) -> np.ndarray:
    """Inverse of cheb_coeffs: samples at CGL nodes from Chebyshev coefficients."""
    c = np.array(coeffs, dtype=float)
    if c.shape[0] < 2:
        raise InvalidArgument("need at least 2 coefficients")
    c[1:-1] *= 0.5
    return dct(c, type=1, axis=0)

"""Planar convex bodies as truncated Fourier series of the support function.

``h(theta) = a_0 + sum_{k=1}^N a_k cos(k theta) + b_k sin(k theta)``.  The
curvature function (radius of curvature) is ``f = h + h''``, which scales
mode ``k`` by ``1 - k**2``; the first harmonics carry translation only.
All integrals use the equispaced circle grid, exact for products of two
degree-N polynomials as long as ``2N < M``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import DimensionError, SphereGrid, circle_grid, integrate, moment_newton

__all__ = [
    "ConvexityError",
    "NotOriginInteriorError",
    "SantaloError",
    "Body2D",
    "analyze",
    "curvature_fn",
    "volume",
    "mixed_volume",
    "polar_volume",
    "translate",
    "santalo_point",
    "hausdorff",
    "random_body",
    "disk",
    "ellipse",
]

FLAT_TOL = 1e-10


class ConvexityError(ValueError):
    """Curvature function is not positive on the grid."""


class NotOriginInteriorError(ValueError):
    pass


class SantaloError(RuntimeError):
    pass


def default_degree(grid: SphereGrid) -> int:
    return grid.size // 4


def _synthesize(a, b, m):
    n = len(a) - 1
    spec = np.zeros(m // 2 + 1, dtype=complex)
    spec[0] = a[0] * m
    spec[1 : n + 1] = (a[1:] - 1j * b[1:]) * (m / 2)
    return np.fft.irfft(spec, n=m)


def analyze(samples, grid: SphereGrid, degree: int | None = None):
    """Fourier coefficients ``(a, b)`` of grid samples, truncated to ``degree``."""
    s = grid.check_samples(samples)
    m = grid.size
    degree = default_degree(grid) if degree is None else degree
    if 2 * degree >= m:
        raise ValueError("degree must stay below half the node count")
    spec = np.fft.rfft(s)[: degree + 1]
    a = 2 * spec.real / m
    b = -2 * spec.imag / m
    a[0] = spec[0].real / m
    b[0] = 0.0
    return a, b


@dataclass(frozen=True, eq=False)
class Body2D:
    """Support-function Fourier coefficients bound to a circle grid."""

    a: np.ndarray
    b: np.ndarray
    grid: SphereGrid = field(default_factory=circle_grid)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("coefficient arrays must be 1-D and equal length")
        if 2 * (len(a) - 1) >= self.grid.size:
            raise DimensionError("degree too high for the grid")
        b[0] = 0.0
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_samples(cls, h, grid: SphereGrid, degree: int | None = None) -> "Body2D":
        a, b = analyze(h, grid, degree)
        return cls(a, b, grid)

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    @functools.cached_property
    def h(self) -> np.ndarray:
        out = _synthesize(self.a, self.b, self.grid.size)
        out.setflags(write=False)
        return out

    @functools.cached_property
    def f(self) -> np.ndarray:
        k = np.arange(self.degree + 1)
        scale = 1.0 - k**2
        out = _synthesize(self.a * scale, self.b * scale, self.grid.size)
        out.setflags(write=False)
        return out

    @property
    def curvature(self) -> np.ndarray:
        return self.f

    @property
    def support(self) -> np.ndarray:
        return self.h

    @property
    def dim(self) -> int:
        return 2

    @property
    def is_symmetric(self) -> bool:
        """Origin-symmetric: every odd coefficient is exactly zero."""
        return not (np.any(self.a[1::2]) or np.any(self.b[1::2]))

    @property
    def origin_interior(self) -> bool:
        return bool(self.h.min() > 0)

    def check_convex(self):
        if self.f.min() < FLAT_TOL:
            raise ConvexityError(
                f"curvature function reaches {self.f.min():.3e} (< {FLAT_TOL:g})"
            )

    @functools.cached_property
    def volume(self) -> float:
        self.check_convex()
        return 0.5 * integrate(self.h * self.f, self.grid)

    def perimeter(self) -> float:
        return 2 * math.pi * float(self.a[0])

    def eval(self, theta) -> np.ndarray:
        """Support function at arbitrary angles."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(self.degree + 1)
        kt = np.multiply.outer(theta, k)
        return np.cos(kt) @ self.a + np.sin(kt) @ self.b

    def eval_derivative(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k = np.arange(self.degree + 1)
        kt = np.multiply.outer(theta, k)
        return np.cos(kt) @ (k * self.b) - np.sin(kt) @ (k * self.a)

    def support_at(self, v) -> np.ndarray:
        """``h_K(v)`` for arbitrary (not necessarily unit) vectors."""
        v = np.atleast_2d(v)
        r = np.linalg.norm(v, axis=1)
        return r * self.eval(np.arctan2(v[:, 1], v[:, 0]))

    def boundary(self, theta) -> np.ndarray:
        """Boundary point with outer normal ``u(theta)``: ``h u + h' u_perp``."""
        theta = np.asarray(theta, dtype=float)
        h, dh = self.eval(theta), self.eval_derivative(theta)
        c, s = np.cos(theta), np.sin(theta)
        return np.column_stack([h * c - dh * s, h * s + dh * c])

    def scaled(self, lam: float) -> "Body2D":
        return Body2D(self.a * lam, self.b * lam, self.grid)

    def with_degree(self, degree: int) -> "Body2D":
        a = np.zeros(degree + 1)
        b = np.zeros(degree + 1)
        n = min(degree, self.degree)
        a[: n + 1] = self.a[: n + 1]
        b[: n + 1] = self.b[: n + 1]
        return Body2D(a, b, self.grid)

    def symmetrized(self) -> "Body2D":
        """Drop the odd modes."""
        a, b = self.a.copy(), self.b.copy()
        a[1::2] = 0.0
        b[1::2] = 0.0
        return Body2D(a, b, self.grid)

    def translate(self, x) -> "Body2D":
        return translate(self, x)

    def polar_volume(self) -> float:
        return polar_volume(self)

    def santalo_point(self) -> np.ndarray:
        return santalo_point(self)

    def snapshot_rows(self):
        return zip(self.grid.theta, self.h, self.f)

    def __repr__(self):
        return f"Body2D(degree={self.degree}, a0={self.a[0]:.6g}, grid={self.grid!r})"


def curvature_fn(K: Body2D) -> np.ndarray:
    return K.f


def volume(K: Body2D) -> float:
    return K.volume


def mixed_volume(K: Body2D, L: Body2D) -> float:
    """``V_1(K, L) = 1/2 int h_L f_K``."""
    if not K.grid.same_as(L.grid):
        raise DimensionError("bodies live on different grids")
    return 0.5 * integrate(L.h * K.f, K.grid)


def polar_volume(K: Body2D) -> float:
    """``V(K*) = 1/2 int h^-2``."""
    if not K.origin_interior:
        raise NotOriginInteriorError("support function is not positive on the grid")
    return 0.5 * integrate(K.h**-2.0, K.grid)


def translate(K: Body2D, x) -> Body2D:
    """``K - x``: only the first harmonics move."""
    x = np.asarray(x, dtype=float)
    a, b = K.a.copy(), K.b.copy()
    if K.degree < 1:
        a, b = np.append(a, 0.0), np.append(b, 0.0)
    a[1] -= x[0]
    b[1] -= x[1]
    return Body2D(a, b, K.grid)


def santalo_point(K: Body2D, tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Minimizer of ``x -> 1/2 int (h - <x,u>)^-2``, i.e. ``int u (h-<x,u>)^-3 = o``."""
    x0 = None
    if K.h.min() <= 0:
        x0 = K.boundary(K.grid.theta).mean(axis=0)
    x, ok, _ = moment_newton(K.h, K.grid, 1.0, -3.0, tol, max_iter, x0)
    if not ok:
        raise SantaloError("Newton iteration for the Santalo point did not converge")
    return x


def hausdorff(K: Body2D, L: Body2D) -> float:
    if not K.grid.same_as(L.grid):
        raise DimensionError("bodies live on different grids")
    return float(np.abs(K.h - L.h).max())


def random_body(seed: int, N: int = 8, amplitude: float = 0.3, even: bool = False,
                grid: SphereGrid | None = None, degree: int | None = None) -> Body2D:
    """``h = 1 + sum_{k>=2} c_k`` with Gaussian coefficients decaying as ``k^-3``.

    The perturbation is shrunk (never grown) so that ``min f >= 0.1``.
    ``degree`` pads the coefficient arrays (defaults to ``N``).
    """
    if not 0 <= amplitude < 1:
        raise ValueError("amplitude must lie in [0, 1)")
    grid = grid or circle_grid()
    rng = np.random.default_rng(seed)
    degree = N if degree is None else max(degree, N)
    a = np.zeros(degree + 1)
    b = np.zeros(degree + 1)
    k = np.arange(2, N + 1)
    a[2 : N + 1] = amplitude * rng.standard_normal(len(k)) * k**-3.0
    b[2 : N + 1] = amplitude * rng.standard_normal(len(k)) * k**-3.0
    if even:
        a[1::2] = 0.0
        b[1::2] = 0.0
    a[0] = 0.0
    pert = Body2D(a, b, grid)
    low = -pert.f.min()
    if low > 0.9:
        pert = pert.scaled(0.9 / low)
    a = pert.a.copy()
    a[0] = 1.0
    return Body2D(a, pert.b, grid)


def disk(r: float = 1.0, grid: SphereGrid | None = None, degree: int | None = None) -> Body2D:
    grid = grid or circle_grid()
    degree = default_degree(grid) if degree is None else degree
    a = np.zeros(degree + 1)
    a[0] = r
    return Body2D(a, np.zeros(degree + 1), grid)


def ellipse(a: float, b: float, grid: SphereGrid | None = None,
            degree: int | None = None, center=(0.0, 0.0)) -> Body2D:
    """Ellipse with semi-axes ``a`` (x) and ``b`` (y), projected to ``degree``."""
    grid = grid or circle_grid()
    t = grid.theta
    h = np.sqrt((a * np.cos(t)) ** 2 + (b * np.sin(t)) ** 2)
    h = h + center[0] * np.cos(t) + center[1] * np.sin(t)
    return Body2D.from_samples(h, grid, degree)

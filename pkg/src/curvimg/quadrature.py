"""Quadrature on the unit circle and the unit sphere.

Every integral over the sphere in the package goes through a
:class:`SphereGrid`: a fixed set of unit nodes with positive weights that
sum to the total measure of the sphere.  On the circle the grid is the
equispaced trapezoid rule, which is exact for trigonometric polynomials of
degree below the node count.  On the 2-sphere the nodes are the vertices of
a subdivided icosahedron and the weights are spherical Voronoi cell areas,
averaged over antipodal pairs so that odd integrands cancel exactly.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import SphericalVoronoi, cKDTree

__all__ = [
    "DimensionError",
    "SphereGrid",
    "Density",
    "circle_grid",
    "icosphere_grid",
    "make_grid",
    "integrate",
    "vector_moment",
    "icosphere_node_count",
    "second_moment",
    "moment_newton",
]

DEFAULT_CIRCLE_NODES = 512
DEFAULT_SPHERE_NODES = 642


class DimensionError(ValueError):
    """Raised when sample arrays do not match the grid they are used with."""


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes ``u_i`` on S^(n-1) with weights ``w_i``.

    ``antipode[i]`` is the index of ``-u_i``.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    antipode: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.antipode):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def total_measure(self) -> float:
        return 2 * math.pi if self.dim == 2 else 4 * math.pi

    @functools.cached_property
    def theta(self) -> np.ndarray:
        """Polar angles of the nodes (circle grids only)."""
        if self.dim != 2:
            raise DimensionError("theta is only defined on circle grids")
        return 2 * np.pi * np.arange(self.size) / self.size

    def same_as(self, other: "SphereGrid") -> bool:
        return self is other or (
            self.dim == other.dim
            and self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
        )

    def check_samples(self, samples) -> np.ndarray:
        s = np.asarray(samples, dtype=float)
        if s.shape[0] != self.size:
            raise DimensionError(
                f"expected {self.size} samples on this grid, got {s.shape[0]}"
            )
        return s

    def __repr__(self):
        return f"SphereGrid(dim={self.dim}, size={self.size})"


@functools.lru_cache(maxsize=None)
def circle_grid(m: int = DEFAULT_CIRCLE_NODES) -> SphereGrid:
    """Equispaced nodes ``theta_k = 2 pi k / m`` with equal weights."""
    if m < 4 or m % 2:
        raise ValueError("circle grids need an even node count >= 4")
    theta = 2 * np.pi * np.arange(m) / m
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    weights = np.full(m, 2 * np.pi / m)
    antipode = (np.arange(m) + m // 2) % m
    return SphereGrid(2, nodes, weights, antipode)


def icosphere_node_count(level: int) -> int:
    return 10 * 4**level + 2


def _icosahedron():
    g = (1 + math.sqrt(5)) / 2
    verts = np.array(
        [
            [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
            [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
            [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1],
        ],
        dtype=float,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return verts / np.linalg.norm(verts, axis=1, keepdims=True), faces


def _subdivide(verts, faces):
    verts = list(verts)
    cache = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = verts[i] + verts[j]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(out)


@functools.lru_cache(maxsize=None)
def icosphere_grid(level: int = 3) -> SphereGrid:
    """Subdivided icosahedron with ``10*4**level + 2`` nodes.

    Level 3 gives 642 nodes (1280 faces), level 4 gives 2562.
    """
    verts, faces = _icosahedron()
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)

    tree = cKDTree(verts)
    _, antipode = tree.query(-verts)
    if not np.array_equal(antipode[antipode], np.arange(len(verts))):
        raise RuntimeError("icosphere nodes are not antipodally paired")
    # make the pairing bit-exact: keep the lower index, negate for the partner
    lead = np.arange(len(verts)) < antipode
    verts = verts.copy()
    verts[antipode[lead]] = -verts[lead]

    sv = SphericalVoronoi(verts, radius=1.0, center=np.zeros(3))
    areas = sv.calculate_areas()
    areas = 0.5 * (areas + areas[antipode])
    areas *= 4 * np.pi / areas.sum()
    return SphereGrid(3, verts, areas, antipode)


def make_grid(dim: int, resolution: int | None = None) -> SphereGrid:
    """Grid from a config-style spec.

    For ``dim=2`` the resolution is the node count.  For ``dim=3`` it may be
    either a node count (642, 2562, ...) or a subdivision level (<= 8).
    """
    if dim == 2:
        return circle_grid(resolution or DEFAULT_CIRCLE_NODES)
    if dim == 3:
        resolution = resolution or DEFAULT_SPHERE_NODES
        if resolution <= 8:
            return icosphere_grid(resolution)
        for level in range(9):
            if icosphere_node_count(level) == resolution:
                return icosphere_grid(level)
        raise ValueError(
            f"{resolution} is not an icosphere node count (10*4**k + 2)"
        )
    raise ValueError(f"unsupported dimension {dim}")


def integrate(samples, grid: SphereGrid) -> float:
    """Quadrature of ``int s d sigma``: ``sum_i w_i s_i``."""
    s = grid.check_samples(samples)
    return float(grid.weights @ s)


def vector_moment(samples, grid: SphereGrid) -> np.ndarray:
    """Quadrature of ``int u s(u) d sigma``."""
    s = grid.check_samples(samples)
    return (grid.weights * s) @ grid.nodes


def second_moment(samples, grid: SphereGrid) -> np.ndarray:
    """Quadrature of ``int u u^T s(u) d sigma``."""
    s = grid.check_samples(samples)
    u = grid.nodes
    return (u * (grid.weights * s)[:, None]).T @ u


def moment_newton(h, grid: SphereGrid, weight, power: float, tol: float,
                  max_iter: int = 100, x0=None):
    """Find ``x`` with ``int u weight (h - <x,u>)^power d sigma = o``.

    This is the critical point of the strictly convex potential whose
    Hessian is ``-power int u u^T weight (h-<x,u>)^(power-1)`` (``power < 0``).
    Damped Newton, halving steps that leave ``{h - <x,u> > 0}`` or fail to
    reduce the moment norm.  Returns ``(x, converged, iterations)``.
    """
    u = grid.nodes
    wq = grid.weights * weight
    x = np.zeros(u.shape[1]) if x0 is None else np.array(x0, dtype=float)

    def moment(x):
        s = h - u @ x
        if s.min() <= 0:
            return None, None
        return (wq * s**power) @ u, s

    g, s = moment(x)
    if g is None:
        return x, False, 0
    scale = float(np.abs(wq * s**power).sum())
    for it in range(max_iter + 1):
        gn = np.linalg.norm(g)
        if gn <= tol * max(1.0, scale):
            return x, True, it
        H = -power * (u * (wq * s ** (power - 1))[:, None]).T @ u
        step = np.linalg.solve(H, -g)
        t = 1.0
        for _ in range(60):
            trial = x + t * step
            gt, st = moment(trial)
            if gt is not None and np.linalg.norm(gt) < gn:
                break
            t *= 0.5
        else:
            return x, False, it
        x, g, s = trial, gt, st
    return x, False, max_iter


@dataclass(frozen=True, eq=False)
class Density:
    """Positive weight function sampled once on a grid.

    ``func`` is kept when the density came from an analytic expression so
    it can be evaluated off-grid; it is ``None`` for tabulated densities.
    """

    grid: SphereGrid
    samples: np.ndarray
    even: bool
    func: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        s = self.grid.check_samples(self.samples)
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("density samples must be finite and positive")
        if self.even and not np.array_equal(s, s[self.grid.antipode]):
            raise ValueError("density flagged even but phi(u) != phi(-u)")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def constant(cls, grid: SphereGrid, value: float = 1.0) -> "Density":
        return cls(grid, np.full(grid.size, float(value)), True,
                   func=lambda u: np.full(len(u), float(value)))

    @classmethod
    def from_function(cls, grid: SphereGrid, func, tol: float = 1e-13) -> "Density":
        """Sample ``func(u)`` (u of shape (k, n)); evenness is auto-detected.

        A density detected as even is symmetrized so ``phi(u_i) == phi(-u_i)``
        holds bit for bit.
        """
        s = np.asarray(func(grid.nodes), dtype=float) * np.ones(grid.size)
        flipped = np.asarray(func(-grid.nodes), dtype=float) * np.ones(grid.size)
        s, even = _detect_even(s, flipped, grid, tol)
        return cls(grid, s, even, func=func)

    @classmethod
    def from_csv(cls, grid: SphereGrid, path, tol: float = 1e-13) -> "Density":
        """Read a two-column ``node_index,phi_value`` table."""
        values = np.full(grid.size, np.nan)
        with open(Path(path), newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    idx, val = int(row[0]), float(row[1])
                except ValueError:
                    if row[0].strip() == "node_index":
                        continue
                    raise
                values[idx] = val
        if np.isnan(values).any():
            raise DimensionError("density table does not cover every grid node")
        values, even = _detect_even(values, values[grid.antipode], grid, tol)
        return cls(grid, values, even)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.samples == self.samples[0]))

    def at(self, u) -> np.ndarray:
        """Evaluate at arbitrary unit vectors.

        Uses the analytic function when available; on the circle tabulated
        samples are trigonometrically interpolated.
        """
        u = np.atleast_2d(u)
        if self.func is not None:
            return np.asarray(self.func(u), dtype=float) * np.ones(len(u))
        if self.grid.dim == 2:
            return _trig_interpolate(self.samples, np.arctan2(u[:, 1], u[:, 0]))
        raise NotImplementedError("off-grid evaluation of tabulated S^2 densities")


def _detect_even(s, flipped, grid, tol):
    even = bool(np.all(np.abs(s - flipped) <= tol * np.maximum(1.0, np.abs(s))))
    if even:
        s = 0.5 * (s + s[grid.antipode])
    return s, even


def _trig_interpolate(samples, theta):
    m = len(samples)
    coef = np.fft.rfft(samples) / m
    k = np.arange(len(coef))
    weight = np.where((k == 0) | (2 * k == m), 1.0, 2.0)
    phase = np.exp(1j * np.outer(theta, k))
    return (phase @ (weight * coef)).real

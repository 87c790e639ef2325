"""Minkowski existence problem: the body with prescribed curvature data.

In the plane the problem is linear, ``h'' + h = g``, and is solved mode by
mode.  On S^2 the data are facet areas ``a_i`` over the normal grid and the
polytope is found by Newton's method on the convex potential
``F(h) = <a, h> - log V(h)``, whose gradient ``a - A(h)/V(h)`` vanishes
exactly when the facet areas are proportional to ``a``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import polytope3d as p3
from .body2d import Body2D, analyze, default_degree
from .quadrature import SphereGrid, second_moment, vector_moment

logger = logging.getLogger(__name__)

__all__ = [
    "ClosureError",
    "SolverError",
    "CurvatureData",
    "closure_repair",
    "solve_2d",
    "solve_3d",
    "solve_areas",
    "SolveInfo",
]

DEFAULT_CLOSURE_TOL = 1e-8


class ClosureError(ValueError):
    """Data violate ``int u g d sigma = o`` beyond the repair threshold."""


class SolverError(RuntimeError):
    pass


class ClosureRepairWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """Prescribed curvature samples ``g_i`` on a grid.

    Zero samples are allowed in 3D and mean the normal is excluded from the
    support of the measure.
    """

    grid: SphereGrid
    g: np.ndarray
    closure_tol: float = DEFAULT_CLOSURE_TOL
    repaired: bool = field(default=False, compare=False)

    def __post_init__(self):
        g = np.array(self.grid.check_samples(self.g), dtype=float)
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("curvature data must be finite and nonnegative")
        if self.grid.dim == 2 and np.any(g <= 0):
            raise ValueError("planar curvature data must be positive")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def areas(self) -> np.ndarray:
        return self.g * self.grid.weights

    @property
    def closure_defect(self) -> float:
        return float(np.linalg.norm(vector_moment(self.g, self.grid)))

    def validated(self) -> "CurvatureData":
        """Repair small closure defects, reject large ones."""
        defect = self.closure_defect
        if defect <= self.closure_tol:
            return self
        if defect > 10 * self.closure_tol:
            raise ClosureError(
                f"closure defect {defect:.3e} exceeds repair threshold "
                f"{10 * self.closure_tol:.1e}"
            )
        g = closure_repair(self.g, self.grid)
        warnings.warn(
            f"curvature data closure defect {defect:.2e} repaired",
            ClosureRepairWarning,
            stacklevel=2,
        )
        return CurvatureData(self.grid, g, self.closure_tol, repaired=True)


def closure_repair(g, grid: SphereGrid) -> np.ndarray:
    """``g * (1 + <beta, u>)`` with ``beta`` solving the linear closure system."""
    m = vector_moment(g, grid)
    beta = np.linalg.solve(second_moment(g, grid), -m)
    return g * (1.0 + grid.nodes @ beta)


def solve_2d(data: CurvatureData, degree: int | None = None) -> Body2D:
    """Spectral solve of ``h + h'' = g`` with zero first harmonics."""
    data = data.validated()
    grid = data.grid
    degree = default_degree(grid) if degree is None else degree
    a, b = analyze(data.g, grid, degree)
    if math.hypot(a[1], b[1]) * math.pi > data.closure_tol:
        raise ClosureError("first harmonic of the data does not vanish")
    k = np.arange(degree + 1)
    denom = 1.0 - k.astype(float) ** 2
    denom[1] = 1.0
    a, b = a / denom, b / denom
    a[1] = b[1] = 0.0
    K = Body2D(a, b, grid)
    K.check_convex()
    return K


@dataclass
class SolveInfo:
    iterations: int = 0
    residual: float = math.inf
    min_step: float = 1.0
    history: list = field(default_factory=list)


def solve_areas(u, a, w=None, h0=None, tol: float = 1e-11, max_newton: int = 100,
                grid: SphereGrid | None = None, info: SolveInfo | None = None):
    """Support numbers on normals ``u`` whose polytope has facet areas ``a``.

    ``u`` must be the node array of ``grid`` (or a subset wrapped in its own
    grid).  Returns ``h`` normalized so that ``A(h) = a``.
    """
    info = info if info is not None else SolveInfo()
    m = len(a)
    a = np.asarray(a, dtype=float)
    w = np.full(m, 4 * np.pi / m) if w is None else np.asarray(w, dtype=float)
    T = u / np.sqrt(m)

    # a round start keeps every facet active; at the optimum <a, h> = 3
    h = np.ones(m) if h0 is None else np.array(h0, dtype=float)
    h *= 3.0 / float(a @ h)
    P = p3.reconstruct(h, grid)

    def merit(P):
        return float(a @ P.h) - math.log(P.volume)

    F = merit(P)
    for it in range(max_newton + 1):
        A, V = P.areas, P.volume
        resid = np.abs(A * (a.sum() / A.sum()) - a).max() / a.max()
        info.iterations, info.residual = it, resid
        info.history.append(resid)
        if resid < tol:
            break
        grad = a - A / V
        grad -= T @ np.linalg.lstsq(T, grad, rcond=None)[0]
        J = P.area_hessian()
        hess = -J / V + np.outer(A, A) / V**2
        tau = np.trace(hess) / m
        reg = tau * (T @ T.T)
        inactive = A <= 0
        hess = hess + reg
        hess[inactive, inactive] += tau
        step = np.linalg.solve(hess, -grad)
        slope = float(grad @ step)
        t = 1.0
        while True:
            try:
                Pt = p3.reconstruct(P.h + t * step, grid)
                Ft = merit(Pt)
            except p3.ReconstructionError:
                Ft = math.inf
            if Ft <= F + 1e-4 * t * slope or (t < 1e-3 and Ft <= F + 1e-13 * abs(F)):
                break
            t *= 0.5
            if t < 2.0**-20:
                raise SolverError(
                    f"line search stalled at Newton step {it} (residual {resid:.2e})"
                )
        info.min_step = min(info.min_step, t)
        P, F = Pt, Ft
    else:
        raise SolverError(
            f"no convergence after {max_newton} Newton steps (residual {resid:.2e})"
        )
    lam = P.volume ** -0.5
    return P.h * lam, info


def solve_3d(data: CurvatureData, tol: float = 1e-11, max_newton: int = 100,
             h0=None, center: bool = True, info: SolveInfo | None = None) -> p3.Polytope3D:
    """Polytope on ``data.grid`` whose facet areas equal ``data.areas``.

    Nodes with zero data are excluded from the solve; their support numbers
    are set to the support function of the solution, so those halfspaces
    touch the polytope without contributing area.  With ``center`` the
    result is translated so its vertex centroid sits at the origin.
    Pass a :class:`SolveInfo` to collect the Newton diagnostics.
    """
    info = info if info is not None else SolveInfo()
    data = data.validated()
    grid = data.grid
    a_full = data.areas
    mask = a_full > 0
    if mask.all():
        a = a_full - _closure_projection(a_full, grid.nodes)
        h, _ = solve_areas(grid.nodes, a, grid.weights, h0, tol, max_newton, grid, info)
        P = p3.reconstruct(h, grid)
    else:
        sub = _subgrid(grid, mask)
        a = a_full[mask] - _closure_projection(a_full[mask], sub.nodes)
        h, _ = solve_areas(sub.nodes, a, sub.weights,
                           None if h0 is None else np.asarray(h0)[mask],
                           tol, max_newton, sub, info)
        Q = p3.reconstruct(h, sub)
        P = p3.reconstruct(p3.support_eval(Q, grid.nodes), grid)
    logger.debug("3D Minkowski solve: %d Newton steps, residual %.2e",
                 info.iterations, info.residual)
    if center:
        P = P.translate(P._unique_vertices().mean(axis=0))
    return P


def _closure_projection(a, u):
    # smallest change of a (in l2) making sum a_i u_i = 0; roundoff sized here
    m = a @ u
    return u @ np.linalg.solve(u.T @ u, m)


def _subgrid(grid: SphereGrid, mask) -> SphereGrid:
    idx = np.flatnonzero(mask)
    remap = np.full(grid.size, -1)
    remap[idx] = np.arange(len(idx))
    anti = remap[grid.antipode[idx]]
    anti = np.where(anti < 0, np.arange(len(idx)), anti)
    return SphereGrid(3, grid.nodes[idx], grid.weights[idx], anti)

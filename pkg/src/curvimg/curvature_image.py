"""The curvature image operator and its fixed-point residual.

``apply`` forms the prescribed curvature data

    g = V(K) / ((1/n) int h_K^p / phi) * h_K^(p-1) / phi,

solves the Minkowski problem for ``g`` and translates the result so that
``int u h^(p-1) / phi d sigma = o``.  Fixed points satisfy
``phi h^(1-p) f = const``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import polytope3d as p3
from .body2d import Body2D, default_degree
from .functionals import phi_samples
from .minkowski import DEFAULT_CLOSURE_TOL, CurvatureData, solve_2d, solve_3d
from .quadrature import Density, integrate, moment_newton, vector_moment

logger = logging.getLogger(__name__)

__all__ = [
    "AssumptionError",
    "NormalizationError",
    "OperatorConfig",
    "check_assumption",
    "normalize_translation",
    "lambda_data",
    "apply",
    "fixed_point_residual",
    "mixed_volume",
]


class AssumptionError(ValueError):
    """None of the admissible (p, phi, K) cases applies."""


class NormalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OperatorConfig:
    p: float
    phi: Density | None = None
    closure_tol: float = DEFAULT_CLOSURE_TOL
    normalize_tol: float = 1e-10
    degree: int | None = None
    unsafe: bool = False

    def check(self, n: int):
        if abs(self.p - 1) < 1e-9:
            raise ValueError("p = 1 is excluded")
        if not -n <= self.p < 1:
            raise ValueError(f"operator needs p in [-{n}, 1), got {self.p}")
        if self.p == -n and self.phi is not None and not self.phi.is_constant:
            raise ValueError(f"p = -{n} is only admitted with constant phi")


def _phi_is_constant(phi) -> bool:
    return phi is None or not isinstance(phi, Density) or phi.is_constant


def _phi_is_even(phi) -> bool:
    return phi is None or not isinstance(phi, Density) or phi.even


def check_assumption(K, phi, p: float, closure_tol: float = DEFAULT_CLOSURE_TOL) -> int:
    """Return the first admissible case (1, 2 or 3) or raise :class:`AssumptionError`.

    1. ``-n < p != 1``, phi even, K origin-symmetric.
    2. ``-n < p <= -n+1``, K contains o, ``int u / (phi h^(1-p)) = o``.
    3. ``-n <= p != 1``, phi constant, K contains o, ``int u h^(p-1) = o``.
    """
    n = K.grid.dim
    failed = []
    p_ok = abs(p - 1) >= 1e-12
    h = K.support
    ph = phi_samples(phi, K.grid)
    interior = bool(h.min() > 0)

    def moment(weight):
        if not interior:
            return math.inf
        return float(np.linalg.norm(vector_moment(h ** (p - 1) * weight, K.grid)))

    if p_ok and p > -n and _phi_is_even(phi) and K.is_symmetric:
        return 1
    failed.append(
        "case 1: needs -n < p != 1, even phi and origin-symmetric K"
        f" (p={p}, phi even={_phi_is_even(phi)}, K symmetric={K.is_symmetric})"
    )
    if -n < p <= -n + 1 and interior:
        m = moment(1.0 / ph)
        if m < closure_tol:
            return 2
        failed.append(f"case 2: moment of 1/(phi h^(1-p)) is {m:.2e} >= {closure_tol:g}")
    else:
        failed.append(f"case 2: needs -n < p <= -n+1 and h > 0 (p={p}, min h={h.min():.3g})")
    if p_ok and p >= -n and _phi_is_constant(phi) and interior:
        m = moment(1.0)
        if m < closure_tol:
            return 3
        failed.append(f"case 3: moment of h^(p-1) is {m:.2e} >= {closure_tol:g}")
    else:
        failed.append("case 3: needs -n <= p != 1, constant phi and h > 0")
    raise AssumptionError("no admissible case: " + "; ".join(failed))


def normalize_translation(K, phi=None, p: float = 0.0, tol: float = 1e-10,
                          max_iter: int = 100):
    """Translate ``K`` so that ``int u h^(p-1) / phi d sigma = o``.

    The translation is the critical point of the strictly convex potential
    ``x -> -int h_{K-x}^p / (p phi)`` (``int -log h_{K-x} / phi`` at p=0).
    """
    if not p < 1:
        raise ValueError("normalization needs p < 1")
    if K.is_symmetric and _phi_is_even(phi):
        return K
    ph = phi_samples(phi, K.grid)
    x0 = None
    if K.support.min() <= 0:
        x0 = K.santalo_point()
    x, ok, _ = moment_newton(K.support, K.grid, 1.0 / ph, p - 1.0, tol, max_iter, x0)
    if not ok:
        raise NormalizationError(f"translation normalization did not converge (p={p})")
    return K.translate(x)


def _scale_constant(K, ph, p):
    n = K.grid.dim
    return K.volume / (integrate(K.support**p / ph, K.grid) / n)


def lambda_data(K, phi=None, p: float = 0.0,
                closure_tol: float = DEFAULT_CLOSURE_TOL) -> CurvatureData:
    """Curvature data of the image body, closure-checked."""
    h = K.support
    if h.min() <= 0:
        raise ValueError("curvature image needs h > 0 on the grid")
    ph = phi_samples(phi, K.grid)
    g = _scale_constant(K, ph, p) * h ** (p - 1) / ph
    return CurvatureData(K.grid, g, closure_tol).validated()


def _symmetrize(K):
    if isinstance(K, Body2D):
        return K.symmetrized()
    h = 0.5 * (K.support + K.support[K.grid.antipode])
    return p3.reconstruct(h, K.grid)


def apply(K, config: OperatorConfig, h0=None):
    """One application of the curvature image operator."""
    n = K.grid.dim
    config.check(n)
    p, phi = config.p, config.phi
    try:
        case = check_assumption(K, phi, p, config.closure_tol)
    except AssumptionError:
        if not config.unsafe:
            raise
        case = 0
        logger.warning("assumptions violated; continuing because unsafe=True")

    if case == 1:
        K = _symmetrize(K)
    data = lambda_data(K, phi, p, config.closure_tol)

    if isinstance(K, Body2D):
        degree = config.degree or max(K.degree, default_degree(K.grid))
        if case == 1:
            data = CurvatureData(data.grid, 0.5 * (data.g + data.g[data.grid.antipode]),
                                 data.closure_tol)
        L = solve_2d(data, degree)
    else:
        if case == 1:
            data = CurvatureData(data.grid, 0.5 * (data.g + data.g[data.grid.antipode]),
                                 data.closure_tol)
        L = solve_3d(data, h0=K.support if h0 is None else h0)
    if case == 1:
        return _symmetrize(L) if not L.is_symmetric else L
    return normalize_translation(L, phi, p, config.normalize_tol)


def fixed_point_residual(K, phi=None, p: float = 0.0) -> float:
    """``max |phi h^(1-p) f / c - 1|`` with ``c = V / ((1/n) int h^p / phi)``."""
    ph = phi_samples(phi, K.grid)
    h = K.support
    c = _scale_constant(K, ph, p)
    return float(np.abs(ph * h ** (1 - p) * K.f / c - 1.0).max())


def mixed_volume(K, L) -> float:
    """``V_1(K, L) = (1/n) int h_L f_K d sigma`` for either body type."""
    if not K.grid.same_as(L.grid):
        raise ValueError("bodies live on different grids")
    return integrate(L.support * K.f, K.grid) / K.grid.dim

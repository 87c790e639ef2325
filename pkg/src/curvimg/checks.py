"""Seeded property suites behind ``curvimg check``.

Each suite returns a :class:`SuiteResult` holding the worst measured value
of its check and the threshold that value has to meet.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import body2d as b2
from . import functionals as fn
from . import polytope3d as p3
from .curvature_image import OperatorConfig, apply
from .iteration import RunConfig, iterate, iterate_classical
from .minkowski import ClosureError, CurvatureData
from .quadrature import Density, circle_grid, icosphere_grid, vector_moment

__all__ = ["SuiteResult", "SUITES", "run_suites"]

IDENTITY_P = (-1.5, -0.5, 0.0, 0.5)
MONOTONE_P = (-1.5, 0.0, 0.5)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    threshold: float
    detail: str
    seconds: float = 0.0


def _densities(grid):
    return [None, Density.from_function(grid, lambda u: 1 + 0.5 * (2 * u[:, 0] ** 2 - 1))]


def _bodies(seeds, even=None):
    grid = circle_grid()
    for s in range(seeds):
        sym = (s % 2 == 0) if even is None else even
        yield s, b2.random_body(s, 8, 0.3, sym, grid, 128)


def _result(name, worst, threshold, detail, equality=None):
    """``equality`` is an optional ``(gap, threshold)`` for an equality case."""
    ok = worst <= threshold
    if equality is not None:
        ok = ok and equality[0] <= equality[1]
    return SuiteResult(name, bool(ok), float(worst), threshold, detail)


def suite_blaschke_santalo(seeds):
    grid = circle_grid()
    worst = max(-fn.blaschke_santalo_gap(K) for _, K in _bodies(seeds))
    eq = abs(fn.blaschke_santalo_gap(b2.disk(1.3, grid).translate([0.1, -0.2])))
    return _result("blaschke-santalo", worst, 1e-12,
                   f"max violation {worst:.2e}, disk equality gap {eq:.2e}", (eq, 1e-8))


def suite_minkowski(seeds):
    bodies = [K for _, K in _bodies(seeds + 1, even=False)]
    worst = max(-fn.minkowski_gap(K, L) for K, L in zip(bodies, bodies[1:]))
    eq = abs(fn.minkowski_gap(b2.disk(1.0), b2.disk(2.5)))
    return _result("minkowski", worst, 1e-12,
                   f"max violation {worst:.2e}, homothetic equality gap {eq:.2e}", (eq, 1e-8))


def suite_affine_isoperimetric(seeds):
    worst = max(-fn.affine_isoperimetric_gap(K) for _, K in _bodies(seeds))
    eq = abs(fn.affine_isoperimetric_gap(b2.ellipse(2.0, 0.5, degree=128)))
    return _result("affine-isoperimetric", worst, 1e-12,
                   f"max violation {worst:.2e}, ellipse equality gap {eq:.2e}", (eq, 1e-8))


def suite_holder(seeds):
    worst = -math.inf
    for _, K in _bodies(seeds):
        for phi in _densities(K.grid):
            for p in IDENTITY_P:
                worst = max(worst, -fn.holder_gap(K, phi, p))
    eq = max(abs(fn.holder_gap(b2.disk(0.7), None, p)) for p in IDENTITY_P)
    return _result("holder", worst, 1e-12,
                   f"max violation {worst:.2e}, disk equality gap {eq:.2e}", (eq, 1e-8))


def suite_identity(seeds):
    worst = 0.0
    worst_classical = 0.0
    for _, K in _bodies(seeds, even=True):
        for phi in _densities(K.grid):
            for p in IDENTITY_P:
                L = apply(K, OperatorConfig(p, phi))
                lhs = fn.B_p(L, phi, p)
                rhs = 4 * (K.volume / L.volume) * fn.A_p(K, phi, p)
                worst = max(worst, abs(lhs / rhs - 1))
        L = apply(K, OperatorConfig(-2.0))
        lhs = fn.affine_surface_area(L) ** 3
        rhs = 8 * K.volume**2 * K.polar_volume()
        worst_classical = max(worst_classical, abs(lhs / rhs - 1))
    return _result("identity", max(worst, worst_classical), 1e-7,
                   f"B_p identity {worst:.2e}, affine surface area identity {worst_classical:.2e}")


def suite_monotonicity(seeds):
    worst = 0.0
    phi = _densities(circle_grid())[1]
    for s, K in _bodies(seeds, even=True):
        p = MONOTONE_P[s % len(MONOTONE_P)]
        _, trace = iterate(RunConfig(OperatorConfig(p, phi if s % 2 else None), K, max_iter=30))
        m = trace.monotonicity_violations()
        if trace.status == "error":
            return _result("monotonicity", math.inf, 1e-9, f"seed {s}: {trace.error}")
        worst = max(worst, m["volume_increase"], m["A_p_decrease"],
                    m["omega_power_decrease"], m["volume_above_initial"])
    return _result("monotonicity", worst, 1e-9, f"largest step violation {worst:.2e}")


def suite_classical_chain(seeds):
    worst_mono, worst_limit, worst_sandwich = 0.0, 0.0, 0.0
    starts = [b2.ellipse(2.0, 0.5, degree=128)] + [K for _, K in _bodies(max(1, seeds // 2), even=True)]
    for K0 in starts:
        _, trace = iterate_classical(RunConfig(OperatorConfig(-2.0), K0, max_iter=200))
        if trace.status != "converged":
            return _result("classical-chain", math.inf, 1e-5, f"run ended {trace.status} {trace.error}")
        vp = trace.column("vol_product")
        worst_mono = max(worst_mono, -np.min(np.diff(vp), initial=0.0) / math.pi**2)
        worst_limit = max(worst_limit, abs(vp[-1] / math.pi**2 - 1))
        lower = fn.affine_surface_area(K0) ** 3 / (8 * math.pi**2)
        V = trace.column("volume")
        worst_sandwich = max(worst_sandwich, (lower - V.min()) / lower,
                             (V.max() - K0.volume) / K0.volume)
    worst = max(worst_mono, worst_limit, worst_sandwich)
    return _result("classical-chain", worst, 1e-5,
                   f"volume product monotonicity {worst_mono:.2e}, limit {worst_limit:.2e}, "
                   f"sandwich {worst_sandwich:.2e}")


def suite_closure(seeds):
    worst = 0.0
    for _, K in _bodies(seeds):
        worst = max(worst, float(np.linalg.norm(vector_moment(K.f, K.grid))))
    grid = icosphere_grid(3)
    for s in range(min(seeds, 3)):
        P = p3.random_polytope(s, grid=grid)
        worst = max(worst, P.closure_defect)
    g = np.ones(circle_grid().size) + 0.1 * circle_grid().nodes[:, 0]
    try:
        CurvatureData(circle_grid(), g).validated()
        rejected = False
    except ClosureError:
        rejected = True
    detail = f"max closure defect {worst:.2e}, unclosed data rejected: {rejected}"
    return _result("closure", worst if rejected else math.inf, 1e-10, detail)


SUITES = {
    "blaschke-santalo": suite_blaschke_santalo,
    "minkowski": suite_minkowski,
    "affine-isoperimetric": suite_affine_isoperimetric,
    "holder": suite_holder,
    "identity": suite_identity,
    "monotonicity": suite_monotonicity,
    "classical-chain": suite_classical_chain,
    "closure": suite_closure,
}


def run_suites(seeds: int = 10, only: str | None = None) -> list[SuiteResult]:
    if only is not None and only not in SUITES:
        raise KeyError(f"unknown suite {only!r}; choose from {', '.join(SUITES)}")
    names = [only] if only else list(SUITES)
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            res = SUITES[name](seeds)
        except Exception as err:  # noqa: BLE001 - reported as a failed suite
            res = SuiteResult(name, False, math.inf, math.nan, f"{type(err).__name__}: {err}")
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out

"""Iterating the curvature image operator, with monitored functionals.

Each step records the volume, ``A_p``, ``B_p``, ``Omega_p``, the volume
product, the Hausdorff step, the fixed-point residual and the volume ratio.
For ``p = -n`` the run may renormalize every iterate to minimal surface
area position by a volume-preserving linear map.
"""

from __future__ import annotations

import collections
import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from . import functionals as fn
from . import polytope3d as p3
from .body2d import Body2D
from .curvature_image import (
    OperatorConfig,
    apply,
    check_assumption,
    fixed_point_residual,
    mixed_volume,
    normalize_translation,
)

logger = logging.getLogger(__name__)

__all__ = [
    "TRACE_COLUMNS",
    "TraceRow",
    "IterationTrace",
    "RunConfig",
    "iterate",
    "iterate_classical",
    "minimal_position",
    "anisotropy",
    "isotropy_defect",
    "classify_limit",
    "linear_image",
    "PositionError",
]

TRACE_COLUMNS = [
    "iter", "volume", "A_p", "B_p", "Omega_p", "vol_product", "hausdorff_step",
    "residual", "vol_ratio", "h_min", "h_max", "ms",
]
OSCILLATION_WINDOW = 50


class PositionError(RuntimeError):
    pass


@dataclass
class TraceRow:
    iter: int
    volume: float
    A_p: float
    B_p: float
    Omega_p: float
    vol_product: float
    hausdorff_step: float
    residual: float
    vol_ratio: float
    h_min: float
    h_max: float
    ms: float
    omega_power: float = math.nan
    # relative error of B_p(LK) = n^n (V(K)/V(LK))^(n-1) A_p(K) for this step
    identity_error: float = math.nan
    # V_1(LK, K) - V(K)
    mixed_volume_error: float = math.nan


@dataclass
class RunConfig:
    operator: OperatorConfig
    init: object
    max_iter: int = 2000
    tol_step: float = 1e-8
    tol_residual: float = 1e-6
    minimal_position: bool = False
    record_volume_product: bool = True

    def __post_init__(self):
        if self.tol_step <= 0 or self.tol_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        n = self.init.grid.dim
        if self.minimal_position:
            phi = self.operator.phi
            if self.operator.p != -n or (phi is not None and not phi.is_constant):
                raise ValueError("minimal-position renormalization needs p = -n and phi = 1")


@dataclass
class IterationTrace:
    p: float
    dim: int
    rows: list = field(default_factory=list)
    status: str = "running"
    reason: str = ""
    error: str = ""
    oscillation: float = math.nan
    # set when a full window of final steps still moves by >= 10 tol_step
    oscillation_flag: bool = False
    case: int = 0

    def append(self, row: TraceRow):
        self.rows.append(row)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.rows:
            writer.writerow([r.iter] + [repr(float(getattr(r, c))) for c in TRACE_COLUMNS[1:]])
        return buf.getvalue()

    def monotonicity_violations(self, slack: float = 1e-9) -> dict:
        """Largest violations of the step-to-step monotone laws (0 when none)."""
        V = self.column("volume")
        A = self.column("A_p")
        W = self.column("omega_power")
        out = {
            "volume_increase": float(max(0.0, np.max(np.diff(V), initial=0.0))),
            "A_p_decrease": float(max(0.0, -np.min(np.diff(A), initial=0.0))),
            "omega_power_decrease": float(max(0.0, -np.min(np.diff(W), initial=0.0))),
            "volume_above_initial": float(max(0.0, V.max() - V[0])),
        }
        out["ok"] = all(v <= slack for v in out.values())
        out["volume_infimum"] = float(V.min())
        return out

    def summary(self) -> dict:
        last = self.rows[-1] if self.rows else None
        return {
            "status": self.status,
            "reason": self.reason,
            "error": self.error,
            "dim": self.dim,
            "p": self.p,
            "case": self.case,
            "iterations": self.iterations,
            "final": None if last is None else {
                k: v for k, v in asdict(last).items() if k != "ms"
            },
            "oscillation_last_window": self.oscillation,
            "oscillation_flag": self.oscillation_flag,
        }


def anisotropy(K) -> float:
    """``(max h - min h) / mean h`` about the current origin."""
    h = K.support
    return float((h.max() - h.min()) / h.mean())


def _surface_measure(K):
    """(normals, masses) of the surface area measure on the grid."""
    return K.grid.nodes, K.grid.weights * K.f


def _sym_traceless_basis(n):
    basis = []
    for i in range(n - 1):
        E = np.zeros((n, n))
        E[i, i], E[n - 1, n - 1] = 1.0, -1.0
        basis.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return basis


def isotropy_defect(K) -> float:
    """``|M - tr(M)/n I| / tr(M)`` for ``M = int u u^T dS_K``."""
    u, m = _surface_measure(K)
    M = (u * m[:, None]).T @ u
    n = M.shape[0]
    return float(np.linalg.norm(M - np.trace(M) / n * np.eye(n)) / np.trace(M))


def _position_objective(A, u, m, basis, derivatives=False):
    v = u @ A.T
    r = np.linalg.norm(v, axis=1)
    J = float(m @ r)
    if not derivatives:
        return J
    Ev = np.stack([v @ E for E in basis])          # (k, m, n)
    a = np.einsum("kin,in->ki", Ev, v)              # v^T E v
    grad = a @ (m / r)
    hess = 2 * np.einsum("kin,lin,i->kl", Ev, Ev, m / r) - np.einsum(
        "ki,li,i->kl", a, a, m / r**3
    )
    return J, grad, hess


def minimal_position(K, tol: float = 1e-12, max_iter: int = 100):
    """Volume-preserving linear image of ``K`` with least surface area.

    Minimizes ``S(lK) = int |A u| dS_K(u)`` over ``A = l^(-T)`` in SL(n) by
    Newton steps ``A <- exp(-sum s_k E_k) A`` along symmetric traceless
    generators.  Returns ``(lK, l)``.  In 3D the image is re-circumscribed
    on the normal grid, so its volume matches only to grid resolution.
    """
    n = K.grid.dim
    u, m = _surface_measure(K)
    basis = _sym_traceless_basis(n)
    A = np.eye(n)
    J, g, H = _position_objective(A, u, m, basis, True)
    for _ in range(max_iter):
        if np.linalg.norm(g) <= tol * J:
            break
        s = np.linalg.solve(H, -g)
        t = 1.0
        while True:
            At = expm(sum(t * sk * E for sk, E in zip(s, basis))) @ A
            Jt = _position_objective(At, u, m, basis)
            if Jt <= J + 1e-4 * t * (g @ s) or t < 1e-10:
                break
            t *= 0.5
        A = At
        J, g, H = _position_objective(A, u, m, basis, True)
    else:
        raise PositionError("minimal position search did not converge")
    ell = np.linalg.inv(A).T
    return linear_image(K, ell), ell


def linear_image(K, ell):
    """``ell K`` re-expressed on the grid of ``K``: ``h(v) = h_K(ell^T v)``."""
    v = K.grid.nodes @ ell  # rows are ell^T v_i
    if isinstance(K, Body2D):
        return Body2D.from_samples(K.support_at(v), K.grid, K.degree)
    return p3.reconstruct(p3.support_eval(K, v), K.grid)


def _measure(K, phi, p, dt_ms, prev, record_vp, trace_index):
    V = K.volume
    try:
        vp = fn.volume_product(K) if record_vp else math.nan
    except Exception:  # noqa: BLE001 - diagnostics only
        vp = math.nan
    h = K.support
    return TraceRow(
        iter=trace_index,
        volume=V,
        A_p=fn.A_p(K, phi, p),
        B_p=fn.B_p(K, phi, p),
        Omega_p=fn.Omega_p(K, phi, p),
        vol_product=vp,
        hausdorff_step=math.nan if prev is None else float(np.abs(h - prev.support).max()),
        residual=fixed_point_residual(K, phi, p),
        vol_ratio=math.nan if prev is None else V / prev.volume,
        h_min=float(h.min()),
        h_max=float(h.max()),
        ms=dt_ms,
        omega_power=fn.omega_power(K, phi, p),
    )


def iterate(config: RunConfig, callback=None):
    """Run ``K_{i+1} = Lambda K_i`` until the residual or the step is small.

    Returns ``(final body, trace)``.  Operator failures end the run with
    status ``"error"`` and the partial trace.  ``callback(i, K)`` is called
    with every recorded body, starting with the normalized initial one.
    """
    op = config.operator
    p, phi = op.p, op.phi
    n = config.init.grid.dim
    op.check(n)
    trace = IterationTrace(p=p, dim=n)
    window = collections.deque(maxlen=OSCILLATION_WINDOW)

    t0 = time.perf_counter()
    try:
        K = normalize_translation(config.init, phi, p, op.normalize_tol)
        try:
            trace.case = check_assumption(K, phi, p, op.closure_tol)
        except Exception:
            if not op.unsafe:
                raise
    except Exception as err:  # noqa: BLE001
        trace.status, trace.error = "error", f"{type(err).__name__}: {err}"
        return config.init, trace
    trace.append(_measure(K, phi, p, 1e3 * (time.perf_counter() - t0), None,
                          config.record_volume_product, 0))
    window.append(np.array(K.support))
    if callback is not None:
        callback(0, K)

    for i in range(1, config.max_iter + 1):
        t0 = time.perf_counter()
        try:
            L = apply(K, op)
            identity = _identity_error(K, L, phi, p)
            v1_err = mixed_volume(L, K) - K.volume
            if config.minimal_position:
                L, _ = minimal_position(L)
                L = normalize_translation(L, phi, p, op.normalize_tol)
            row = _measure(L, phi, p, 0.0, K, config.record_volume_product, i)
        except Exception as err:  # noqa: BLE001
            trace.status, trace.error = "error", f"{type(err).__name__}: {err}"
            logger.error("iteration %d failed: %s", i, trace.error)
            break
        row.identity_error = identity
        row.mixed_volume_error = v1_err
        row.ms = 1e3 * (time.perf_counter() - t0)
        trace.append(row)
        window.append(np.array(L.support))
        K = L
        if callback is not None:
            callback(i, K)
        if row.residual < config.tol_residual:
            trace.status, trace.reason = "converged", "residual"
            break
        if row.hausdorff_step < config.tol_step:
            trace.status, trace.reason = "converged", "step"
            break
    else:
        trace.status, trace.reason = "max_iter", f"no convergence in {config.max_iter} steps"

    if len(window) > 1:
        stack = np.array(window)
        trace.oscillation = float((stack.max(axis=0) - stack.min(axis=0)).max())
        trace.oscillation_flag = bool(len(window) == OSCILLATION_WINDOW
                                      and trace.oscillation >= 10 * config.tol_step)
    return K, trace


def _identity_error(K, L, phi, p):
    n = K.grid.dim
    lhs = fn.B_p(L, phi, p)
    rhs = n**n * (K.volume / L.volume) ** (n - 1) * fn.A_p(K, phi, p)
    return abs(lhs / rhs - 1.0)


def iterate_classical(config: RunConfig, callback=None):
    """The ``p = -n``, ``phi = 1`` iteration with minimal-position renormalization."""
    n = config.init.grid.dim
    if config.operator.p != -n:
        raise ValueError(f"classical iteration needs p = -{n}")
    if not config.minimal_position:
        config = RunConfig(config.operator, config.init, config.max_iter, config.tol_step,
                           config.tol_residual, True, config.record_volume_product)
    return iterate(config, callback)


def classify_limit(K, tol: float = 1e-4) -> dict:
    """Ball / ellipse / other, with the measured anisotropies."""
    aniso = anisotropy(K)
    try:
        positioned, _ = minimal_position(K)
        aniso_pos = anisotropy(positioned)
    except Exception:  # noqa: BLE001
        aniso_pos = math.nan
    if aniso < tol:
        shape = "ball"
    elif aniso_pos < tol:
        shape = "ellipse"
    else:
        shape = "other"
    return {"shape": shape, "anisotropy": aniso, "anisotropy_minimal_position": aniso_pos}

"""Affine-type functionals of convex bodies weighted by a density phi.

Works on either body type through the shared surface ``grid``,
``support`` (h at the nodes), ``f`` (curvature function at the nodes),
``volume``, ``translate``, ``santalo_point`` and ``polar_volume``.

For ``p != 0``::

    A_p(K)   = V(K) (int h^p / phi)^(-n/p)
    B_p(K)   = V(K)^(1-n) (int phi^(1/(p-1)) f^(p/(p-1)))^(n(p-1)/p)
    Omega_p  = int phi^(1/(p-1)) f^(p/(p-1))

and the ``p = 0`` members are the logarithmic (geometric mean) versions
taken against the probability measure ``(1/phi) d sigma / int (1/phi)``.
Powers go through log space so exponents near ``p = 1`` do not overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .quadrature import Density, integrate

__all__ = [
    "ZERO_P",
    "DensityLike",
    "unit_ball_volume",
    "A_p",
    "B_p",
    "Omega_p",
    "log_A_p",
    "log_B_p",
    "log_Omega_p",
    "omega_power",
    "affine_surface_area",
    "volume_product",
    "holder_gap",
    "affine_isoperimetric_gap",
    "blaschke_santalo_gap",
    "minkowski_gap",
    "b0_santalo_bound",
]

ZERO_P = 1e-9
ONE_P = 1e-9

DensityLike = Density | float | None


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def phi_samples(phi: DensityLike, grid) -> np.ndarray:
    if phi is None:
        return np.ones(grid.size)
    if isinstance(phi, Density):
        if not phi.grid.same_as(grid):
            raise ValueError("density sampled on a different grid")
        return np.asarray(phi.samples)
    return np.full(grid.size, float(phi))


def _check_p(p, n, allow_one=False):
    if not np.isfinite(p) or p < -n - 1e-12:
        raise ValueError(f"p = {p} outside [-{n}, inf)")
    if not allow_one and abs(p - 1) < ONE_P:
        raise ValueError("p = 1 is excluded")


def _log_integral(log_integrand, grid) -> float:
    """``log int exp(log_integrand) d sigma`` without overflow."""
    return float(logsumexp(log_integrand, b=grid.weights))


def _theta_mean(values, phi, grid) -> float:
    """Mean of ``values`` against ``(1/phi) d sigma`` normalized to mass one."""
    inv = 1.0 / phi
    return integrate(values * inv, grid) / integrate(inv, grid)


def log_A_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    """``log A_p``; finite even where ``A_p`` itself over- or underflows."""
    grid, n = K.grid, K.grid.dim
    _check_p(p, n, allow_one=True)
    h = K.support
    if h.min() <= 0:
        raise ValueError("A_p needs the origin in the interior (h > 0)")
    ph = phi_samples(phi, grid)
    logh = np.log(h)
    if abs(p) < ZERO_P:
        return math.log(K.volume) - n * _theta_mean(logh, ph, grid)
    return math.log(K.volume) - (n / p) * _log_integral(p * logh - np.log(ph), grid)


def _check_curvature(K):
    f = K.f
    if f.min() <= 0:
        raise ValueError("functional needs a positive curvature function")
    return f


def _log_omega(K, ph, p):
    """``log Omega_p`` for ``p != 0``."""
    f = _check_curvature(K)
    e = np.log(ph) / (p - 1) + (p / (p - 1)) * np.log(f)
    return _log_integral(e, K.grid)


def log_B_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    grid, n = K.grid, K.grid.dim
    _check_p(p, n)
    ph = phi_samples(phi, grid)
    logv = math.log(K.volume)
    if abs(p) < ZERO_P:
        f = _check_curvature(K)
        mean_log = _theta_mean(np.log(ph * f), ph, grid)
        log_inv = math.log(integrate(1.0 / ph, grid))
        return (1 - n) * logv + n * mean_log + n * log_inv
    return (1 - n) * logv + n * (p - 1) / p * _log_omega(K, ph, p)


def log_Omega_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    grid, n = K.grid, K.grid.dim
    _check_p(p, n)
    ph = phi_samples(phi, grid)
    if abs(p) < ZERO_P:
        f = _check_curvature(K)
        return n * _theta_mean(np.log(f), ph, grid)
    return _log_omega(K, ph, p)


def A_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    return math.exp(log_A_p(K, phi, p))


def B_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    return math.exp(log_B_p(K, phi, p))


def Omega_p(K, phi: DensityLike = None, p: float = 0.0) -> float:
    return math.exp(log_Omega_p(K, phi, p))


def omega_power(K, phi: DensityLike = None, p: float = 0.0) -> float:
    """The monotone quantity ``Omega_p^(n(p-1)/(p(n-1)))`` (``Omega_0`` at p=0)."""
    n = K.grid.dim
    if abs(p) < ZERO_P:
        return Omega_p(K, phi, 0.0)
    return math.exp(n * (p - 1) / (p * (n - 1)) * log_Omega_p(K, phi, p))


def affine_surface_area(K) -> float:
    """``int f^(n/(n+1)) d sigma``."""
    return Omega_p(K, None, -K.grid.dim)


def volume_product(K) -> float:
    """``V(K) V((K - s)^*)`` at the Santalo point ``s``."""
    s = K.santalo_point()
    return K.volume * K.translate(s).polar_volume()


# inequality gaps: each is >= 0 (up to roundoff) when the inequality holds


def holder_gap(L, phi: DensityLike, p: float, x=None) -> float:
    """Relative gap in ``B_p(L) <= n^n A_p(L - x)`` (reversed for ``p > 1``)."""
    n = L.grid.dim
    shifted = L if x is None else L.translate(x)
    lhs = B_p(L, phi, p)
    rhs = n**n * A_p(shifted, phi, p)
    gap = (rhs - lhs) / rhs
    return gap if p < 1 else -gap


def affine_isoperimetric_gap(K) -> float:
    """Relative gap in ``Omega^(n+1) <= n^(n+1) V(B)^2 V^(n-1)``."""
    n = K.grid.dim
    rhs = n ** (n + 1) * unit_ball_volume(n) ** 2 * K.volume ** (n - 1)
    return (rhs - affine_surface_area(K) ** (n + 1)) / rhs


def blaschke_santalo_gap(K) -> float:
    """Relative gap in ``V(K) V(K^s) <= V(B)^2``."""
    vb2 = unit_ball_volume(K.grid.dim) ** 2
    return (vb2 - volume_product(K)) / vb2


def minkowski_gap(K, L) -> float:
    """Relative gap in ``V_1(K, L)^n >= V(K)^(n-1) V(L)``."""
    n = K.grid.dim
    v1 = integrate(L.support * K.f, K.grid) / n
    rhs = K.volume ** (n - 1) * L.volume
    return (v1**n - rhs) / rhs


def b0_santalo_bound(L, phi: DensityLike = None) -> tuple[float, float]:
    """``(B_0(L), n^n V(L) int 1/(phi h_{L-s}^n) / int 1/phi)`` with ``s`` the Santalo point.

    The bound is Jensen's inequality applied to ``A_0(L - s)``; by the
    Blaschke-Santalo inequality it is in turn bounded in terms of phi alone.
    """
    grid, n = L.grid, L.grid.dim
    ph = phi_samples(phi, grid)
    Ls = L.translate(L.santalo_point())
    bound = n**n * L.volume * integrate(Ls.support ** -float(n) / ph, grid) / integrate(1.0 / ph, grid)
    return B_p(L, phi, 0.0), bound

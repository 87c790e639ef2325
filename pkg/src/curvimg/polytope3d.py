"""Convex polytopes in R^3 given by support numbers on a fixed normal grid.

A :class:`Polytope3D` is ``P = {x : <x, u_i> <= h_i}`` for the nodes ``u_i``
of an S^2 grid.  Its geometry is recovered from the convex hull of the dual
points ``u_i / h_i``: hull vertices are the active halfspaces (facets of
``P``) and hull facets are the vertices of ``P``.  The surface area measure
is the facet-area vector ``A``, so the discrete curvature function is
``A_i / w_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .quadrature import DimensionError, SphereGrid, icosphere_grid

__all__ = [
    "ReconstructionError",
    "NotOriginInteriorError",
    "SantaloError",
    "Polytope3D",
    "reconstruct",
    "support_eval",
    "mixed_volume_1",
    "polar_volume",
    "santalo_point",
    "translate",
    "hausdorff",
    "from_support_function",
    "random_polytope",
]


class ReconstructionError(ValueError):
    """The halfspace system is unbounded or has empty interior."""


class NotOriginInteriorError(ValueError):
    pass


class SantaloError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class _Combinatorics:
    # P vertices, one per dual hull triangle (degenerate vertices repeat)
    vertices: np.ndarray
    # dual triangles, indices into the grid
    triangles: np.ndarray
    # unique dual edges (i, j) with the length of the matching edge of P
    edges: np.ndarray
    edge_lengths: np.ndarray


@dataclass(frozen=True, eq=False)
class Polytope3D:
    grid: SphereGrid
    h: np.ndarray
    vertices: np.ndarray = field(repr=False)
    areas: np.ndarray = field(repr=False)
    volume: float
    support: np.ndarray = field(repr=False)
    _comb: _Combinatorics = field(repr=False)

    @property
    def active(self) -> np.ndarray:
        return self.areas > 0

    @property
    def curvature(self) -> np.ndarray:
        """Discrete curvature function ``A_i / w_i``."""
        return self.areas / self.grid.weights

    f = curvature

    @property
    def dim(self) -> int:
        return 3

    @property
    def is_symmetric(self) -> bool:
        s = self.support
        return bool(np.allclose(s, s[self.grid.antipode], rtol=0, atol=1e-12 * np.abs(s).max()))

    @property
    def origin_interior(self) -> bool:
        return bool(self.support.min() > 0)

    @property
    def edges(self):
        return self._comb.edges, self._comb.edge_lengths

    @property
    def closure_defect(self) -> float:
        return float(np.linalg.norm(self.areas @ self.grid.nodes))

    def area_hessian(self):
        """Exact Jacobian ``dA_i/dh_j`` (the Hessian of the volume)."""
        return area_hessian(self)

    def scaled(self, lam: float) -> "Polytope3D":
        if lam <= 0:
            raise ValueError("scale factor must be positive")
        c = self._comb
        comb = _Combinatorics(c.vertices * lam, c.triangles, c.edges,
                              c.edge_lengths * lam)
        return Polytope3D(self.grid, self.h * lam, comb.vertices,
                          self.areas * lam**2, self.volume * lam**3,
                          self.support * lam, comb)

    def translate(self, x) -> "Polytope3D":
        return translate(self, x)

    def polar_volume(self) -> float:
        return polar_volume(self)

    def santalo_point(self) -> np.ndarray:
        return santalo_point(self)

    def to_off(self) -> str:
        """Triangulated boundary in OFF format."""
        hull = ConvexHull(self._unique_vertices())
        pts, tri = hull.points, hull.simplices
        lines = ["OFF", f"{len(pts)} {len(tri)} 0"]
        lines += [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in pts]
        lines += [f"3 {a} {b} {c}" for a, b, c in tri]
        return "\n".join(lines) + "\n"

    def _unique_vertices(self, tol=1e-12):
        v = self.vertices
        key = np.round(v / (tol * max(1.0, np.abs(v).max())))
        _, idx = np.unique(key, axis=0, return_index=True)
        return v[np.sort(idx)]


def _interior_point(u, h):
    """Chebyshev-style center: maximize t with <x,u_i> + t <= h_i."""
    res = linprog(
        c=[0, 0, 0, -1.0],
        A_ub=np.column_stack([u, np.ones(len(u))]),
        b_ub=h,
        bounds=[(None, None)] * 3 + [(None, 1.0 + np.abs(h).max())],
        method="highs",
    )
    if res.status == 3:
        raise ReconstructionError("halfspace system is unbounded")
    if res.status != 0 or res.x[3] <= 1e-12 * max(1.0, np.abs(h).max()):
        raise ReconstructionError("halfspace intersection has empty interior")
    return res.x[:3]


def reconstruct(h, grid: SphereGrid) -> Polytope3D:
    """Build the polytope ``{x : <x,u_i> <= h_i}``.

    Inactive halfspaces get zero facet area.
    """
    if grid.dim != 3:
        raise DimensionError("Polytope3D needs an S^2 grid")
    h = np.array(grid.check_samples(h), dtype=float)
    if not np.all(np.isfinite(h)):
        raise ReconstructionError("support numbers must be finite")
    u = grid.nodes
    scale = np.abs(h).max()
    shift = np.zeros(3)
    hs = h
    if h.min() <= 1e-9 * scale:
        shift = _interior_point(u, h)
        hs = h - u @ shift

    try:
        hull = ConvexHull(u / hs[:, None])
    except QhullError as err:
        raise ReconstructionError(f"dual hull failed: {err}") from err

    tri = hull.simplices
    eq = hull.equations
    verts = -eq[:, :3] / eq[:, 3:4]

    # dual edges: edge opposite local vertex k of triangle t is shared with
    # neighbors[t, k]; keep each unordered pair once
    nb = hull.neighbors
    t_idx = np.repeat(np.arange(len(tri)), 3)
    k_idx = np.tile(np.arange(3), len(tri))
    other = nb[t_idx, k_idx]
    keep = t_idx < other
    t_idx, k_idx, other = t_idx[keep], k_idx[keep], other[keep]
    ei = tri[t_idx, (k_idx + 1) % 3]
    ej = tri[t_idx, (k_idx + 2) % 3]
    lengths = np.linalg.norm(verts[t_idx] - verts[other], axis=1)

    # facet area from signed in-plane distances of each edge to the foot
    # point h_i u_i: A_i = 1/2 sum_j d_ij l_ij
    cos = np.einsum("ij,ij->i", u[ei], u[ej])
    sin = np.sqrt(np.maximum(1.0 - cos**2, 0.0))
    d_ij = (hs[ej] - hs[ei] * cos) / sin
    d_ji = (hs[ei] - hs[ej] * cos) / sin
    areas = np.zeros(grid.size)
    np.add.at(areas, ei, 0.5 * d_ij * lengths)
    np.add.at(areas, ej, 0.5 * d_ji * lengths)
    areas = np.maximum(areas, 0.0)

    verts = verts + shift
    support = (u @ verts.T).max(axis=1)
    volume = float(areas @ support) / 3.0
    comb = _Combinatorics(verts, tri, np.column_stack([ei, ej]), lengths)
    return Polytope3D(grid, h, verts, areas, volume, support, comb)


def area_hessian(P: Polytope3D) -> np.ndarray:
    """Dense ``dA/dh``: off-diagonal ``l_ij / sin(theta_ij)`` on edges and
    diagonal ``-sum_j l_ij cos(theta_ij) / sin(theta_ij)``."""
    u = P.grid.nodes
    (ei, ej), lengths = P._comb.edges.T, P._comb.edge_lengths
    cos = np.einsum("ij,ij->i", u[ei], u[ej])
    sin = np.sqrt(np.maximum(1.0 - cos**2, 0.0))
    off = lengths / sin
    H = np.zeros((P.grid.size, P.grid.size))
    np.add.at(H, (ei, ej), off)
    np.add.at(H, (ej, ei), off)
    np.add.at(H, (ei, ei), -off * cos)
    np.add.at(H, (ej, ej), -off * cos)
    return H


def support_eval(P: Polytope3D, v) -> float | np.ndarray:
    """``h_P(v) = max_x <x, v>`` over the vertices."""
    v = np.asarray(v, dtype=float)
    vals = v.reshape(-1, 3) @ P.vertices.T
    out = vals.max(axis=1)
    return float(out[0]) if v.ndim == 1 else out


def _check_same_grid(P, Q):
    if not P.grid.same_as(Q.grid):
        raise DimensionError("polytopes live on different normal grids")


def mixed_volume_1(K: Polytope3D, L: Polytope3D) -> float:
    """``V_1(K, L) = (1/3) sum_i h_L(u_i) A_i(K)``."""
    _check_same_grid(K, L)
    return float(K.areas @ L.support) / 3.0


def _dual_simplices(P: Polytope3D):
    """Triangles of the polar boundary with their unsigned normal determinants."""
    tri = P._comb.triangles
    u = P.grid.nodes
    c = np.abs(np.einsum("ij,ij->i", u[tri[:, 0]], np.cross(u[tri[:, 1]], u[tri[:, 2]])))
    return tri, c


def _polar_volume_at(P: Polytope3D, x, derivatives=False):
    """Volume of ``(P - x)^*`` with fixed polar combinatorics.

    Each polar boundary triangle (i, j, k) spans a tetrahedron with the
    origin of volume ``|det(u_i,u_j,u_k)| / (6 s_i s_j s_k)`` where
    ``s = h - <x, u>``.
    """
    tri, c = _dual_simplices(P)
    u = P.grid.nodes
    s = P.support - u @ np.asarray(x, dtype=float)
    st = s[tri]
    if np.any(st <= 0):
        return (math.inf, None, None) if derivatives else math.inf
    term = c / (6.0 * st.prod(axis=1))
    V = float(term.sum())
    if not derivatives:
        return V
    r = u[tri] / st[:, :, None]  # (T, 3, 3): u_a / s_a
    q = r.sum(axis=1)
    grad = (term[:, None] * q).sum(axis=0)
    hess = np.einsum("t,ti,tj->ij", term, q, q) + np.einsum("t,tai,taj->ij", term, r, r)
    return V, grad, hess


def polar_volume(P: Polytope3D) -> float:
    """Volume of ``P^* = conv{u_i / h_i}``; needs the origin in the interior."""
    if P.support.min() <= 0 or P.h[P.active].min() <= 0:
        raise NotOriginInteriorError("origin is not interior to the polytope")
    pts = P.grid.nodes[P.active] / P.support[P.active, None]
    return float(ConvexHull(pts).volume)


def santalo_point(P: Polytope3D, tol: float = 1e-8, max_evals: int = 200) -> np.ndarray:
    """Minimizer of ``x -> V((P - x)^*)`` over the interior of ``P``.

    Damped Newton on the exact rational expression of the polar volume.
    """
    x = P._unique_vertices().mean(axis=0)
    V, g, H = _polar_volume_at(P, x, derivatives=True)
    evals = 1
    while evals < max_evals:
        if np.linalg.norm(g) < tol * max(1.0, V):
            return x
        step = np.linalg.solve(H, -g)
        t = 1.0
        while evals < max_evals:
            trial = x + t * step
            Vt = _polar_volume_at(P, trial)
            evals += 1
            if Vt <= V + 1e-4 * t * (g @ step):
                break
            t *= 0.5
        x = trial
        V, g, H = _polar_volume_at(P, x, derivatives=True)
        evals += 1
    raise SantaloError(f"Santalo point search did not converge in {max_evals} evaluations")


def translate(P: Polytope3D, x) -> Polytope3D:
    """``P - x``: support numbers ``h_i - <x, u_i>``; facet areas unchanged."""
    x = np.asarray(x, dtype=float)
    du = P.grid.nodes @ x
    c = P._comb
    comb = _Combinatorics(c.vertices - x, c.triangles, c.edges, c.edge_lengths)
    return Polytope3D(P.grid, P.h - du, comb.vertices, P.areas, P.volume,
                      P.support - du, comb)


def hausdorff(P: Polytope3D, Q: Polytope3D) -> float:
    """Sup distance of support values over the grid nodes."""
    _check_same_grid(P, Q)
    return float(np.abs(P.support - Q.support).max())


def from_support_function(func, grid: SphereGrid | None = None) -> Polytope3D:
    """Circumscribed polytope with support numbers ``func(u_i)``."""
    grid = grid or icosphere_grid(3)
    return reconstruct(np.asarray(func(grid.nodes), dtype=float), grid)


def ball(r: float = 1.0, grid: SphereGrid | None = None) -> Polytope3D:
    grid = grid or icosphere_grid(3)
    return reconstruct(np.full(grid.size, float(r)), grid)


def ellipsoid(a, b, c, grid: SphereGrid | None = None) -> Polytope3D:
    axes = np.array([a, b, c], dtype=float)
    return from_support_function(lambda u: np.linalg.norm(u * axes, axis=1), grid)


def cube_support(grid: SphereGrid, half: float = 1.0) -> np.ndarray:
    """Support numbers of the cube ``[-half, half]^3`` at every node."""
    return half * np.abs(grid.nodes).sum(axis=1)


def random_polytope(seed: int, degree: int = 4, amplitude: float = 0.3,
                    even: bool = False, grid: SphereGrid | None = None) -> Polytope3D:
    """Circumscribed polytope of a random smooth convex body.

    Support numbers are ``1 + s * q(u_i)`` with ``q`` a random polynomial
    in the coordinates of total degree 2..degree (odd degrees dropped when
    ``even``), centered and scaled so that ``|s * q| <= amplitude / 4``.
    Small amplitudes keep every halfspace active.
    """
    grid = grid or icosphere_grid(3)
    rng = np.random.default_rng(seed)
    u = grid.nodes
    q = np.zeros(grid.size)
    for d in range(2, degree + 1):
        if even and d % 2:
            continue
        for i in range(d + 1):
            for j in range(d + 1 - i):
                k = d - i - j
                q += rng.standard_normal() * d**-3.0 * u[:, 0]**i * u[:, 1]**j * u[:, 2]**k
    q -= q.mean()
    span = np.abs(q).max()
    s = 0.0 if span == 0 else amplitude * min(1.0, 0.25 / span)
    return reconstruct(1.0 + s * q, grid)

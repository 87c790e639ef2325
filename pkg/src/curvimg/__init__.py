"""Curvature image operators on planar and spatial convex bodies.

Bodies are stored through their support function on a fixed quadrature
grid of unit normals: a Fourier series in the plane, support numbers of a
circumscribed polytope in space.
"""

from .body2d import Body2D, disk, ellipse, random_body
from .curvature_image import OperatorConfig, apply, check_assumption, fixed_point_residual
from .functionals import A_p, B_p, Omega_p, volume_product
from .iteration import RunConfig, iterate, iterate_classical, minimal_position
from .minkowski import CurvatureData, solve_2d, solve_3d
from .polytope3d import Polytope3D, reconstruct
from .quadrature import Density, circle_grid, icosphere_grid, make_grid

__version__ = "0.1.0"

__all__ = [
    "A_p", "B_p", "Omega_p", "Body2D", "CurvatureData", "Density", "OperatorConfig",
    "Polytope3D", "RunConfig", "apply", "check_assumption", "circle_grid", "disk",
    "ellipse", "fixed_point_residual", "icosphere_grid", "iterate", "iterate_classical",
    "make_grid", "minimal_position", "random_body", "reconstruct", "solve_2d", "solve_3d",
    "volume_product",
]

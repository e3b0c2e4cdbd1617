"""Anisotropic fractional perimeters and Sobolev capacities on grids.

Convex bodies and their gauges, cell-union sets and step functions, exact
pair weights for the kernel ``||x - y||_K^{-(n+alpha)}``, fractional
perimeters and seminorms, capacities by minimum cut, and verification
suites for the associated inequalities.
"""
from . import _backend
from .capacity import (CapacityError, CapacityProblem, CapacityResult, capacity, capacity_first_order,
                       capacity_mincut, capacity_oracle, capacity_solve, isocapacitary_check,
                       monotonicity_check, subadditivity_check, usc_check)
from .config import ConfigError, RunConfig
from .geometry import (ConvexBody, GeometryError, MomentBody, Polygon, anisotropic_perimeter, body_volume,
                       load_body, minkowski_gauge, polar_body, regular_polygon, stock_body, support_function)
from .grid import (Grid, GridError, GridFunction, GridMeasure, GridSet, ball, box, indicator, level_set,
                   load_function, load_set, polygon_set, save, set_dilate, set_volume, tent)
from .kernel import KernelError, KernelModel, pair_weight, tail_integral
from .perimeter import (PerimeterError, PerimeterResult, coarea_check, cyclic_inequality_check, frac_perimeter,
                        isoperimetric_check, limit_alpha0, limit_alpha1, seminorm)
from .report import ReportError, emit_report

__version__ = "0.1.0"
BACKEND = _backend.NAME

__all__ = [
    "BACKEND", "CapacityError", "CapacityProblem", "CapacityResult", "ConfigError", "ConvexBody",
    "GeometryError", "Grid", "GridError", "GridFunction", "GridMeasure", "GridSet", "KernelError",
    "KernelModel", "MomentBody", "PerimeterError", "PerimeterResult", "Polygon", "ReportError", "RunConfig",
    "anisotropic_perimeter", "ball", "body_volume", "box", "capacity", "capacity_first_order",
    "capacity_mincut", "capacity_oracle", "capacity_solve", "coarea_check", "cyclic_inequality_check",
    "emit_report", "frac_perimeter", "indicator", "isocapacitary_check", "isoperimetric_check",
    "level_set", "limit_alpha0", "limit_alpha1", "load_body", "load_function", "load_set",
    "minkowski_gauge", "monotonicity_check", "pair_weight", "polar_body", "polygon_set", "regular_polygon",
    "save", "seminorm", "set_dilate", "set_volume", "stock_body", "subadditivity_check", "support_function",
    "tail_integral", "tent", "usc_check",
]

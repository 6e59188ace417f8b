"""Hybrid polynomial zonotopes: set operations, sampling and reachability."""

from hpz.core import (
    FactorAssignment,
    HybridPolynomialZonotope,
    compact,
    constraint_residual,
    empty_set,
    evaluate,
    from_box,
    from_constrained_zonotope,
    from_cpz,
    from_hybrid_zonotope,
    from_zonotope,
    is_feasible,
    singleton,
    validate,
)
from hpz.errors import HPZError
from hpz.feasibility import approx_member, functional_bounds, is_provably_empty
from hpz.nonlinear import QuadraticAffineMap, nonlinear_step
from hpz.ops import (
    Halfspace,
    cartesian_product,
    generalized_intersection,
    halfspace_intersection,
    linear_map,
    minkowski_sum,
    union,
    union_all,
)
from hpz.reach import Mode, Polyhedron, PwnaModel, check_containment, reach
from hpz.sampling import PointCloud, sample

__all__ = [
    "FactorAssignment", "HybridPolynomialZonotope", "compact", "constraint_residual", "empty_set", "evaluate",
    "from_box", "from_constrained_zonotope", "from_cpz", "from_hybrid_zonotope", "from_zonotope", "is_feasible",
    "singleton", "validate", "HPZError", "approx_member", "functional_bounds", "is_provably_empty",
    "QuadraticAffineMap", "nonlinear_step", "Halfspace", "cartesian_product", "generalized_intersection",
    "halfspace_intersection", "linear_map", "minkowski_sum", "union", "union_all", "Mode", "Polyhedron",
    "PwnaModel", "check_containment", "reach", "PointCloud", "sample",
]

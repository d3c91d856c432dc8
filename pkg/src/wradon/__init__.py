"""Weighted Radon and ray transforms in R^d, the ray-decomposition formula
relating them, and the lift of a planar null pair to a d-dimensional one."""

from .geometry import (
    DegenerateDirection,
    Frame,
    Hyperplane,
    IntersectionKind,
    Ray,
    alpha_3d_legacy,
    alpha_hodge,
    alpha_of_theta,
    classify_intersection,
    frame_on_hyperplane,
    is_degenerate,
)
from .fields import (
    GridField2D,
    ScalarField,
    bump_psi,
    default_f0,
    gaussian_oracle,
    lift_field,
)
from .quadrature import (
    FiberRule,
    HyperplaneRule,
    LineRule,
    gauss_legendre_rule,
    integrate_along_ray,
    integrate_over_hyperplane,
)
from .transforms import (
    RadonWeight,
    RayWeight,
    radon2d_from_ray,
    radon_direct,
    radon_via_rays,
    ray_transform,
    weight_from_ray_weight,
)
from .nullpair import (
    DegenerateF0,
    LiftedPair,
    LineFamily2D,
    NullPair2D,
    WeightBoundViolation,
    build_null_pair_2d,
    eval_w0,
    lift_to_dimension,
    verify_lifted_pair,
    verify_null_pair_2d,
)
from .report import ResidualReport

__version__ = "0.1.0"

"""Certify or refute ball-regularity of a shape from sampled boundary data.

A set is regular at radius ``r`` when every boundary point is touched by an
empty ball of radius ``r`` from both sides.  This package tests a sampled
boundary against a candidate radius by combining a Lipschitz certificate for
the outward normal field, a search for sample pairs that are close in space
but far along the boundary, and a pairwise empty-ball oracle, and it brackets
the largest certifiable radius by bisection.  The supporting constructions
(nearest-point projection, signed height, in-boundary geodesics with turn
certificates, chord-doubling midpoints) are exposed as ordinary functions.
"""

__version__ = "0.1.0"

from .boundary import Boundary
from .certify import (
    ConditionOneReport,
    ConditionTwoReport,
    OracleReport,
    RadiusEstimate,
    RegularityReport,
    ball_oracle,
    certify,
    check_condition1,
    check_condition2,
    estimate_max_r,
)
from .errors import (
    AllRefutedError,
    AmbiguousProjectionError,
    FileFormatError,
    InconsistentShapeError,
    MidpointSearchError,
    NoContourError,
    OffSurfaceError,
    RegulusError,
    SingularGradientError,
    TubeExitError,
)
from .estimators import ReachEstimator, RegularityCertifier
from .fileio import load, load_csv, load_obj, load_off, save, save_csv
from .geodesics import (
    ArcBoundReport,
    GeodesicPath,
    PairDistance,
    TurnRateCertificate,
    arc_bound_check,
    build_graph,
    chord_double,
    default_step_cap,
    distance_matrix,
    distances_from,
    geodesic,
    intrinsic_distance,
    turn_rate_certificate,
)
from .geometry import (
    CurveClearanceReport,
    HypothesisCheck,
    SampledCurve,
    SixBallConfig,
    SixBallReport,
    arc_length_from_chord,
    bounded_turn_curve,
    chord_sagitta,
    curve_clearance_check,
    half_arc_chord,
    inscribed_polygon_length,
    projection_stretch,
    six_ball_check,
)
from .normal_field import (
    DefectReport,
    DefectScale,
    EqualNormReport,
    FieldSlopeReport,
    equal_norm_field_checks,
    estimate_lipschitz,
    normality_defect,
    normals_from_implicit,
)
from .projection import (
    DifferentialReport,
    ProjectionResult,
    QuadraticBoundReport,
    StretchProbeReport,
    TangentBallReport,
    differential_check,
    height,
    local_tangent_ball_test,
    project,
    project_many,
    projection_lipschitz_probe,
    quadratic_bound_check,
    signed_height_field,
    tube_membership,
)
from .shapes import (
    ShapeInfo,
    ShapeSpec,
    annulus,
    available_shapes,
    circle,
    dumbbell,
    dumbbell_field,
    ellipse,
    extract_level_set,
    figure_eight,
    generate,
    rounded_rectangle,
)
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "__version__",
    "Boundary",
    "Tolerances",
    "DEFAULT_TOL",
    # errors
    "RegulusError",
    "OffSurfaceError",
    "SingularGradientError",
    "AmbiguousProjectionError",
    "TubeExitError",
    "MidpointSearchError",
    "NoContourError",
    "InconsistentShapeError",
    "AllRefutedError",
    "FileFormatError",
    # closed-form geometry and curve checks
    "chord_sagitta",
    "half_arc_chord",
    "arc_length_from_chord",
    "inscribed_polygon_length",
    "projection_stretch",
    "six_ball_check",
    "SixBallConfig",
    "SixBallReport",
    "HypothesisCheck",
    "curve_clearance_check",
    "CurveClearanceReport",
    "bounded_turn_curve",
    "SampledCurve",
    # normal field
    "normals_from_implicit",
    "estimate_lipschitz",
    "FieldSlopeReport",
    "normality_defect",
    "DefectReport",
    "DefectScale",
    "equal_norm_field_checks",
    "EqualNormReport",
    # projection and heights
    "tube_membership",
    "project",
    "project_many",
    "ProjectionResult",
    "height",
    "signed_height_field",
    "differential_check",
    "DifferentialReport",
    "quadratic_bound_check",
    "QuadraticBoundReport",
    "local_tangent_ball_test",
    "TangentBallReport",
    "projection_lipschitz_probe",
    "StretchProbeReport",
    # intrinsic distances
    "build_graph",
    "distance_matrix",
    "distances_from",
    "default_step_cap",
    "intrinsic_distance",
    "PairDistance",
    "geodesic",
    "GeodesicPath",
    "turn_rate_certificate",
    "TurnRateCertificate",
    "chord_double",
    "arc_bound_check",
    "ArcBoundReport",
    # certification
    "certify",
    "check_condition1",
    "check_condition2",
    "ball_oracle",
    "estimate_max_r",
    "RegularityReport",
    "RadiusEstimate",
    "ConditionOneReport",
    "ConditionTwoReport",
    "OracleReport",
    # shapes and files
    "generate",
    "available_shapes",
    "circle",
    "ellipse",
    "annulus",
    "rounded_rectangle",
    "dumbbell",
    "figure_eight",
    "dumbbell_field",
    "extract_level_set",
    "ShapeInfo",
    "ShapeSpec",
    "save",
    "load",
    "save_csv",
    "load_csv",
    "load_obj",
    "load_off",
    # estimator wrappers
    "RegularityCertifier",
    "ReachEstimator",
]

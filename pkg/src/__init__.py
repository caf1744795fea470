"""
WP Lab - Core Package

Numerical toolkit for Weil-Petersson curves through infinity: function-space
norms, arc-length curve synthesis, Semmes-type quasiconformal extensions,
conformal welding and empirical theorem checks.
"""

__version__ = "1.0.0"
__author__ = "Kreemy29"
__email__ = "your.email@example.com"

# Core modules
from .core_numerics import (
    LineGrid,
    SampledLineFunction,
    HalfPlaneGrid,
    HalfPlaneField,
    MonotoneBoundaryMap,
    make_line_grid,
    make_half_plane_grid,
    integrate_line,
    invert_monotone,
    compose_maps,
)
from .function_spaces import (
    BeltramiField,
    h12_seminorm,
    bmo_norm,
    bloch_seminorm,
    vmo_modulus,
    dirichlet_seminorm,
    b2_norm,
    wp_norm,
    john_nirenberg_probe,
    poisson_extend,
)
from .curve_synthesis import (
    CurveSamples,
    TangentAngle,
    gamma_u,
    curve_from_angle,
    tangent_angle_from_curve,
    chord_arc_constant,
    normalize_curve,
    reflect_J,
)
from .semmes_extension import (
    ExtensionField,
    kernel_eval,
    convolve_scaled,
    ry_operator,
    extension_base,
    tau_bilipschitz,
    extension_general,
    beltrami_of_field,
)
from .conformal_welding import (
    RiemannMapPair,
    WeldingRecord,
    riemann_maps,
    boundary_correspondence,
    welding_map,
    prelog_derivative,
    schwarzian,
    beltrami_compose,
    beurling_ahlfors_extension,
)
from .theorem_lab import (
    ExperimentConfig,
    continuity_sweep,
    prop61_scaling,
    thm41_equivalence,
    symmetry_suite,
    decomposition_roundtrip,
    perturb_log_derivative,
    lemma61_majorant,
    lambda_holomorphy_probe,
    extension_estimates,
)
from .models import NormReport, CheckVerdict, ExperimentReport, RunConfig, RunRecord
from .db import get_session, init_db, record_run

__all__ = [
    "LineGrid",
    "SampledLineFunction",
    "HalfPlaneGrid",
    "HalfPlaneField",
    "MonotoneBoundaryMap",
    "make_line_grid",
    "make_half_plane_grid",
    "integrate_line",
    "invert_monotone",
    "compose_maps",
    "BeltramiField",
    "h12_seminorm",
    "bmo_norm",
    "bloch_seminorm",
    "vmo_modulus",
    "dirichlet_seminorm",
    "b2_norm",
    "wp_norm",
    "john_nirenberg_probe",
    "poisson_extend",
    "CurveSamples",
    "TangentAngle",
    "gamma_u",
    "curve_from_angle",
    "tangent_angle_from_curve",
    "chord_arc_constant",
    "normalize_curve",
    "reflect_J",
    "ExtensionField",
    "kernel_eval",
    "convolve_scaled",
    "ry_operator",
    "extension_base",
    "tau_bilipschitz",
    "extension_general",
    "beltrami_of_field",
    "RiemannMapPair",
    "WeldingRecord",
    "riemann_maps",
    "boundary_correspondence",
    "welding_map",
    "prelog_derivative",
    "schwarzian",
    "beltrami_compose",
    "beurling_ahlfors_extension",
    "ExperimentConfig",
    "continuity_sweep",
    "prop61_scaling",
    "thm41_equivalence",
    "symmetry_suite",
    "decomposition_roundtrip",
    "perturb_log_derivative",
    "lemma61_majorant",
    "lambda_holomorphy_probe",
    "extension_estimates",
    "NormReport",
    "CheckVerdict",
    "ExperimentReport",
    "RunConfig",
    "RunRecord",
    "get_session",
    "init_db",
    "record_run",
]

"""Axis-aligned separability laws and constructive neural-ODE classifiers.

The package computes the minimal number of axis-orthogonal hyperplanes
separating a random two-colored point cloud, evaluates the exact and
asymptotic probability laws of that count, and synthesizes piecewise-
constant controls for the single-neuron neural ODE x' = w g(a.x + b) that
provably classify any general-position dataset, with exact switch counts
and an exactly integrable simulator to certify the result.
"""

from .distributions import (
    Pmf1D,
    asymptotic_p_max,
    asymptotic_p_not_linsep,
    ccdf_zperp,
    fig4_lower_bound_table,
    montecarlo_ccdf,
    montecarlo_report,
    p_not_linearly_separable,
    pmf_z1,
    pmf_z1_hypergeometric,
    pmf_z1_oracle,
    rational_str,
    write_fig4_csv,
)
from .geometry import (
    GenericityReport,
    LabeledPair,
    check_genericity,
    pair_from_json,
    pair_to_json,
    project,
    sample_pair,
)
from .separability import (
    Hyperplane,
    SeparatingFamily,
    axis_family,
    family_from_json,
    family_to_json,
    gaps_1d,
    is_interspersed_collinear,
    verify_family,
    z_axis,
    z_perp,
)
from .clustering import (
    Cluster,
    ClusterFamily,
    cluster_direction,
    cluster_family_to_json,
    hyperplane_through,
    linear_components,
    repair_axis_orthogonality,
)
from .control import (
    ControlLeg,
    ControlSchedule,
    eval_activation,
    schedule_from_json,
    schedule_to_json,
    synth_canonical,
    synth_fem,
    synth_relu_decomposed,
    synth_truncated,
    tv_bound_report,
    tv_seminorm,
)
from .flow import (
    SimulationResult,
    certify,
    flow_leg_exact,
    flow_leg_rk4,
    simulate,
    simulation_to_json,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Pmf1D",
    "pmf_z1",
    "pmf_z1_oracle",
    "pmf_z1_hypergeometric",
    "ccdf_zperp",
    "p_not_linearly_separable",
    "asymptotic_p_not_linsep",
    "asymptotic_p_max",
    "fig4_lower_bound_table",
    "write_fig4_csv",
    "montecarlo_ccdf",
    "montecarlo_report",
    "rational_str",
    "LabeledPair",
    "GenericityReport",
    "sample_pair",
    "check_genericity",
    "project",
    "pair_to_json",
    "pair_from_json",
    "Hyperplane",
    "SeparatingFamily",
    "gaps_1d",
    "z_axis",
    "z_perp",
    "axis_family",
    "verify_family",
    "is_interspersed_collinear",
    "family_to_json",
    "family_from_json",
    "Cluster",
    "ClusterFamily",
    "hyperplane_through",
    "linear_components",
    "repair_axis_orthogonality",
    "cluster_direction",
    "cluster_family_to_json",
    "ControlLeg",
    "ControlSchedule",
    "eval_activation",
    "synth_canonical",
    "synth_truncated",
    "synth_fem",
    "synth_relu_decomposed",
    "tv_seminorm",
    "tv_bound_report",
    "schedule_to_json",
    "schedule_from_json",
    "SimulationResult",
    "simulate",
    "certify",
    "flow_leg_exact",
    "flow_leg_rk4",
    "simulation_to_json",
    "write_trajectory_csv",
]

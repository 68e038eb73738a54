"""Labor reallocation on occupational mobility networks.

Two engines simulate the same discrete-time search-and-matching dynamics:
an exact stochastic agent-count model (`laborflow.abm`) and its
deterministic large-population limit (`laborflow.meanfield`), driven by
target-demand scenarios (`laborflow.scenario`) over a row-stochastic
occupation network (`laborflow.network`), with Beveridge-curve metrics and
grid-search calibration on top.
"""

from ._version import __version__
from .abm import (
    StepRecord,
    adjustment_probabilities,
    combined_probabilities,
    match_applicants,
    rescue_rule,
    run_simulation,
    stochastic_step,
)
from .calibrate import (
    CalibrationResult,
    GridAxis,
    GridSpec,
    business_cycle_curve,
    fit_beveridge,
    infer_r,
    sweep_cyclicality,
)
from .meanfield import (
    SteadyState,
    expected_applications,
    expected_flows,
    ltu_step,
    meanfield_step,
    run_meanfield,
    solve_steady_state,
    steady_mean_state,
)
from .metrics import (
    BeveridgeCurve,
    RateSeries,
    alternative_average_rates,
    curve_overlap,
    cycle_direction,
    rates_from_series,
    signed_area,
    window_average_rates,
)
from .network import (
    Network,
    ScoreVector,
    TransitionCounts,
    build_network,
    complete_network,
    map_scores,
    read_mapped_scores,
    read_network,
    read_transition_counts,
    write_network,
)
from .params import DEFAULT_SELF_LOOP, ModelParams
from .scenario import (
    ConstantPath,
    DemandPath,
    ShockSpec,
    SigmoidShockPath,
    SinePath,
    TablePath,
    assortative_scores,
    automation_shock_path,
    materialize,
    post_shock_demand,
    scale_aggregate,
    shuffle_scores,
    sigmoid_path,
    sine_path,
)
from .state import LaborState, MeanState, SimulationSeries, discretize_state

__all__ = [
    "__version__",
    "ModelParams",
    "DEFAULT_SELF_LOOP",
    "Network",
    "TransitionCounts",
    "ScoreVector",
    "build_network",
    "complete_network",
    "map_scores",
    "read_mapped_scores",
    "read_network",
    "read_transition_counts",
    "write_network",
    "DemandPath",
    "ConstantPath",
    "SigmoidShockPath",
    "SinePath",
    "TablePath",
    "ShockSpec",
    "post_shock_demand",
    "sigmoid_path",
    "automation_shock_path",
    "sine_path",
    "shuffle_scores",
    "assortative_scores",
    "scale_aggregate",
    "materialize",
    "LaborState",
    "MeanState",
    "SimulationSeries",
    "discretize_state",
    "StepRecord",
    "adjustment_probabilities",
    "combined_probabilities",
    "rescue_rule",
    "match_applicants",
    "stochastic_step",
    "run_simulation",
    "SteadyState",
    "expected_applications",
    "expected_flows",
    "meanfield_step",
    "ltu_step",
    "solve_steady_state",
    "steady_mean_state",
    "run_meanfield",
    "BeveridgeCurve",
    "RateSeries",
    "rates_from_series",
    "window_average_rates",
    "alternative_average_rates",
    "signed_area",
    "cycle_direction",
    "curve_overlap",
    "GridAxis",
    "GridSpec",
    "CalibrationResult",
    "business_cycle_curve",
    "fit_beveridge",
    "infer_r",
    "sweep_cyclicality",
]

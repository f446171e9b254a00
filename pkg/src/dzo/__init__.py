"""Decentralized stochastic zeroth-order convex optimization simulator."""

from .baselines import DEFAULT_GRID, DsfConfig, run_dsf, tune_dsf
from .data import (
    Dataset,
    Partition,
    Sample,
    load_dataset,
    max_feature_norm,
    parse_libsvm,
    partition_iid,
)
from .dpoem import (
    AgentState,
    FeasibleBall,
    project_ball,
    radius_proxy,
    run_dpoem,
    smoothing_radius,
    stepsize,
)
from .estimator import GradientEstimate, estimate_gradient, sample_sphere
from .metrics import (
    RunTrace,
    WeightedOutputAccumulator,
    consensus_error,
    gap_vs_reference,
    network_average,
    poem_bound_check,
    select_output,
    write_trace_csv,
)
from .network import (
    Graph,
    MixingMatrix,
    erdos_renyi,
    metropolis_weights,
    mix,
    spectral_gap,
)
from .oracle import (
    DistanceObjective,
    HingeObjective,
    LinearObjective,
    full_objective,
    two_point,
)

__all__ = [
    "AgentState",
    "DEFAULT_GRID",
    "Dataset",
    "DistanceObjective",
    "DsfConfig",
    "FeasibleBall",
    "GradientEstimate",
    "Graph",
    "HingeObjective",
    "LinearObjective",
    "MixingMatrix",
    "Partition",
    "RunTrace",
    "Sample",
    "WeightedOutputAccumulator",
    "consensus_error",
    "erdos_renyi",
    "estimate_gradient",
    "full_objective",
    "gap_vs_reference",
    "load_dataset",
    "max_feature_norm",
    "metropolis_weights",
    "mix",
    "network_average",
    "parse_libsvm",
    "partition_iid",
    "poem_bound_check",
    "project_ball",
    "radius_proxy",
    "run_dpoem",
    "run_dsf",
    "sample_sphere",
    "select_output",
    "smoothing_radius",
    "spectral_gap",
    "stepsize",
    "tune_dsf",
    "two_point",
    "write_trace_csv",
]

__version__ = "0.1.0"

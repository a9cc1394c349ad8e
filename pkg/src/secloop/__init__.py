"""Secure resource allocation for a sensing-communication-computing-control
closed loop: channel model, closed-loop metrics, globally optimal solvers,
comparison baselines, a brute-force verification oracle, and an experiment
harness."""

from .channels import (
    ChannelGains,
    NodeLayout,
    PathLossModel,
    Position3,
    eavesdrop_rate_upper_bound,
    gains_from_geometry,
    path_loss_gain,
    rate,
)
from .dispatch import ChannelCase, SolveReport, classify, objective_ratio_sum, solve
from .errors import (
    ConvergenceError,
    DegenerateChannelError,
    InfeasibleError,
    ScenarioFormatError,
    SecloopError,
)
from .loop import (
    Allocation,
    ComputeModel,
    LoopMetrics,
    LqrParams,
    ResourceLimits,
    SecurityPolicy,
    evaluate,
    is_feasible,
    lqr_lower_bound,
    optimal_times,
    unconstrained_baseline,
)
from .scenario import (
    ScenarioConfig,
    default_scenario,
    eve_scan_scenario,
    load_scenario,
    save_scenario,
    superior_eavesdropper_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ChannelCase",
    "ChannelGains",
    "ComputeModel",
    "ConvergenceError",
    "DegenerateChannelError",
    "InfeasibleError",
    "LoopMetrics",
    "LqrParams",
    "NodeLayout",
    "PathLossModel",
    "Position3",
    "ResourceLimits",
    "ScenarioConfig",
    "ScenarioFormatError",
    "SecloopError",
    "SecurityPolicy",
    "SolveReport",
    "classify",
    "default_scenario",
    "eavesdrop_rate_upper_bound",
    "evaluate",
    "eve_scan_scenario",
    "gains_from_geometry",
    "is_feasible",
    "load_scenario",
    "lqr_lower_bound",
    "objective_ratio_sum",
    "optimal_times",
    "path_loss_gain",
    "rate",
    "save_scenario",
    "solve",
    "superior_eavesdropper_scenario",
    "unconstrained_baseline",
]

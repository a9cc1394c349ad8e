"""Case classification and the one-call solve entry point.

The activation test compares the leakage of the no-security reference
allocation against the budget; when the budget binds, the channel-ordering
case decides whether the curve-intersection backend (both legitimate links
superior) or the monotone outer-approximation backend (all other orderings)
produces the optimal rate variables. Either way the transmission times come
from the leakage-tight closed form and the computing capability sits at its
cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import ChannelGains, rate
from .errors import DegenerateChannelError
from .kkt import CaseIProblem, solve_case1
from .loop import (
    Allocation,
    LoopMetrics,
    evaluate,
    optimal_times,
    unconstrained_baseline,
)
from .polyblock import DEFAULT_EPSILON, build_mo_problem, polyblock_iterate
from .scenario import ScenarioConfig

# relative margin on the activation test, to avoid chattering at the boundary
ACTIVATION_MARGIN = 1e-12

UNCONSTRAINED = "Unconstrained"


@dataclass(frozen=True)
class ChannelCase:
    """Channel-ordering case from the four-gain comparison."""

    label: str  # I, II, III, IV, or Unconstrained
    uplink_superior: bool  # g_u > g_se
    downlink_superior: bool  # g_d > g_ce


@dataclass(frozen=True)
class SolveReport:
    allocation: Allocation
    metrics: LoopMetrics
    case: ChannelCase
    objective: float  # leakage ratio sum at the chosen rate variables
    iterations: int
    solver_tolerance: float


def classify(gains: ChannelGains) -> ChannelCase:
    """Case label from the strict gain orderings.

    Exact ties are rejected: the case analysis needs strict inequalities,
    and at a tie either variable choice is optimal anyway, so callers may
    perturb the gain by one ulp and retry.
    """
    if gains.g_u == gains.g_se or gains.g_d == gains.g_ce:
        raise DegenerateChannelError(
            "legitimate and eavesdropping gains exactly equal; perturb and retry"
        )
    up = gains.g_u > gains.g_se
    down = gains.g_d > gains.g_ce
    label = {(True, True): "I", (False, False): "II", (True, False): "III", (False, True): "IV"}[
        (up, down)
    ]
    return ChannelCase(label=label, uplink_superior=up, downlink_superior=down)


def objective_ratio_sum(
    p_u: float, b_u: float, p_d: float, b_d: float, gains: ChannelGains
) -> float:
    """Sum of eavesdropper-to-legitimate rate ratios for the two links."""
    r_u = rate(p_u, b_u, gains.g_u, gains.n0)
    r_d = rate(p_d, b_d, gains.g_d, gains.n0)
    if r_u <= 0 or r_d <= 0:
        raise ValueError("objective requires positive legitimate rates")
    r_se = rate(p_u, b_u, gains.g_se, gains.n0)
    r_ce = rate(p_d, b_d, gains.g_ce, gains.n0)
    return r_se / r_u + r_ce / r_d


def solve(
    scenario: ScenarioConfig,
    gains: ChannelGains | None = None,
    epsilon: float = DEFAULT_EPSILON,
    kkt_tol: float = 1e-10,
) -> SolveReport:
    """Globally optimal secure allocation for one scenario.

    ``gains`` overrides the geometry-derived gains (used by the imperfect-
    CSI study, which solves on estimated gains).
    """
    if gains is None:
        gains = scenario.gains()
    limits, compute, policy = scenario.limits, scenario.compute, scenario.policy

    base_alloc, base_metrics = unconstrained_baseline(gains, compute, limits)
    if base_metrics.leakage_weighted <= policy.d_th * (1.0 + ACTIVATION_MARGIN):
        case = ChannelCase(UNCONSTRAINED, gains.g_u > gains.g_se, gains.g_d > gains.g_ce)
        obj = objective_ratio_sum(
            base_alloc.p_u, base_alloc.b_u, base_alloc.p_d, base_alloc.b_d, gains
        )
        return SolveReport(base_alloc, base_metrics, case, obj, 0, 0.0)

    case = classify(gains)
    if case.label == "I":
        prob = CaseIProblem(gains, limits, compute, policy, tol=kkt_tol)
        sol = solve_case1(prob)
        p_u, b_u, p_d, b_d = sol.p_u, limits.b_max, sol.p_d, limits.b_max
        iterations = sol.iterations
        tolerance = kkt_tol
    else:
        mo = build_mo_problem(case.label, gains, limits, compute, policy, epsilon=epsilon)
        result = polyblock_iterate(mo)
        p_u, b_u, p_d, b_d = mo.to_rate_vars(result.point)
        p_u, p_d = min(p_u, limits.p_umax), min(p_d, limits.p_dmax)
        b_u, b_d = min(b_u, limits.b_max), min(b_d, limits.b_max)
        iterations = result.iterations
        tolerance = epsilon

    t_u, t_d = optimal_times(p_u, b_u, p_d, b_d, gains, compute, policy)
    alloc = Allocation(p_u=p_u, t_u=t_u, b_u=b_u, f=limits.f_max, p_d=p_d, t_d=t_d, b_d=b_d)
    metrics = evaluate(alloc, gains, compute)
    obj = objective_ratio_sum(p_u, b_u, p_d, b_d, gains)
    return SolveReport(alloc, metrics, case, obj, iterations, tolerance)

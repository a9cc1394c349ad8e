"""Brute-force grid verifier for the solver backends.

Exhaustively evaluates the reduced objective on (log or linear) grids over
the free rate variables, with transmission times rebuilt from the
leakage-tight closed form at every grid point, so every candidate meets the
leakage budget by construction and feasibility reduces to the time budget.
Deliberately shares no code path with the curve or polyblock solvers beyond
the elementary rate formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelGains
from .dispatch import classify
from .errors import InfeasibleError
from .loop import Allocation, optimal_times
from .scenario import ScenarioConfig

LN2 = math.log(2.0)


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    count: int
    scale: str = "log"  # or "linear"

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError("grid needs at least 2 points")
        if not 0 < self.lower < self.upper:
            raise ValueError("need 0 < lower < upper")
        if self.scale not in ("log", "linear"):
            raise ValueError("scale must be 'log' or 'linear'")

    def points(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lower, self.upper, self.count)
        return np.linspace(self.lower, self.upper, self.count)


def default_power_grid(p_max: float, count: int = 2000, decades: float = 6.0) -> GridSpec:
    return GridSpec(p_max * 10.0**-decades, p_max, count, "log")


def default_bandwidth_grid(b_max: float, count: int = 2000) -> GridSpec:
    return GridSpec(b_max / count, b_max, count, "linear")


@dataclass(frozen=True)
class OracleResult:
    allocation: Allocation
    cne: float
    objective: float
    resolution_bound: float  # local objective variation around the argmin
    feasible_points: int
    indices: tuple[int, ...]


def _log_snr_terms(p, b, g, n0):
    return np.log1p(p * g / (b * n0))


def _reduced_tables(p_u, b_u, p_d, b_d, gains: ChannelGains, rho, alpha, f_max, d_th):
    """Objective F and required cycle time on broadcastable variable arrays."""
    lu = _log_snr_terms(p_u, b_u, gains.g_u, gains.n0)
    lse = _log_snr_terms(p_u, b_u, gains.g_se, gains.n0)
    ld = _log_snr_terms(p_d, b_d, gains.g_d, gains.n0)
    lce = _log_snr_terms(p_d, b_d, gains.g_ce, gains.n0)
    obj = lse / lu + lce / ld
    r_u = b_u * lu / LN2
    r_d = b_d * ld / LN2
    time_needed = d_th * (1.0 / (rho * r_u) + 1.0 / r_d + alpha / (rho * f_max)) / obj
    return obj, time_needed


def grid_search_p2(
    scenario: ScenarioConfig,
    grid_u: GridSpec | None = None,
    grid_d: GridSpec | None = None,
    gains: ChannelGains | None = None,
) -> OracleResult:
    """Exhaustive search of the two Table-style free variables.

    The channel case fixes two of (p_u, b_u, p_d, b_d) at their caps; the
    grids sweep the other two. Returns the best feasible point together
    with a local-variation bound on how far below the true optimum it can
    be.
    """
    if gains is None:
        gains = scenario.gains()
    limits, compute, policy = scenario.limits, scenario.compute, scenario.policy
    case = classify(gains)

    if case.uplink_superior:
        up_grid = grid_u or default_power_grid(limits.p_umax)
        up_axis = up_grid.points()
        p_u, b_u = up_axis[:, None], limits.b_max
    else:
        up_grid = grid_u or default_bandwidth_grid(limits.b_max)
        up_axis = up_grid.points()
        p_u, b_u = limits.p_umax, up_axis[:, None]
    if case.downlink_superior:
        down_grid = grid_d or default_power_grid(limits.p_dmax)
        down_axis = down_grid.points()
        p_d, b_d = down_axis[None, :], limits.b_max
    else:
        down_grid = grid_d or default_bandwidth_grid(limits.b_max)
        down_axis = down_grid.points()
        p_d, b_d = limits.p_dmax, down_axis[None, :]

    obj, time_needed = _reduced_tables(
        p_u, b_u, p_d, b_d, gains, compute.rho, compute.alpha, limits.f_max, policy.d_th
    )
    feasible = time_needed <= limits.t_total
    n_feasible = int(feasible.sum())
    if n_feasible == 0:
        raise InfeasibleError("no feasible grid point; refine or widen the grids")

    masked = np.where(feasible, obj, np.inf)
    flat_idx = int(np.argmin(masked))
    i, j = np.unravel_index(flat_idx, masked.shape)
    best_obj = float(masked[i, j])

    # local objective variation around the winner, as an optimality-gap bound
    span = 0.0
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        ii, jj = i + di, j + dj
        if 0 <= ii < obj.shape[0] and 0 <= jj < obj.shape[1]:
            span = max(span, abs(float(obj[ii, jj]) - best_obj))

    if case.uplink_superior:
        best_p_u, best_b_u = float(up_axis[i]), limits.b_max
    else:
        best_p_u, best_b_u = limits.p_umax, float(up_axis[i])
    if case.downlink_superior:
        best_p_d, best_b_d = float(down_axis[j]), limits.b_max
    else:
        best_p_d, best_b_d = limits.p_dmax, float(down_axis[j])

    t_u, t_d = optimal_times(best_p_u, best_b_u, best_p_d, best_b_d, gains, compute, policy)
    alloc = Allocation(
        p_u=best_p_u, t_u=t_u, b_u=best_b_u, f=limits.f_max, p_d=best_p_d, t_d=t_d, b_d=best_b_d
    )
    return OracleResult(
        allocation=alloc,
        cne=policy.d_th / best_obj,
        objective=best_obj,
        resolution_bound=span,
        feasible_points=n_feasible,
        indices=(int(i), int(j)),
    )


@dataclass(frozen=True)
class FullGridResult:
    cne: float
    objective: float
    indices: tuple[int, int, int, int]  # (i_pu, i_bu, i_pd, i_bd)
    shape: tuple[int, int, int, int]
    at_full_resources: bool


def grid_search_full(
    scenario: ScenarioConfig,
    power_points: int = 20,
    bandwidth_points: int = 20,
    power_decades: float = 6.0,
    gains: ChannelGains | None = None,
) -> FullGridResult:
    """4-D exhaustive search with no structural assumption.

    At fixed rate variables the attainable per-cycle output is the smaller
    of the leakage-limited and time-limited branches, so no feasibility
    mask is needed and the search covers both regimes. Used to validate
    that the optimizer sits on the predicted face of the box: whichever two
    variables the case table pins at their caps must come out in the top
    grid cell. Axes are coarse by design.
    """
    if gains is None:
        gains = scenario.gains()
    limits, compute, policy = scenario.limits, scenario.compute, scenario.policy

    p_u_axis = default_power_grid(limits.p_umax, power_points, power_decades).points()
    p_d_axis = default_power_grid(limits.p_dmax, power_points, power_decades).points()
    b_u_axis = default_bandwidth_grid(limits.b_max, bandwidth_points).points()
    b_d_axis = default_bandwidth_grid(limits.b_max, bandwidth_points).points()

    best_cne = -math.inf
    best_idx = None
    best_obj = math.nan
    # chunk over the uplink power axis to bound memory
    for i, p_u in enumerate(p_u_axis):
        obj, time_needed = _reduced_tables(
            p_u,
            b_u_axis[:, None, None],
            p_d_axis[None, :, None],
            b_d_axis[None, None, :],
            gains,
            compute.rho,
            compute.alpha,
            limits.f_max,
            policy.d_th,
        )
        cne = (policy.d_th / obj) * np.minimum(1.0, limits.t_total / time_needed)
        flat = int(np.argmax(cne))
        val = float(cne.flat[flat])
        if val > best_cne:
            j, k, l = np.unravel_index(flat, cne.shape)
            best_cne = val
            best_obj = float(obj[j, k, l])
            best_idx = (i, int(j), int(k), int(l))

    if best_idx is None or not math.isfinite(best_cne):
        raise InfeasibleError("full grid produced no attainable point")

    shape = (len(p_u_axis), len(b_u_axis), len(p_d_axis), len(b_d_axis))
    top = tuple(n - 1 for n in shape)
    return FullGridResult(
        cne=best_cne,
        objective=best_obj,
        indices=best_idx,
        shape=shape,
        at_full_resources=best_idx == top,
    )

"""Globally optimal power allocation when both legitimate links dominate.

With both bandwidths pinned at the cap, the remaining two-power problem is
non-convex but its KKT system collapses to two scalar curves in the
(p_u, p_d) plane: a stationarity curve (ratio of derivative pairs equal)
and the tight-budget curve (leakage-tight cycle exactly filling the time
budget). The first is increasing, the second decreasing, so their
intersection is unique when it exists; nested bisection finds it, and if it
falls outside the power box the optimum moves to one of the two box edges,
each solved by a single bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channels import ChannelGains
from .errors import InfeasibleError
from .loop import ComputeModel, ResourceLimits, SecurityPolicy
from .rootfind import IterationCounter, bisect_log, grow_until_sign

LN2 = math.log(2.0)

# largest power probed when bracketing the tight-budget curve; beyond this
# the curve is treated as out of floating-point reach
P_PROBE_CEILING = 1e280


class _TightCurveUnreachable(Exception):
    """The tight-budget curve at this uplink power needs a downlink power
    beyond double range; treat the point as outside the curve's domain."""


@dataclass
class CaseIProblem:
    """Two-power subproblem with precomputed per-link constants.

    ``a*`` are eavesdropper SNR slopes, ``b*`` legitimate SNR slopes (both
    per watt at full bandwidth); the legitimate slope strictly dominating
    its counterpart on both links is what makes this case solvable by the
    curve intersection.
    """

    gains: ChannelGains
    limits: ResourceLimits
    compute: ComputeModel
    policy: SecurityPolicy
    tol: float = 1e-10

    a1: float = field(init=False)
    b1: float = field(init=False)
    a2: float = field(init=False)
    b2: float = field(init=False)
    c1: float = field(init=False)
    c2: float = field(init=False)
    budget_term: float = field(init=False)

    def __post_init__(self) -> None:
        g = self.gains
        if not (g.g_u > g.g_se and g.g_d > g.g_ce):
            raise ValueError("superior legitimate channels required on both links")
        bn0 = self.limits.b_max * g.n0
        self.a1 = g.g_se / bn0
        self.b1 = g.g_u / bn0
        self.a2 = g.g_ce / bn0
        self.b2 = g.g_d / bn0
        scale = self.policy.d_th * LN2 / (self.limits.t_total * self.limits.b_max)
        self.c1 = scale / self.compute.rho
        self.c2 = scale
        self.budget_term = (
            self.compute.alpha
            * self.policy.d_th
            / (self.compute.rho * self.limits.t_total * self.limits.f_max)
        )


def _f(a: float, b: float, p: float) -> float:
    return math.log1p(a * p) / math.log1p(b * p)


def _f_prime(a: float, b: float, p: float) -> float:
    la = math.log1p(a * p)
    lb = math.log1p(b * p)
    return (a * lb / (1.0 + a * p) - b * la / (1.0 + b * p)) / (lb * lb)


def _h(c: float, b: float, p: float) -> float:
    return c / math.log1p(b * p)


def _h_prime(c: float, b: float, p: float) -> float:
    lb = math.log1p(b * p)
    return -c * b / ((1.0 + b * p) * lb * lb)


def _ratio(a: float, b: float, c: float, p: float) -> float:
    """f'/h' without the cancelling lb^2 factors; negative and decreasing."""
    la = math.log1p(a * p)
    lb = math.log1p(b * p)
    return (la - a * (1.0 + b * p) * lb / (b * (1.0 + a * p))) / c


_AUX_DISPATCH = {
    "f1": lambda pr, p: _f(pr.a1, pr.b1, p),
    "f2": lambda pr, p: _f(pr.a2, pr.b2, p),
    "h1": lambda pr, p: _h(pr.c1, pr.b1, p),
    "h2": lambda pr, p: _h(pr.c2, pr.b2, p),
    "f1'": lambda pr, p: _f_prime(pr.a1, pr.b1, p),
    "f2'": lambda pr, p: _f_prime(pr.a2, pr.b2, p),
    "h1'": lambda pr, p: _h_prime(pr.c1, pr.b1, p),
    "h2'": lambda pr, p: _h_prime(pr.c2, pr.b2, p),
}


def aux_eval(which: str, p: float, prob: CaseIProblem) -> float:
    """Evaluate one auxiliary function or derivative at power ``p``."""
    if p <= 0:
        raise ValueError("auxiliary functions require p > 0")
    try:
        fn = _AUX_DISPATCH[which]
    except KeyError:
        raise ValueError(f"unknown auxiliary function {which!r}") from None
    return fn(prob, p)


def stationarity_gap(p_u: float, p_d: float, prob: CaseIProblem) -> float:
    """Difference of the two derivative ratios; zero on the interior curve."""
    if p_u <= 0 or p_d <= 0:
        raise ValueError("powers must be strictly positive")
    return _ratio(prob.a1, prob.b1, prob.c1, p_u) - _ratio(prob.a2, prob.b2, prob.c2, p_d)


def constraint_gap(p_u: float, p_d: float, prob: CaseIProblem) -> float:
    """Slack of the time budget under leakage-tight transmission times.

    Positive means the leakage-tight cycle fits inside the period with room
    to spare; zero is the tight curve the optimum must sit on.
    """
    if p_u <= 0 or p_d <= 0:
        raise ValueError("powers must be strictly positive")
    return (
        _f(prob.a1, prob.b1, p_u)
        + _f(prob.a2, prob.b2, p_d)
        - _h(prob.c1, prob.b1, p_u)
        - _h(prob.c2, prob.b2, p_d)
        - prob.budget_term
    )


def objective(p_u: float, p_d: float, prob: CaseIProblem) -> float:
    """Leakage ratio sum; minimizing it maximizes delivered information."""
    return _f(prob.a1, prob.b1, p_u) + _f(prob.a2, prob.b2, p_d)


def _uplink_headroom(p_u: float, prob: CaseIProblem) -> float:
    """sup over p_d of constraint_gap(p_u, .); positive iff the tight curve
    reaches this uplink power at all."""
    return (
        _f(prob.a1, prob.b1, p_u)
        - _h(prob.c1, prob.b1, p_u)
        + 1.0
        - prob.budget_term
    )


def _solve_tight_pd(p_u: float, prob: CaseIProblem, counter: IterationCounter) -> float:
    """Downlink power putting (p_u, p_d) on the tight-budget curve."""
    gap = lambda p_d: constraint_gap(p_u, p_d, prob)
    start = prob.limits.p_dmax
    g0 = gap(start)
    if g0 == 0.0:
        return start
    if g0 > 0.0:
        lo, hi = grow_until_sign(gap, start, 0.25, want_positive=False, counter=counter)
        lo, hi = hi, lo
    else:
        if gap(P_PROBE_CEILING) <= 0.0:
            raise _TightCurveUnreachable
        lo, hi = start, P_PROBE_CEILING
    return bisect_log(gap, lo, hi, rel_tol=prob.tol, counter=counter)


def _solve_tight_pu(p_d: float, prob: CaseIProblem, counter: IterationCounter) -> float:
    gap = lambda p_u: constraint_gap(p_u, p_d, prob)
    start = prob.limits.p_umax
    g0 = gap(start)
    if g0 == 0.0:
        return start
    if g0 > 0.0:
        lo, hi = grow_until_sign(gap, start, 0.25, want_positive=False, counter=counter)
        lo, hi = hi, lo
    else:
        if gap(P_PROBE_CEILING) <= 0.0:
            raise _TightCurveUnreachable
        lo, hi = start, P_PROBE_CEILING
    return bisect_log(gap, lo, hi, rel_tol=prob.tol, counter=counter)


@dataclass(frozen=True)
class Case1Solution:
    p_u: float
    p_d: float
    objective: float
    iterations: int
    interior: bool


def solve_case1(prob: CaseIProblem) -> Case1Solution:
    """Global optimum of the two-power problem.

    Nested bisection locates the unique stationarity/tight-budget curve
    intersection; if it lies inside the power box it is returned, otherwise
    the two box-edge candidates are solved and the better one wins (ties go
    to the full-uplink-power edge).
    """
    counter = IterationCounter()
    p_umax = prob.limits.p_umax
    p_dmax = prob.limits.p_dmax

    corner = constraint_gap(p_umax, p_dmax, prob)
    if corner < 0.0:
        raise InfeasibleError(
            "tight-budget curve misses the power box: the leakage budget does not "
            "bind at full resources, so the constrained subproblem has no solution"
        )

    interior = _interior_intersection(prob, counter)
    if interior is not None:
        p_u_hat, p_d_hat = interior
        if p_u_hat <= p_umax * (1.0 + prob.tol) and p_d_hat <= p_dmax * (1.0 + prob.tol):
            p_u_hat = min(p_u_hat, p_umax)
            p_d_hat = min(p_d_hat, p_dmax)
            return Case1Solution(
                p_u_hat, p_d_hat, objective(p_u_hat, p_d_hat, prob), counter.count, True
            )

    # box-edge candidates; both exist because the corner slack is nonnegative
    p_d_bar = _solve_tight_pd(p_umax, prob, counter)
    p_d_bar = min(p_d_bar, p_dmax)
    obj_edge_u = objective(p_umax, p_d_bar, prob)

    p_u_bar = _solve_tight_pu(p_dmax, prob, counter)
    p_u_bar = min(p_u_bar, p_umax)
    obj_edge_d = objective(p_u_bar, p_dmax, prob)

    if obj_edge_u <= obj_edge_d:
        return Case1Solution(p_umax, p_d_bar, obj_edge_u, counter.count, False)
    return Case1Solution(p_u_bar, p_dmax, obj_edge_d, counter.count, False)


def _interior_intersection(
    prob: CaseIProblem, counter: IterationCounter
) -> tuple[float, float] | None:
    """Intersection of the two curves, or None when no in-box candidate exists.

    The stationarity mismatch along the tight-budget curve is decreasing in
    p_u, so one sign probe at the power cap decides whether the intersection
    can lie inside the box; the downhill bracket end is then searched
    geometrically toward the curve's domain edge.
    """
    p_umax = prob.limits.p_umax

    if _uplink_headroom(p_umax, prob) <= 0.0:
        return None  # tight curve only reachable beyond the uplink cap

    def psi(p_u: float) -> float:
        p_d = _solve_tight_pd(p_u, prob, counter)
        return stationarity_gap(p_u, p_d, prob)

    try:
        psi_cap = psi(p_umax)
    except _TightCurveUnreachable:
        return None  # curve out of numeric reach even at the cap: use the box edges
    if psi_cap == 0.0:
        return (p_umax, _solve_tight_pd(p_umax, prob, counter))
    if psi_cap > 0.0:
        return None  # mismatch still positive at the cap: intersection beyond the box

    # locate the curve's lower domain edge, then probe toward it for a sign flip
    lo_edge, hi_edge = grow_until_sign(
        lambda p: _uplink_headroom(p, prob), p_umax, 0.25, want_positive=False, counter=counter
    )
    dom_min = bisect_log(
        lambda p: _uplink_headroom(p, prob), hi_edge, lo_edge, rel_tol=1e-9, counter=counter
    )

    hi = p_umax
    for _ in range(80):
        p_probe = dom_min + 0.5 * (hi - dom_min)
        if p_probe <= dom_min or p_probe >= hi:
            return None
        if _uplink_headroom(p_probe, prob) <= 0.0:
            dom_min = p_probe  # numerical edge overshoot; tighten from below
            continue
        try:
            val = psi(p_probe)
        except _TightCurveUnreachable:
            dom_min = p_probe  # curve exists only beyond double range here
            continue
        if val == 0.0:
            return (p_probe, _solve_tight_pd(p_probe, prob, counter))
        if val > 0.0:
            p_u_hat = bisect_log(psi, p_probe, hi, rel_tol=prob.tol, counter=counter)
            return (p_u_hat, _solve_tight_pd(p_u_hat, prob, counter))
        hi = p_probe
    return None

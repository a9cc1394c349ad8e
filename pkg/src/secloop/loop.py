"""Closed-loop bookkeeping for a given allocation.

Everything here is a pure function of the allocation and the channel gains:
per-cycle throughputs, delivered task information, leakage, feasibility
against the resource budget, the analytic transmission-time formulas for
the leakage-tight regime, the no-security reference allocation, and the
control-cost lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import ChannelGains, eavesdrop_rate_upper_bound, rate
from .errors import InfeasibleError, SecloopError


@dataclass(frozen=True)
class ResourceLimits:
    """Per-cycle resource caps."""

    p_umax: float  # W
    p_dmax: float  # W
    b_max: float  # Hz
    t_total: float  # s
    f_max: float  # cycles/s

    def __post_init__(self) -> None:
        for name in ("p_umax", "p_dmax", "b_max", "t_total", "f_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class ComputeModel:
    alpha: float  # CPU cycles per uplink bit
    rho: float  # task-relevant fraction of raw sensor bits

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be strictly positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")


@dataclass(frozen=True)
class SecurityPolicy:
    d_th: float  # leaked task-relevant bits allowed per cycle

    def __post_init__(self) -> None:
        if self.d_th <= 0:
            raise ValueError("d_th must be strictly positive")


@dataclass(frozen=True)
class Allocation:
    """The seven decision variables of one control cycle."""

    p_u: float
    t_u: float
    b_u: float
    f: float
    p_d: float
    t_d: float
    b_d: float

    def __post_init__(self) -> None:
        for name in ("p_u", "t_u", "b_u", "f", "p_d", "t_d", "b_d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class LoopMetrics:
    d_u: float  # uplink bits delivered
    d_d: float  # downlink bits delivered
    cne: float  # task-relevant bits through the loop, min(rho*d_u, d_d)
    d_se: float  # bits captured off the uplink (worst case)
    d_ce: float  # bits captured off the downlink
    leakage_weighted: float  # rho*d_se + d_ce
    t_compute: float


@dataclass(frozen=True)
class LqrParams:
    """Pre-aggregated control-side scalars for the cost bound.

    Only the scalar combinations entering the bound are kept; the underlying
    matrices are the caller's business.
    """

    n: int
    log2_det_a: float
    nv_detm_term: float
    trace_term: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("state dimension n must be >= 1")
        if self.nv_detm_term < 0:
            raise ValueError("nv_detm_term must be nonnegative")


def evaluate(alloc: Allocation, gains: ChannelGains, compute: ComputeModel) -> LoopMetrics:
    """Per-cycle throughput, delivered information, and leakage."""
    d_u = alloc.t_u * rate(alloc.p_u, alloc.b_u, gains.g_u, gains.n0) if alloc.t_u > 0 else 0.0
    d_d = alloc.t_d * rate(alloc.p_d, alloc.b_d, gains.g_d, gains.n0) if alloc.t_d > 0 else 0.0
    d_se = (
        alloc.t_u * eavesdrop_rate_upper_bound(alloc.p_u, alloc.b_u, gains.g_se, gains.n0)
        if alloc.t_u > 0
        else 0.0
    )
    d_ce = alloc.t_d * rate(alloc.p_d, alloc.b_d, gains.g_ce, gains.n0) if alloc.t_d > 0 else 0.0
    if d_u > 0 and alloc.f == 0:
        raise SecloopError("zero computing capability with nonzero uplink data")
    t_compute = compute.alpha * d_u / alloc.f if d_u > 0 else 0.0
    return LoopMetrics(
        d_u=d_u,
        d_d=d_d,
        cne=min(compute.rho * d_u, d_d),
        d_se=d_se,
        d_ce=d_ce,
        leakage_weighted=compute.rho * d_se + d_ce,
        t_compute=t_compute,
    )


def is_feasible(
    alloc: Allocation,
    gains: ChannelGains,
    compute: ComputeModel,
    limits: ResourceLimits,
    policy: SecurityPolicy,
    tol: float = 1e-9,
) -> tuple[bool, list[str]]:
    """Check the full constraint set; returns (ok, violation descriptions)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    violations: list[str] = []

    def check_box(value: float, limit: float, name: str) -> None:
        if value > limit * (1.0 + tol):
            violations.append(f"{name} = {value:.6g} exceeds limit {limit:.6g}")

    check_box(alloc.p_u, limits.p_umax, "p_u")
    check_box(alloc.p_d, limits.p_dmax, "p_d")
    check_box(alloc.b_u, limits.b_max, "b_u")
    check_box(alloc.b_d, limits.b_max, "b_d")
    check_box(alloc.f, limits.f_max, "f")

    metrics = evaluate(alloc, gains, compute)
    t_sum = alloc.t_u + metrics.t_compute + alloc.t_d
    if t_sum > limits.t_total * (1.0 + tol):
        violations.append(
            f"time budget: t_u + t_c + t_d = {t_sum:.9g} exceeds T = {limits.t_total:.9g}"
        )
    if metrics.leakage_weighted > policy.d_th * (1.0 + tol):
        violations.append(
            f"leakage {metrics.leakage_weighted:.9g} exceeds threshold {policy.d_th:.9g}"
        )
    return (not violations, violations)


def optimal_times(
    p_u: float,
    b_u: float,
    p_d: float,
    b_d: float,
    gains: ChannelGains,
    compute: ComputeModel,
    policy: SecurityPolicy,
) -> tuple[float, float]:
    """Transmission times that make the leakage budget exactly tight.

    In the leakage-limited regime the optimal times are proportional to the
    inverse link rates, scaled so that the weighted leakage equals the
    threshold and the uplink/downlink information flow is balanced
    (rho * D_u = D_d).
    """
    r_u = rate(p_u, b_u, gains.g_u, gains.n0)
    r_d = rate(p_d, b_d, gains.g_d, gains.n0)
    r_se = eavesdrop_rate_upper_bound(p_u, b_u, gains.g_se, gains.n0)
    r_ce = rate(p_d, b_d, gains.g_ce, gains.n0)
    if r_u <= 0 or r_d <= 0 or r_se <= 0 or r_ce <= 0:
        raise SecloopError("optimal_times requires all four link rates to be positive")
    ratio_sum = r_se / r_u + r_ce / r_d
    t_u = (policy.d_th / (compute.rho * r_u)) / ratio_sum
    t_d = (policy.d_th / r_d) / ratio_sum
    return t_u, t_d


def unconstrained_baseline(
    gains: ChannelGains, compute: ComputeModel, limits: ResourceLimits
) -> tuple[Allocation, LoopMetrics]:
    """Reference allocation when the leakage budget is ignored.

    All rate resources sit at their caps and the cycle time is split so the
    time budget is exhausted with balanced information flow. The returned
    metrics carry the leakage this allocation would incur, which drives the
    security-constraint activation test.
    """
    r_u = rate(limits.p_umax, limits.b_max, gains.g_u, gains.n0)
    r_d = rate(limits.p_dmax, limits.b_max, gains.g_d, gains.n0)
    denom = 1.0 / (compute.rho * r_u) + 1.0 / r_d + compute.alpha / (compute.rho * limits.f_max)
    t_u = (1.0 / (compute.rho * r_u)) * limits.t_total / denom
    t_d = (1.0 / r_d) * limits.t_total / denom
    alloc = Allocation(
        p_u=limits.p_umax,
        t_u=t_u,
        b_u=limits.b_max,
        f=limits.f_max,
        p_d=limits.p_dmax,
        t_d=t_d,
        b_d=limits.b_max,
    )
    return alloc, evaluate(alloc, gains, compute)


def lqr_lower_bound(cne: float, params: LqrParams) -> float:
    """Lower bound on the control cost as a function of delivered bits.

    Decreasing in ``cne``; diverges as the information rate approaches the
    stabilization threshold from above.
    """
    exponent = (2.0 / params.n) * (cne - params.log2_det_a)
    if exponent > 1023.0:  # past double range the rate term vanishes
        return params.trace_term
    denom = 2.0**exponent - 1.0
    if denom <= 0:
        raise InfeasibleError(
            "information rate below stabilization threshold: cost bound undefined"
        )
    return params.nv_detm_term / denom + params.trace_term

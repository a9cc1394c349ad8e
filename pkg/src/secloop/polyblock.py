"""Monotone reformulation and polyblock outer approximation for the cases
where at least one eavesdropping link outgains its legitimate counterpart.

Per the case table, two of the four rate variables sit at their caps and
the remaining two are mapped to coordinates in which both the (negated)
leakage-ratio objective and the tight-budget constraint are increasing:
inverse bandwidth x = 1/B, and likewise inverse power when a power is the
free variable. The feasible region is then outer-approximated by a shrinking
union of boxes anchored at the origin; each step projects the best vertex
onto the constraint boundary along its ray and cuts away the dominated
cone. Upper and lower bounds close monotonically to the requested epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import ChannelGains
from .errors import ConvergenceError, InfeasibleError, SecloopError
from .loop import ComputeModel, ResourceLimits, SecurityPolicy
from .rootfind import IterationCounter, bisect, bisect_log, grow_until_sign

LN2 = math.log(2.0)

P_FLOOR = 1e-12  # watts; smallest power an inverse-power axis can reach
DEFAULT_EPSILON = 1e-6
DEFAULT_PROJECTION_TOL = 1e-10
DEFAULT_MAX_ITERATIONS = 100_000
# Projection rays are anchored this fraction of the box extent below the box
# floor (clipped so evaluation stays in-domain). Rays from the floor itself
# graze any optimum sitting on a box face and the cone cuts then contract
# harmonically; a small standoff keeps the contraction geometric.
RAY_ANCHOR_MARGIN = 0.05


@dataclass
class MoProblem:
    """Two-variable monotone program equivalent to the reduced allocation
    problem for one channel case.

    ``objective`` and ``constraint`` are increasing in both coordinates over
    the positive orthant; feasibility is ``constraint(v) <= 0`` plus
    ``v >= lower``. ``to_rate_vars(v)`` recovers (p_u, b_u, p_d, b_d).
    """

    case: str
    objective: Callable[[tuple[float, float]], float]
    constraint: Callable[[tuple[float, float]], float]
    to_rate_vars: Callable[[tuple[float, float]], tuple[float, float, float, float]]
    lower: tuple[float, float]
    axis_caps: tuple[float | None, float | None]
    epsilon: float = DEFAULT_EPSILON


def _check_monotone(prob: MoProblem) -> None:
    """Spot-check the increasing directions on a small corner fan.

    The reformulation is derived, not assumed: a violation here means the
    case label and the channel ordering disagree.
    """
    l1, l2 = prob.lower
    for fn, name in ((prob.objective, "objective"), (prob.constraint, "constraint")):
        for axis in (0, 1):
            cap = prob.axis_caps[axis]
            top = min(cap, prob.lower[axis] * 64.0) if cap is not None else prob.lower[axis] * 64.0
            steps = [prob.lower[axis] + (top - prob.lower[axis]) * t for t in (0.0, 0.25, 0.5, 1.0)]
            other = (l2, l1)[axis] * 1.5
            prev = None
            for s in steps:
                v = (s, other) if axis == 0 else (other, s)
                val = fn(v)
                if prev is not None and val < prev - 1e-9 * max(1.0, abs(prev)):
                    raise SecloopError(
                        f"{name} not increasing along axis {axis} for case {prob.case}"
                    )
                prev = val


def build_mo_problem(
    case: str,
    gains: ChannelGains,
    limits: ResourceLimits,
    compute: ComputeModel,
    policy: SecurityPolicy,
    epsilon: float = DEFAULT_EPSILON,
) -> MoProblem:
    """Monotone reformulation for the given case label.

    Free/fixed variables follow the case table; every free variable enters
    through its reciprocal, so shrinking bandwidth or power raises the
    coordinate and both the objective and the constraint increase. The
    reciprocal is also decade-uniform, which keeps the feasible frontier
    well conditioned when the optimal power is orders of magnitude below
    its cap.
    """
    n0 = gains.n0
    rho, alpha = compute.rho, compute.alpha
    t_total, f_max = limits.t_total, limits.f_max
    d_th = policy.d_th
    budget_term = alpha * d_th / (rho * t_total * f_max)

    if case == "II":
        uplink_free_bandwidth = downlink_free_bandwidth = True
    elif case == "III":
        uplink_free_bandwidth, downlink_free_bandwidth = False, True
    elif case == "IV":
        uplink_free_bandwidth, downlink_free_bandwidth = True, False
    elif case == "I":
        # not used by the dispatcher (the curve solver owns this case); kept
        # so the two backends can be cross-checked on the same instance
        uplink_free_bandwidth = downlink_free_bandwidth = False
    else:
        raise ValueError(f"unsupported case label {case!r}")

    def unmap(v: tuple[float, float]) -> tuple[float, float, float, float]:
        v_u, v_d = v
        if uplink_free_bandwidth:
            p_u, b_u = limits.p_umax, 1.0 / v_u
        else:
            p_u, b_u = 1.0 / v_u, limits.b_max
        if downlink_free_bandwidth:
            p_d, b_d = limits.p_dmax, 1.0 / v_d
        else:
            p_d, b_d = 1.0 / v_d, limits.b_max
        return p_u, b_u, p_d, b_d

    def terms(v: tuple[float, float]) -> tuple[float, float, float, float]:
        """(ratio_u, ratio_d, 1/r_u, 1/r_d) at the unmapped point."""
        p_u, b_u, p_d, b_d = unmap(v)
        lu_e = math.log1p(p_u * gains.g_se / (b_u * n0))
        lu = math.log1p(p_u * gains.g_u / (b_u * n0))
        ld_e = math.log1p(p_d * gains.g_ce / (b_d * n0))
        ld = math.log1p(p_d * gains.g_d / (b_d * n0))
        inv_ru = LN2 / (b_u * lu)
        inv_rd = LN2 / (b_d * ld)
        return lu_e / lu, ld_e / ld, inv_ru, inv_rd

    def objective(v: tuple[float, float]) -> float:
        ratio_u, ratio_d, _, _ = terms(v)
        return -(ratio_u + ratio_d)

    def constraint(v: tuple[float, float]) -> float:
        ratio_u, ratio_d, inv_ru, inv_rd = terms(v)
        needed = d_th * (inv_ru / rho + inv_rd) / t_total + budget_term
        return needed - (ratio_u + ratio_d)

    lower = (
        1.0 / limits.b_max if uplink_free_bandwidth else 1.0 / limits.p_umax,
        1.0 / limits.b_max if downlink_free_bandwidth else 1.0 / limits.p_dmax,
    )
    axis_caps = (
        None if uplink_free_bandwidth else 1.0 / P_FLOOR,
        None if downlink_free_bandwidth else 1.0 / P_FLOOR,
    )
    prob = MoProblem(
        case=case,
        objective=objective,
        constraint=constraint,
        to_rate_vars=unmap,
        lower=lower,
        axis_caps=axis_caps,
        epsilon=epsilon,
    )
    _check_monotone(prob)
    return prob


def initial_corner(
    prob: MoProblem, counter: IterationCounter | None = None
) -> tuple[float, float]:
    """Vertex of the first polyblock: per-axis extents where the constraint
    becomes tight with the other coordinate at its floor."""
    if prob.constraint(prob.lower) >= 0.0:
        raise InfeasibleError(
            "constraint already violated at full resources: no tight allocation exists"
        )

    def axis_extent(axis: int) -> float:
        other = prob.lower[1 - axis]

        def g(t: float) -> float:
            v = (t, other) if axis == 0 else (other, t)
            return prob.constraint(v)

        cap = prob.axis_caps[axis]
        bracket = grow_until_sign(
            g, prob.lower[axis], 2.0, want_positive=True, cap=cap, counter=counter
        )
        if bracket is None:
            raise InfeasibleError(f"no tight point along axis {axis} within its cap")
        return bisect_log(g, bracket[0], bracket[1], rel_tol=1e-12, counter=counter)

    return (axis_extent(0), axis_extent(1))


def project_to_feasible(
    v: tuple[float, float],
    prob: MoProblem,
    proj_tol: float = DEFAULT_PROJECTION_TOL,
    counter: IterationCounter | None = None,
) -> tuple[float, float] | None:
    """Farthest point along the origin ray to ``v`` still inside the
    constraint set, by bisection on the ray parameter.

    Returns None when even the near-origin end of the ray is infeasible
    (the caller then discards the vertex).
    """
    if prob.constraint(v) <= 0.0:
        return v
    g = lambda lam: prob.constraint((lam * v[0], lam * v[1]))
    hi = 1.0
    lo = 0.5
    for _ in range(600):
        val = g(lo)
        if counter is not None:
            counter.add(1)
        if val <= 0.0:
            break
        hi = lo
        lo *= 0.5
        if lo < 1e-300:
            return None
    else:
        return None
    # keep the feasible end of the bracket so the returned point, and hence
    # the incumbent, always satisfies the constraint
    iters = 0
    while hi - lo > proj_tol * hi and iters < 200:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
    if counter is not None:
        counter.add(iters)
    return (lo * v[0], lo * v[1])


def _ray_project(
    v: tuple[float, float],
    prob: MoProblem,
    anchor: tuple[float, float],
    proj_tol: float,
    counter: IterationCounter | None,
) -> tuple[float, float] | None:
    """Boundary point along the ray from ``anchor`` (below the box floor)
    through ``v``; same binary search as the origin projection."""
    a1, a2 = anchor
    d1, d2 = v[0] - a1, v[1] - a2

    def point(lam: float) -> tuple[float, float]:
        return (a1 + lam * d1, a2 + lam * d2)

    def g(lam: float) -> float:
        return prob.constraint(point(lam))

    if g(1.0) <= 0.0:
        return v
    hi, lo = 1.0, 0.5
    for _ in range(600):
        if counter is not None:
            counter.add(1)
        if g(lo) <= 0.0:
            break
        hi = lo
        lo *= 0.5
        if lo < 1e-300:
            return None
    else:
        return None
    iters = 0
    while hi - lo > proj_tol * hi and iters < 200:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
    if counter is not None:
        counter.add(iters)
    return point(lo)


@dataclass
class PolyblockResult:
    """Outcome of the outer-approximation loop plus its bound history."""

    point: tuple[float, float]
    objective: float
    iterations: int
    upper_bounds: list[float]
    lower_bounds: list[float]
    max_vertices: int


def _anchored_view(prob: MoProblem) -> MoProblem:
    """Equivalent problem translated so the box's lower corner is the origin.

    Projection rays then fan across the box instead of entering it from far
    below the lower corner, which is what makes the cone cuts effective; in
    the translated coordinates every vertex is proper by construction.
    """
    l1, l2 = prob.lower

    def objective(z: tuple[float, float]) -> float:
        return prob.objective((z[0] + l1, z[1] + l2))

    def constraint(z: tuple[float, float]) -> float:
        return prob.constraint((z[0] + l1, z[1] + l2))

    def to_rate_vars(z: tuple[float, float]):
        return prob.to_rate_vars((z[0] + l1, z[1] + l2))

    return MoProblem(
        case=prob.case,
        objective=objective,
        constraint=constraint,
        to_rate_vars=to_rate_vars,
        lower=(0.0, 0.0),
        axis_caps=prob.axis_caps,
        epsilon=prob.epsilon,
    )


def polyblock_iterate(
    prob: MoProblem,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    on_iteration: Callable[[np.ndarray, float, float], None] | None = None,
) -> PolyblockResult:
    """Run the outer approximation until the bound gap closes to epsilon.

    The loop works on the lower-corner-anchored view of the problem.
    Vertices live in parallel arrays; each round the best vertex is
    projected onto the constraint boundary along its ray, the incumbent
    updated if the projection improves it, every vertex strictly dominating
    the projection is replaced by its two children, and improper or
    dominated vertices are pruned. The callback and the returned point use
    the original coordinates.
    """
    counter = IterationCounter()
    raw_corner = initial_corner(prob, counter)
    off1, off2 = prob.lower
    anchored = _anchored_view(prob)
    corner = (raw_corner[0] - off1, raw_corner[1] - off2)
    l1, l2 = anchored.lower
    ray_anchor = (
        -min(RAY_ANCHOR_MARGIN * corner[0], 0.5 * off1),
        -min(RAY_ANCHOR_MARGIN * corner[1], 0.5 * off2),
    )

    verts = np.array([corner], dtype=float)
    obj_vals = np.array([anchored.objective(corner)], dtype=float)

    best_point: tuple[float, float] | None = None
    best_val = -math.inf
    upper_trace: list[float] = []
    lower_trace: list[float] = []
    max_vertices = 1

    for iteration in range(1, max_iterations + 1):
        if len(verts) == 0:
            raise InfeasibleError("polyblock vertex set exhausted without a feasible point")
        k = int(np.argmax(obj_vals))
        vertex = (float(verts[k, 0]), float(verts[k, 1]))
        upper = float(obj_vals[k])

        projection = _ray_project(vertex, anchored, ray_anchor, DEFAULT_PROJECTION_TOL, counter)
        if projection is None:
            keep = np.ones(len(verts), dtype=bool)
            keep[k] = False
            verts, obj_vals = verts[keep], obj_vals[keep]
            continue

        x1, x2 = projection
        if x1 >= l1 and x2 >= l2:
            val = anchored.objective(projection)
            if val > best_val:
                best_val = val
                best_point = projection

        upper_trace.append(upper)
        lower_trace.append(best_val)
        if on_iteration is not None:
            on_iteration(verts + np.array([off1, off2]), upper, best_val)

        if best_point is not None and upper - best_val <= prob.epsilon:
            return PolyblockResult(
                (best_point[0] + off1, best_point[1] + off2),
                best_val,
                iteration,
                upper_trace,
                lower_trace,
                max_vertices,
            )

        dominating = (verts[:, 0] > x1) & (verts[:, 1] > x2)
        if not dominating.any():
            # projection coincided with the vertex but the gap is still open;
            # drop the vertex to guarantee progress
            keep = np.ones(len(verts), dtype=bool)
            keep[k] = False
            verts, obj_vals = verts[keep], obj_vals[keep]
            continue

        parents = verts[dominating]
        children = np.concatenate(
            [
                np.column_stack([np.full(len(parents), x1), parents[:, 1]]),
                np.column_stack([parents[:, 0], np.full(len(parents), x2)]),
            ]
        )
        # proper vertices only: children below the box floor can never
        # contain a feasible point
        children = children[(children[:, 0] >= l1) & (children[:, 1] >= l2)]
        # drop children dominated by a sibling or a surviving vertex
        survivors = verts[~dominating]
        keep_child = np.ones(len(children), dtype=bool)
        for i in range(len(children)):
            ci = children[i]
            others = np.concatenate([survivors, children[keep_child & (np.arange(len(children)) != i)]])
            if len(others) and ((others[:, 0] >= ci[0]) & (others[:, 1] >= ci[1])).any():
                keep_child[i] = False
        children = children[keep_child]

        child_vals = np.array([anchored.objective((c[0], c[1])) for c in children])
        verts = np.concatenate([survivors, children])
        obj_vals = np.concatenate([obj_vals[~dominating], child_vals])
        max_vertices = max(max_vertices, len(verts))

    gap = (upper_trace[-1] - lower_trace[-1]) if upper_trace else math.inf
    raise ConvergenceError(
        f"polyblock loop hit the {max_iterations}-iteration cap with bound gap {gap:.3e}",
        bound_gap=gap,
    )

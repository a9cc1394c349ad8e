"""Bracketed scalar root finding used by both solver backends.

Plain bisection is deliberate: the solved equations are monotone in every
bracket we hand over, iteration counts are exactly predictable, and the
result is bit-reproducible across platforms.
"""

import math
from typing import Callable

from .errors import ConvergenceError

MAX_DOUBLINGS = 200


class IterationCounter:
    """Mutable tally of inner-loop work, aggregated into solver reports."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += n


def bisect(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-12,
    counter: IterationCounter | None = None,
) -> float:
    """Root of ``fn`` on [lo, hi] with fn(lo) and fn(hi) of opposite sign.

    Stops when the bracket width falls below ``rel_tol`` relative to the
    midpoint magnitude. Returns the midpoint of the final bracket.
    """
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]")
    iters = 0
    # width halves every step, so the bound below is exact
    max_iters = 1 + max(0, math.ceil(math.log2(max(abs(hi - lo), 1e-300) / max(rel_tol * min(abs(lo), abs(hi)), 1e-300))))
    max_iters = min(max_iters, 4000)
    while iters < max_iters:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket exhausted at double precision
        f_mid = fn(mid)
        iters += 1
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= rel_tol * abs(0.5 * (lo + hi)):
            break
    if counter is not None:
        counter.add(iters)
    return 0.5 * (lo + hi)


def bisect_log(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-12,
    counter: IterationCounter | None = None,
) -> float:
    """Bisection with geometric midpoints, for positive roots spanning decades."""
    return math.exp(_bisect_log_inner(fn, lo, hi, rel_tol, counter))


def _bisect_log_inner(fn, lo, hi, rel_tol, counter) -> float:
    u_lo, u_hi = math.log(lo), math.log(hi)
    # a relative tolerance on x is an absolute tolerance on log(x)
    abs_tol_u = math.log1p(rel_tol)
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo == 0.0:
        return u_lo
    if f_hi == 0.0:
        return u_hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]")
    iters = 0
    max_iters = min(4000, 1 + max(0, math.ceil(math.log2(max(u_hi - u_lo, 1e-300) / max(abs_tol_u, 1e-300)))))
    while iters < max_iters and u_hi - u_lo > abs_tol_u:
        u_mid = 0.5 * (u_lo + u_hi)
        f_mid = fn(math.exp(u_mid))
        iters += 1
        if f_mid == 0.0:
            u_lo = u_hi = u_mid
            break
        if (f_mid > 0.0) == (f_lo > 0.0):
            u_lo, f_lo = u_mid, f_mid
        else:
            u_hi = u_mid
    if counter is not None:
        counter.add(iters)
    return 0.5 * (u_lo + u_hi)


def grow_until_sign(
    fn: Callable[[float], float],
    start: float,
    factor: float,
    want_positive: bool,
    cap: float | None = None,
    counter: IterationCounter | None = None,
) -> tuple[float, float] | None:
    """Scale ``start`` by ``factor`` until fn changes to the wanted sign.

    Returns (last_before, first_after) straddling the sign change, or None if
    ``cap`` (or the doubling budget) is hit first. ``factor`` may be < 1 to
    search downward.
    """
    x = start
    fx = fn(x)
    if (fx > 0.0) == want_positive and fx != 0.0:
        raise ValueError("start already has the wanted sign")
    for k in range(MAX_DOUBLINGS):
        x_next = x * factor
        if cap is not None:
            if factor > 1.0 and x_next > cap:
                x_next = cap
            elif factor < 1.0 and x_next < cap:
                x_next = cap
        f_next = fn(x_next)
        if counter is not None:
            counter.add(1)
        if f_next == 0.0 or ((f_next > 0.0) == want_positive):
            return (x, x_next)
        if cap is not None and x_next == cap:
            return None
        x, fx = x_next, f_next
    raise ConvergenceError(f"no sign change after {MAX_DOUBLINGS} bracket expansions")

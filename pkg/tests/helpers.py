"""Shared test utilities: oracle grid construction and report checks."""

from secloop.oracle import GridSpec, grid_search_p2


def oracle_grids(scenario, points=2000, power_decades=8.0, bandwidth_decades=5.0):
    """Log grids over the case's two free variables, wide enough that the
    optimum is interior; widened automatically by the caller on edge hits."""
    g = scenario.gains()
    grids = []
    for superior, p_max in (
        (g.g_u > g.g_se, scenario.limits.p_umax),
        (g.g_d > g.g_ce, scenario.limits.p_dmax),
    ):
        if superior:
            grids.append(GridSpec(p_max * 10.0**-power_decades, p_max, points, "log"))
        else:
            b_max = scenario.limits.b_max
            grids.append(GridSpec(b_max * 10.0**-bandwidth_decades, b_max, points, "log"))
    return grids


def run_oracle(scenario, points=2000, power_decades=8.0, bandwidth_decades=5.0, retries=3):
    """Grid search that widens the grids when the argmin hits the low edge,
    so the reported resolution bound is trustworthy."""
    for attempt in range(retries):
        gu, gd = oracle_grids(
            scenario,
            points,
            power_decades + 4.0 * attempt,
            bandwidth_decades + 3.0 * attempt,
        )
        result = grid_search_p2(scenario, gu, gd)
        if 0 not in result.indices:
            return result
    return result


def assert_tight_allocation(report, scenario, rel=1e-6):
    """Constrained solves must pin both the leakage and the time budget."""
    m, a = report.metrics, report.allocation
    d_th = scenario.policy.d_th
    t_total = scenario.limits.t_total
    assert abs(m.leakage_weighted - d_th) <= rel * d_th, (
        f"leakage {m.leakage_weighted} vs budget {d_th}"
    )
    t_sum = a.t_u + m.t_compute + a.t_d
    assert abs(t_sum - t_total) <= rel * t_total, f"cycle time {t_sum} vs {t_total}"

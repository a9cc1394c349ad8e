import numpy as np
import pytest

from secloop.baselines import SeparateLinksConfig, control_oriented_scaled, separate_links
from secloop.dispatch import solve
from secloop.loop import unconstrained_baseline
from secloop.scenario import default_scenario, superior_eavesdropper_scenario


def test_control_oriented_inactive_equals_reference():
    sc = default_scenario().with_value("d_th_bits", 1e5)
    report = control_oriented_scaled(sc)
    alloc, metrics = unconstrained_baseline(sc.gains(), sc.compute, sc.limits)
    assert report.allocation == alloc
    assert report.case.label == "Unconstrained"
    assert report.metrics.cne == pytest.approx(metrics.cne, rel=1e-12)


def test_control_oriented_scales_output_with_leakage():
    sc = default_scenario()
    _, m0 = unconstrained_baseline(sc.gains(), sc.compute, sc.limits)
    report = control_oriented_scaled(sc)
    shrink = sc.policy.d_th / m0.leakage_weighted
    assert report.metrics.leakage_weighted == pytest.approx(sc.policy.d_th, rel=1e-12)
    assert report.metrics.cne == pytest.approx(m0.cne * shrink, rel=1e-12)


def test_control_oriented_linear_in_budget():
    sc = default_scenario()
    budgets = np.arange(50.0, 301.0, 50.0)
    cnes = [
        control_oriented_scaled(sc.with_value("d_th_bits", d)).metrics.cne for d in budgets
    ]
    slope = cnes[0] / budgets[0]
    for d, c in zip(budgets, cnes):
        assert c == pytest.approx(slope * d, rel=1e-9)


def test_separate_links_inactive_equals_reference():
    sc = default_scenario().with_value("d_th_bits", 1e5)
    report = separate_links(sc)
    _, metrics = unconstrained_baseline(sc.gains(), sc.compute, sc.limits)
    assert report.metrics.cne == pytest.approx(metrics.cne, rel=1e-9)


def test_separate_links_leakage_within_budget():
    for sc in (default_scenario(), superior_eavesdropper_scenario()):
        report = separate_links(sc)
        assert report.metrics.leakage_weighted <= sc.policy.d_th + 1e-9


def test_separate_links_ignores_uplink_power_headroom():
    # downlink-bottlenecked: with the study-level budget shares pinned,
    # raising the uplink cap cannot move the output
    base = default_scenario()
    config = SeparateLinksConfig.from_scenario(base)
    values = []
    for p in (0.5, 1.0, 1.5, 2.0):
        report = separate_links(base.with_value("p_umax_watts", p), config)
        values.append(report.metrics.cne)
        m = report.metrics
        assert m.d_d <= base.compute.rho * m.d_u  # downlink is the bottleneck
    spread = (max(values) - min(values)) / min(values)
    assert spread <= 1e-9


def test_vanishing_uplink_share_kills_throughput():
    sc = default_scenario()
    tiny = separate_links(sc, SeparateLinksConfig(leakage_split=1e-7))
    assert tiny.metrics.cne < 1.0


def test_scheme_ordering_on_default_scenarios():
    for sc in (default_scenario(), superior_eavesdropper_scenario()):
        proposed = solve(sc).metrics.cne
        scaled = control_oriented_scaled(sc).metrics.cne
        split = separate_links(sc).metrics.cne
        assert proposed >= scaled - 1e-9 * proposed
        assert proposed >= split - 1e-9 * proposed
        assert scaled >= 0.0


def test_scheme_ordering_strict_when_budget_binds():
    sc = default_scenario()
    proposed = solve(sc).metrics.cne
    scaled = control_oriented_scaled(sc).metrics.cne
    split = separate_links(sc).metrics.cne
    assert proposed > scaled * 1.01
    assert proposed > split * 1.01


def test_split_must_be_interior():
    sc = default_scenario()
    with pytest.raises(Exception):
        separate_links(sc, SeparateLinksConfig(leakage_split=1.5))

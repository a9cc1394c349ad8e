import math

import numpy as np
import pytest

from secloop.channels import Position3
from secloop.dispatch import solve
from secloop.experiments import (
    CSV_COLUMNS,
    MonteCarloSpec,
    SweepSpec,
    csi_to_csv,
    default_eve_region,
    multi_eve_to_csv,
    rows_to_csv,
    run_csi_mc,
    run_eve_scan,
    run_multi_eve,
    run_sweep,
    sample_scenario,
    strongest_eve_gains,
)
from secloop.loop import Allocation, evaluate
from secloop.scenario import default_scenario, eve_scan_scenario


def test_sweep_rows_ordered_and_complete():
    spec = SweepSpec(
        param="b_max_hz", values=(15e3, 20e3), scenario=default_scenario()
    )
    rows = run_sweep(spec)
    assert [(r.swept_value, r.scheme) for r in rows] == [
        (15e3, "proposed"),
        (15e3, "control_oriented"),
        (15e3, "separate_links"),
        (20e3, "proposed"),
        (20e3, "control_oriented"),
        (20e3, "separate_links"),
    ]
    for row in rows:
        assert not math.isnan(row.cne_bits)


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(Exception):
        SweepSpec(param="bogus", values=(1.0,), scenario=default_scenario())


def test_row_output_rederivable_from_allocation():
    sc = default_scenario()
    spec = SweepSpec(param="d_th_bits", values=(250.0, 300.0), scenario=sc)
    for row in run_sweep(spec):
        point = sc.with_value("d_th_bits", row.swept_value)
        alloc = Allocation(
            p_u=row.p_u_w, t_u=row.t_u_s, b_u=row.b_u_hz, f=point.limits.f_max,
            p_d=row.p_d_w, t_d=row.t_d_s, b_d=row.b_d_hz,
        )
        metrics = evaluate(alloc, point.gains(), point.compute)
        assert metrics.cne == pytest.approx(row.cne_bits, rel=1e-9)
        assert metrics.leakage_weighted == pytest.approx(row.leakage_bits, rel=1e-9)


def test_proposed_dominates_baselines_on_sweep():
    spec = SweepSpec(
        param="b_max_hz", values=(14e3, 20e3, 26e3), scenario=default_scenario()
    )
    rows = run_sweep(spec)
    by_value = {}
    for row in rows:
        by_value.setdefault(row.swept_value, {})[row.scheme] = row.cne_bits
    for schemes in by_value.values():
        assert schemes["proposed"] >= schemes["control_oriented"] - 1e-9
        assert schemes["proposed"] >= schemes["separate_links"] - 1e-9


def test_uplink_dominates_time_split():
    # raw sensor data dwarfs command traffic, so uplink time dominates, and
    # wider bandwidth shifts the budget from transmitting to computing
    spec = SweepSpec(
        param="b_max_hz",
        values=(14e3, 18e3, 22e3, 26e3, 30e3),
        scenario=default_scenario(),
        schemes=("proposed",),
    )
    rows = run_sweep(spec)
    transmit = [r.t_u_s + r.t_d_s for r in rows]
    for row in rows:
        assert row.t_u_s > 5 * row.t_d_s
    assert all(a > b for a, b in zip(transmit, transmit[1:]))


def test_eve_scan_symmetric_in_y_sign():
    template = eve_scan_scenario()
    xs = [-800.0, -200.0, 300.0]
    up = run_eve_scan(xs, template)
    from dataclasses import replace

    mirrored = replace(
        template,
        layout=replace(
            template.layout,
            eavesdropper=Position3(
                template.layout.eavesdropper.x, -template.layout.eavesdropper.y, 0.0
            ),
        ),
    )
    down = run_eve_scan(xs, mirrored)
    for a, b in zip(up, down):
        assert a.cne_bits == pytest.approx(b.cne_bits, rel=1e-12)


def test_eve_scan_dips_near_the_hub():
    rows = run_eve_scan(np.arange(-1500.0, 501.0, 200.0), eve_scan_scenario())
    values = [r.cne_bits for r in rows]
    k = int(np.argmin(values))
    assert 0 < k < len(values) - 1  # interior minimum: falls then recovers
    assert all(a >= b for a, b in zip(values[: k + 1], values[1 : k + 1]))
    assert all(a <= b for a, b in zip(values[k:], values[k + 1 :]))


def test_default_region_centered_between_sensor_and_hub():
    sc = default_scenario()
    xmin, xmax, ymin, ymax = default_eve_region(sc)
    assert (xmin + xmax) / 2 == pytest.approx(0.0)
    assert xmax - xmin == pytest.approx(2000.0)
    assert ymax - ymin == pytest.approx(2000.0)


def test_strongest_eve_gains_takes_per_link_max():
    sc = default_scenario()
    spots = [Position3(-400.0, 200.0, 0.0), Position3(450.0, 100.0, 0.0)]
    combined = strongest_eve_gains(sc, spots)
    singles = [strongest_eve_gains(sc, [p]) for p in spots]
    assert combined.g_se == max(s.g_se for s in singles)
    assert combined.g_ce == max(s.g_ce for s in singles)


def test_multi_eve_degenerate_region_has_no_variance():
    sc = default_scenario()
    spec = MonteCarloSpec(
        scenario=sc,
        kind="eve_placement",
        trials=4,
        seed=3,
        k_values=(1,),
        region=(-300.0, -300.0, 400.0, 400.0),
    )
    results = run_multi_eve(spec)
    gains = strongest_eve_gains(sc, [Position3(-300.0, 400.0, 0.0)])
    single = solve(sc, gains=gains).metrics.cne
    assert results[0].mean_cne_bits == pytest.approx(single, rel=1e-12)


def test_multi_eve_single_matches_manual_average():
    sc = default_scenario()
    spec = MonteCarloSpec(
        scenario=sc, kind="eve_placement", trials=6, seed=11, k_values=(1,)
    )
    results = run_multi_eve(spec)
    region = default_eve_region(sc)
    total = 0.0
    from secloop.experiments import _draw_positions

    for trial in range(spec.trials):
        rng = np.random.default_rng([spec.seed, 1, trial])
        spots = _draw_positions(rng, region, sc, 1)
        total += solve(sc, gains=strongest_eve_gains(sc, spots)).metrics.cne
    assert results[0].mean_cne_bits == pytest.approx(total / spec.trials, rel=1e-12)


def test_multi_eve_mean_falls_with_more_eavesdroppers():
    spec = MonteCarloSpec(
        scenario=default_scenario(),
        kind="eve_placement",
        trials=60,
        seed=5,
        k_values=(1, 4),
    )
    results = run_multi_eve(spec)
    assert results[0].mean_cne_bits > results[1].mean_cne_bits
    assert all(r.failures == 0 for r in results)


def test_csi_zero_error_residual_is_conservative():
    spec = MonteCarloSpec(
        scenario=default_scenario(),
        kind="csi_error",
        trials=400,
        seed=9,
        mu_values=(0.0,),
    )
    (result,) = run_csi_mc(spec)
    assert result.mean_residual_bits <= 0.0
    assert result.failures == 0


def test_csi_mean_output_falls_with_uncertainty():
    spec = MonteCarloSpec(
        scenario=default_scenario(),
        kind="csi_error",
        trials=150,
        seed=13,
        mu_values=(0.0, 0.2),
    )
    results = run_csi_mc(spec)
    assert results[0].mean_cne_bits > results[1].mean_cne_bits


def test_monte_carlo_reruns_identically():
    spec = MonteCarloSpec(
        scenario=default_scenario(),
        kind="csi_error",
        trials=40,
        seed=21,
        mu_values=(0.05,),
    )
    assert run_csi_mc(spec) == run_csi_mc(spec)
    spec2 = MonteCarloSpec(
        scenario=default_scenario(), kind="eve_placement", trials=10, seed=2, k_values=(2,)
    )
    assert run_multi_eve(spec2) == run_multi_eve(spec2)


def test_csv_serialization_layout():
    spec = SweepSpec(
        param="d_th_bits", values=(300.0,), scenario=default_scenario(),
        schemes=("proposed",),
    )
    text = rows_to_csv(run_sweep(spec))
    header, line = text.strip().splitlines()
    assert header == ",".join(CSV_COLUMNS)
    assert len(line.split(",")) == len(CSV_COLUMNS)

    mc = MonteCarloSpec(
        scenario=default_scenario(), kind="eve_placement", trials=2, seed=1, k_values=(1,)
    )
    assert multi_eve_to_csv(run_multi_eve(mc)).startswith("k,trials,failures,mean_cne_bits")
    mc2 = MonteCarloSpec(
        scenario=default_scenario(), kind="csi_error", trials=2, seed=1, mu_values=(0.0,)
    )
    assert csi_to_csv(run_csi_mc(mc2)).startswith(
        "mu,trials,failures,mean_cne_bits,mean_residual_bits"
    )


def test_sample_scenario_produces_requested_cases():
    from secloop.dispatch import classify
    from secloop.loop import unconstrained_baseline

    rng = np.random.default_rng(77)
    for case in ("I", "II", "III", "IV"):
        sc = sample_scenario(rng, case=case)
        assert classify(sc.gains()).label == case
        _, m = unconstrained_baseline(sc.gains(), sc.compute, sc.limits)
        assert m.leakage_weighted > sc.policy.d_th

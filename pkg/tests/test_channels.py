import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secloop.channels import (
    ChannelGains,
    Position3,
    eavesdrop_rate_upper_bound,
    gains_from_geometry,
    n0_from_dbm_per_hz,
    path_loss_gain,
    rate,
    sample_fading_power,
)
from secloop.errors import SecloopError
from secloop.scenario import default_scenario, superior_eavesdropper_scenario

N0_DEFAULT = 10.0**-20.4
LN2 = math.log(2.0)

# frozen with 50-digit arithmetic from the closed forms
SENSOR_HUB_GAIN = 1.4059405940594059406e-10
DEFAULT_SNR = 1765781.5508631701771
DEFAULT_RATE = 415037.5252212189678


def test_reference_distance_gain():
    g = path_loss_gain(Position3(0, 0, 0), Position3(1, 0, 0), 1.42e-4, 2.0)
    assert g == pytest.approx(1.42e-4, rel=1e-15)


def test_sensor_to_hub_gain_value():
    g = path_loss_gain(Position3(-500, 0, 0), Position3(500, 0, 100), 1.42e-4, 2.0)
    assert g == pytest.approx(SENSOR_HUB_GAIN, rel=1e-14)


def test_doubling_distance_quarters_gain():
    near = path_loss_gain(Position3(0, 0, 0), Position3(100, 0, 0), 1.42e-4, 2.0)
    far = path_loss_gain(Position3(0, 0, 0), Position3(200, 0, 0), 1.42e-4, 2.0)
    assert far == pytest.approx(near / 4.0, rel=1e-12)


def test_zero_distance_rejected():
    p = Position3(3.0, 4.0, 5.0)
    with pytest.raises(SecloopError):
        path_loss_gain(p, p, 1.0, 2.0)


@given(
    x=st.floats(-2000, 2000),
    y=st.floats(-2000, 2000),
    z=st.floats(0, 500),
    eta=st.floats(1.5, 4.0),
)
def test_gain_scale_covariance(x, y, z, eta):
    tx = Position3(0.0, 0.0, 0.0)
    rx = Position3(x, y, z)
    d = tx.distance_to(rx)
    if d < 1.0:
        return
    g = path_loss_gain(tx, rx, 1.42e-4, eta)
    assert g * d**eta == pytest.approx(1.42e-4, rel=1e-9)


def test_case1_geometry_orderings():
    sc = default_scenario()
    g = sc.gains()
    assert g.g_u > g.g_se
    assert g.g_d > g.g_ce


def test_superior_eavesdropper_orderings():
    g = superior_eavesdropper_scenario().gains()
    assert g.g_u < g.g_se
    assert g.g_d < g.g_ce


def test_equal_distances_give_equal_gains():
    sc = default_scenario()
    g = sc.gains()
    # robot sits at the sensor position, so both air links are symmetric
    assert g.g_u == g.g_d


def test_n0_conversion():
    assert n0_from_dbm_per_hz(-174.0) == pytest.approx(10.0**-20.4, rel=1e-12)
    assert n0_from_dbm_per_hz(30.0) == pytest.approx(1.0, rel=1e-12)


def test_rate_zero_power():
    assert rate(0.0, 20e3, 1e-10, N0_DEFAULT) == 0.0


def test_rate_known_value():
    r = rate(1.0, 20e3, SENSOR_HUB_GAIN, N0_DEFAULT)
    assert r == pytest.approx(DEFAULT_RATE, rel=1e-12)
    assert 1.0 * SENSOR_HUB_GAIN / (20e3 * N0_DEFAULT) == pytest.approx(DEFAULT_SNR, rel=1e-12)


def test_rate_monotone_in_power_and_bandwidth():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = 10.0 ** rng.uniform(-6, 1)
        b = 10.0 ** rng.uniform(2, 5)
        g = 10.0 ** rng.uniform(-15, -9)
        r = rate(p, b, g, N0_DEFAULT)
        assert rate(p * 1.01, b, g, N0_DEFAULT) > r
        assert rate(p, b * 1.01, g, N0_DEFAULT) > r


def test_rate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        rate(1.0, 0.0, 1e-10, N0_DEFAULT)
    with pytest.raises(ValueError):
        rate(1.0, -5.0, 1e-10, N0_DEFAULT)
    with pytest.raises(ValueError):
        rate(-1.0, 1e3, 1e-10, N0_DEFAULT)


def test_rate_power_derivative_matches_finite_difference():
    rng = np.random.default_rng(21)
    for _ in range(120):
        p = 10.0 ** rng.uniform(-6, 1)
        b = 10.0 ** rng.uniform(2, 5)
        g = 10.0 ** rng.uniform(-15, -9)
        snr = p * g / (b * N0_DEFAULT)
        analytic = g / ((1.0 + snr) * N0_DEFAULT * LN2)
        h = p * 1e-6
        fd = (rate(p + h, b, g, N0_DEFAULT) - rate(p - h, b, g, N0_DEFAULT)) / (2 * h)
        assert fd == pytest.approx(analytic, rel=1e-6)


@given(
    p=st.one_of(st.just(0.0), st.floats(1e-12, 10)),
    b=st.floats(1.0, 1e6),
    g=st.floats(1e-16, 1e-8),
)
def test_rate_nonnegative_and_zero_iff_no_power(p, b, g):
    r = rate(p, b, g, N0_DEFAULT)
    assert r >= 0.0
    assert (r == 0.0) == (p == 0.0)


def test_eavesdrop_bound_is_same_closed_form():
    assert eavesdrop_rate_upper_bound(0.7, 15e3, 3e-12, N0_DEFAULT) == rate(
        0.7, 15e3, 3e-12, N0_DEFAULT
    )


def test_vanishing_gain_limit():
    assert rate(1.0, 20e3, 1e-300, N0_DEFAULT) == pytest.approx(0.0, abs=1e-250)


def test_jensen_bound_on_faded_rate():
    rng = np.random.default_rng(1234)
    p, b, g = 1.0, 20e3, 4.4904342774390987e-15
    fades = sample_fading_power(rng, 100_000)
    rates = b * np.log1p(p * fades * g / (b * N0_DEFAULT)) / LN2
    bound = eavesdrop_rate_upper_bound(p, b, g, N0_DEFAULT)
    stderr = rates.std(ddof=1) / math.sqrt(len(rates))
    assert rates.mean() <= bound + 3 * stderr


def test_jensen_gap_shrinks_at_low_snr():
    rng = np.random.default_rng(99)
    fades = sample_fading_power(rng, 200_000)

    def rel_gap(g):
        rates = 20e3 * np.log1p(1.0 * fades * g / (20e3 * N0_DEFAULT)) / LN2
        bound = eavesdrop_rate_upper_bound(1.0, 20e3, g, N0_DEFAULT)
        return (bound - rates.mean()) / bound

    high_snr_gap = rel_gap(1e-11)  # SNR ~ 1e5
    low_snr_gap = rel_gap(1e-19)  # SNR ~ 1e-3
    assert low_snr_gap < high_snr_gap


def test_gains_from_geometry_uses_both_models():
    sc = default_scenario()
    g = sc.gains()
    # ground eavesdropping link follows the steeper exponent
    assert g.g_se == pytest.approx(1.42e-4 * 1000.0**-3.5, rel=1e-12)
    assert g.g_ce == pytest.approx(1.42e-4 / 2.01e6, rel=1e-12)


def test_channel_gains_validation():
    with pytest.raises(ValueError):
        ChannelGains(0.0, 1e-10, 1e-15, 1e-11, 1e-20)
    with pytest.raises(ValueError):
        ChannelGains(1e-10, 1e-10, 1e-15, 1e-11, 0.0)

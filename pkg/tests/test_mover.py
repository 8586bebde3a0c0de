import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from movable_fis.channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    LinkGeometry,
    Polarization,
    PolarizationConfig,
    Scene,
    SignalConfig,
    array_gain,
    received_power,
)
from movable_fis.reflection import Architecture, bdfis_matrix, bdris_optimal, dfis_matrix, dris_optimal
from movable_fis.mover import (
    DEFAULT_BAND,
    FrequencyBand,
    FrequencyChoice,
    Method,
    grid_search_frequency,
    harmonic_frequencies,
    optimal_frequency,
    power_cap,
    power_vs_frequency,
)

V, H = Polarization.VERTICAL, Polarization.HORIZONTAL
F_STAR = SPEED_OF_LIGHT / 0.05


def scene_at(n, d_a, tx, rx, chi, rx_pol=V, f=F_STAR):
    return Scene(ArrayGeometry(n, d_a), tx, rx, SignalConfig.from_frequency(f), PolarizationConfig(chi, V, rx_pol))


def dirichlet(n, d_a, s, freqs):
    """|g_R g_T| from the array factor sum, independent of the package."""
    k = np.arange(1, n // 2 + 1)
    phase = 2 * np.pi * np.outer(freqs / SPEED_OF_LIGHT, k * d_a * s)
    return np.abs(np.exp(1j * phase).sum(axis=1))


def test_closed_form_example_against_dense_oracle():
    n, d_a = 64, 0.05
    tx = rx = LinkGeometry(20.0, math.pi / 6)
    choice = optimal_frequency(ArrayGeometry(n, d_a), tx, rx)
    assert choice.method is Method.CLOSED_FORM
    assert choice.frequency_hz == pytest.approx(5.9958e9, rel=1e-4)
    assert choice.frequency_hz == pytest.approx(F_STAR, rel=1e-12)
    freqs = np.linspace(0.9 * F_STAR, 1.1 * F_STAR, 100_001)
    vals = dirichlet(n, d_a, 1.0, freqs)
    best = freqs[np.argmax(vals)]
    assert abs(best - choice.frequency_hz) <= freqs[1] - freqs[0]
    gain = array_gain(ArrayGeometry(n, d_a), tx, rx, SignalConfig.from_frequency(choice.frequency_hz))
    assert gain == pytest.approx(n / 2, rel=1e-9)


def test_degenerate_geometry_is_any_frequency():
    array = ArrayGeometry(16, 0.03)
    tx, rx = LinkGeometry(5.0, -0.4), LinkGeometry(7.0, 0.4)
    band = FrequencyBand(2e9, 9e9)
    choice = optimal_frequency(array, tx, rx, default_band=band)
    assert choice.method is Method.ANY_FREQUENCY_OPTIMAL and choice.frequency_hz == 2e9
    assert optimal_frequency(array, tx, rx).frequency_hz == DEFAULT_BAND.f_min
    for f in (1.3e9, 7.7e9, 28e9):
        assert array_gain(array, tx, rx, SignalConfig.from_frequency(f)) == pytest.approx(8, rel=1e-9)
    with pytest.raises(ValueError):
        harmonic_frequencies(array, tx, rx, band)


def test_broadside_endfire_example():
    lam0 = 0.01
    array = ArrayGeometry(8, lam0)
    link = LinkGeometry(3.0, math.pi / 2)
    f = optimal_frequency(array, link, link).frequency_hz
    assert SPEED_OF_LIGHT / f == pytest.approx(2 * lam0, rel=1e-12)


def test_optimal_frequency_fills_power_when_polarization_given():
    array = ArrayGeometry(16, 0.05)
    link = LinkGeometry(20.0, math.pi / 6)
    pol = PolarizationConfig(0.2)
    choice = optimal_frequency(array, link, link, polarization=pol)
    assert choice.achieved_power == pytest.approx(1.2**2 * 16**2, rel=1e-9)
    assert choice.bound_fraction == pytest.approx(1.0, rel=1e-9)
    assert optimal_frequency(array, link, link).achieved_power is None


def test_harmonics_examples():
    array = ArrayGeometry(64, 0.05)
    link = LinkGeometry(20.0, math.pi / 6)
    got = harmonic_frequencies(array, link, link, FrequencyBand(5e9, 20e9))
    np.testing.assert_allclose([c.frequency_hz for c in got], [F_STAR, 2 * F_STAR, 3 * F_STAR], rtol=1e-12)
    np.testing.assert_allclose([c.frequency_hz / 1e9 for c in got], [5.9958, 11.9917, 17.9875], atol=1e-4)
    assert [c.method for c in got] == [Method.CLOSED_FORM, Method.HARMONIC, Method.HARMONIC]
    assert harmonic_frequencies(array, link, link, FrequencyBand(1e9, 2e9)) == []
    single = harmonic_frequencies(array, link, link, FrequencyBand(F_STAR, 1.5 * F_STAR))
    assert len(single) == 1 and single[0].frequency_hz == pytest.approx(F_STAR, rel=1e-12)


def test_harmonics_share_power():
    array = ArrayGeometry(32, 0.02)
    tx, rx = LinkGeometry(9.0, 0.3), LinkGeometry(4.0, 0.7)
    pol = PolarizationConfig(0.35, V, H)
    got = harmonic_frequencies(array, tx, rx, FrequencyBand(1e9, 200e9), polarization=pol, theta=bdfis_matrix(32))
    assert len(got) > 3
    ref = got[0].achieved_power
    for c in got:
        assert c.achieved_power == pytest.approx(ref, rel=1e-9)
    assert ref == pytest.approx((1 + 0.35 + 2 * math.sqrt(0.35)) ** 2 * 32**2 / 4, rel=1e-9)


def test_grid_search_straddling_band():
    n, chi = 64, 0.2
    link = LinkGeometry(20.0, math.pi / 6)
    sc = scene_at(n, 0.05, link, link, chi)
    band = FrequencyBand(0.95 * F_STAR, 1.05 * F_STAR, 10_001)
    choice = grid_search_frequency(sc, dfis_matrix(n), band)
    assert choice.method is Method.GRID_SEARCH
    assert abs(choice.frequency_hz - F_STAR) <= band.step
    assert choice.achieved_power == pytest.approx((1 + chi) ** 2 * n**2, rel=5e-3)
    assert choice.bound_fraction <= 1 + 1e-9


def test_grid_search_identity_returns_f_min():
    link = LinkGeometry(20.0, math.pi / 6)
    sc = scene_at(16, 0.05, link, link, 0.3)
    band = FrequencyBand(3e9, 9e9, 501)
    choice = grid_search_frequency(sc, np.eye(16), band)
    assert choice.frequency_hz == 3e9
    assert choice.achieved_power <= 1e-20


def test_grid_search_bdfis_opposite():
    n, chi = 64, 0.4
    link = LinkGeometry(20.0, math.pi / 6)
    sc = scene_at(n, 0.05, link, link, chi, rx_pol=H)
    choice = grid_search_frequency(sc, bdfis_matrix(n), FrequencyBand(5e9, 7e9, 20_001))
    cap = (1 + chi + 2 * math.sqrt(chi)) ** 2 * n**2 / 4
    assert choice.achieved_power == pytest.approx(cap, rel=5e-3)
    assert power_cap(sc, Architecture.UNITARY) == pytest.approx(cap, rel=1e-12)


def test_power_vs_frequency_matches_scalar_path(rng):
    link_t, link_r = LinkGeometry(12.0, 0.2), LinkGeometry(6.0, -0.9)
    sc = scene_at(16, 0.04, link_t, link_r, 0.5, rx_pol=H)
    freqs = rng.uniform(1e9, 20e9, 7)
    theta = bdfis_matrix(16)
    vec = power_vs_frequency(sc, theta, freqs)
    scalar = [received_power(sc.with_frequency(f), theta).power for f in freqs]
    np.testing.assert_allclose(vec, scalar, rtol=1e-9)


def test_power_cap_formulas():
    link = LinkGeometry(1.0, 0.1)
    for chi in (0.0, 0.2, 1.0):
        same = scene_at(8, 0.05, link, link, chi)
        opp = scene_at(8, 0.05, link, link, chi, rx_pol=H)
        assert power_cap(same, Architecture.DIAGONAL_UNIT_MODULUS) == pytest.approx((1 + chi) ** 2 * 64)
        assert power_cap(opp, Architecture.DIAGONAL_UNIT_MODULUS) == pytest.approx(4 * chi * 64)
        assert power_cap(same, Architecture.UNITARY) == pytest.approx((1 + chi) ** 2 * 64)
        assert power_cap(opp, Architecture.UNITARY) == pytest.approx((1 + chi + 2 * math.sqrt(chi)) ** 2 * 16)


def test_band_and_choice_validation():
    for args in ((0, 1e9), (2e9, 1e9), (1e9, 1e9), (-1, 1e9)):
        with pytest.raises(ValueError):
            FrequencyBand(*args)
    with pytest.raises(ValueError):
        FrequencyBand(1e9, 2e9, 1)
    with pytest.raises(ValueError):
        FrequencyBand(1e9, 2e9, 2.5)
    b = FrequencyBand(1e9, 2e9, 3)
    np.testing.assert_array_equal(b.grid(), [1e9, 1.5e9, 2e9])
    with pytest.raises(ValueError):
        FrequencyChoice(1e9, Method.GRID_SEARCH, 1.0, 1.01)


angles = st.floats(-1.5, 1.5)


@given(angles, angles, st.floats(0.0, 1.0), st.booleans(), st.sampled_from([8, 16, 32]))
def test_cap_respect(a_t, a_r, chi, same, n):
    tx, rx = LinkGeometry(10.0, a_t), LinkGeometry(3.0, a_r)
    sc = scene_at(n, 0.03, tx, rx, chi, rx_pol=V if same else H)
    for theta in (dfis_matrix(n), bdfis_matrix(n)):
        choice = grid_search_frequency(sc, theta, FrequencyBand(1e9, 30e9, 401))
        assert choice.bound_fraction <= 1 + 1e-9
    for build in (dris_optimal, bdris_optimal):
        theta = build(*sc.channels())
        p = received_power(sc, theta).power
        assert p <= power_cap(sc, theta.architecture) * (1 + 1e-9) + 1e-12


@given(angles, angles, st.floats(0.5, 100.0), st.floats(0.5, 100.0))
def test_distance_invariance(a_t, a_r, d_t, d_r):
    array = ArrayGeometry(16, 0.03)
    pol = PolarizationConfig(0.3, V, H)
    theta = bdfis_matrix(16)
    base = optimal_frequency(array, LinkGeometry(1.0, a_t), LinkGeometry(1.0, a_r), polarization=pol, theta=theta)
    moved = optimal_frequency(array, LinkGeometry(d_t, a_t), LinkGeometry(d_r, a_r), polarization=pol, theta=theta)
    assert moved.achieved_power == pytest.approx(base.achieved_power, rel=1e-9, abs=1e-9)

"""End-to-end acceptance criteria, one test each, at the stated tolerances.

Every test prints a ``[PASS]`` / ``[FAIL]`` line through the ``report``
fixture; the lines are repeated in the pytest terminal summary.
"""

import json
import math
import time

import numpy as np

from movable_fis import cli
from movable_fis.channel import (
    ArrayGeometry,
    LinkGeometry,
    Scene,
    SignalConfig,
    effective_channel,
)
from movable_fis.checks import random_scene
from movable_fis.mover import FrequencyBand, grid_search_frequency, optimal_frequency, power_cap
from movable_fis.reflection import (
    Design,
    bdfis_matrix,
    bdris_optimal,
    dfis_matrix,
    dris_optimal,
)
from movable_fis.stats import (
    ChannelSampler,
    SamplerKind,
    Scenario,
    closed_form_mean,
    gain,
    gain_curve,
    leading_coefficient,
    log_chi_grid,
    mc_mean_power,
)

SAME, OPP = Scenario.SAME_POL, Scenario.OPPOSITE_POL


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def power(scene, theta):
    h_r, h_t = scene.channels()
    return scene.transmit_power * abs(effective_channel(h_r, theta, h_t)) ** 2


def test_1_closed_form_caps(report):
    start = time.perf_counter()
    worst = 0.0
    tx, rx = LinkGeometry(25.0, 0.35), LinkGeometry(8.0, 1.1)
    for n in (8, 64, 256):
        array = ArrayGeometry(n, 0.05)
        f = optimal_frequency(array, tx, rx).frequency_hz
        for chi in (0.0, 0.2, 1.0):
            cases = [
                (SAME, dfis_matrix(n), (1 + chi) ** 2 * n**2),
                (OPP, dfis_matrix(n), 4 * chi * n**2),
                (OPP, bdfis_matrix(n), (1 + chi + 2 * math.sqrt(chi)) ** 2 * n**2 / 4),
            ]
            for scenario, theta, target in cases:
                sc = Scene(array, tx, rx, SignalConfig.from_frequency(f), scenario.polarization(chi))
                got = power(sc, theta)
                err = rel(got, target) if target else got / n**2
                worst = max(worst, err)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    report("1 closed-form FIS caps", ok, f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_2_bdris_attains_bound(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for i in range(500):
        sc = random_scene(rng, 64, chi=rng.uniform(0, 1), scenario=SAME if i % 2 else OPP)
        h_r, h_t = sc.channels()
        got = abs(effective_channel(h_r, bdris_optimal(h_r, h_t), h_t)) ** 2
        a, b = h_r.entries, h_t.entries
        bound = (np.linalg.norm(a) * np.linalg.norm(b) + abs(a @ b)) ** 2
        worst = max(worst, rel(got, bound))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    report("2 BD-RIS attains bound", ok, f"500 scenes, max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_3_monte_carlo_means(report):
    n, chi = 64, 0.2
    sampler = ChannelSampler(SamplerKind.IID_PHASE, seed=42)
    start = time.perf_counter()
    details, ok = [], True
    for design, scenario in ((Design.DRIS, SAME), (Design.DRIS, OPP), (Design.BDRIS, OPP)):
        est = mc_mean_power(design, scenario, n, chi, 100_000, sampler)
        ref = closed_form_mean(design, scenario, n, chi)
        z, gap = est.z_score(ref), rel(est.mean, ref)
        ok &= z <= 3.0 and gap <= 0.02
        details.append(f"{design.value}/{scenario.value} z={z:.2f} gap={gap:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120.0
    report("3 Monte Carlo vs closed-form means", ok, "; ".join(details) + f", {elapsed:.1f} s")
    assert ok


def test_4_gain_curve(report):
    start = time.perf_counter()
    chis = log_chi_grid()
    curve = gain_curve(chis)
    ok = bool(np.all(curve.gains[Design.DFIS] == 4))
    ok &= gain(Design.BDRIS, OPP, 1.0) == 1 and gain(Design.BDFIS, OPP, 1.0) == 4
    for d in (Design.BDRIS, Design.BDFIS):
        ok &= bool(np.all(np.diff(curve.gains[d]) < 0))
    g_bdris, g_bdfis = gain(Design.BDRIS, OPP, 0.01), gain(Design.BDFIS, OPP, 0.01)
    ok &= rel(g_bdris, 25.5025) <= 1e-9 and rel(g_bdfis, 36.6025) <= 1e-9
    # cross-check against the ratio of leading N^2 coefficients
    for chi in (0.01, *chis[::20]):
        base = leading_coefficient(Design.DRIS, OPP, chi)
        for d in (Design.BDRIS, Design.DFIS, Design.BDFIS):
            ok &= rel(gain(d, OPP, chi), leading_coefficient(d, OPP, chi) / base) <= 1e-9
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    report("4 gain curve", ok, f"G_BDRIS(0.01)={g_bdris:.6f}, G_BDFIS(0.01)={g_bdfis:.6f}, {elapsed:.2f} s")
    assert ok


def test_5_frequency_oracle(report):
    rng = np.random.default_rng(5)
    n = 64
    start = time.perf_counter()
    worst_step, worst_cap, worst_deg = 0.0, 0.0, 0.0
    for i in range(50):
        scenario = SAME if i % 2 else OPP
        while True:
            sc = random_scene(rng, n, scenario=scenario)
            if abs(math.sin(sc.tx_link.angle) + math.sin(sc.rx_link.angle)) > 0.05:
                break
        theta = dfis_matrix(n) if scenario is SAME else bdfis_matrix(n)
        f_star = optimal_frequency(sc.array, sc.tx_link, sc.rx_link).frequency_hz
        band = FrequencyBand(0.9 * f_star, 1.1 * f_star, 10_000)
        choice = grid_search_frequency(sc, theta, band)
        cap = power_cap(sc, theta.architecture)
        worst_step = max(worst_step, abs(choice.frequency_hz - f_star) / band.step)
        worst_cap = max(worst_cap, 1 - choice.achieved_power / cap)

        deg = Scene(sc.array, LinkGeometry(3.0, -sc.rx_link.angle), sc.rx_link, sc.signal, sc.polarization)
        for f in rng.uniform(1e9, 30e9, 5):
            worst_deg = max(worst_deg, rel(power(deg.with_frequency(f), theta), cap))
    elapsed = time.perf_counter() - start
    ok = worst_step <= 1.0 and worst_cap <= 0.005 and worst_deg <= 1e-9 and elapsed < 60.0
    report(
        "5 frequency oracle",
        ok,
        f"max offset {worst_step:.2f} steps, max cap shortfall {worst_cap:.1e}, "
        f"degenerate err {worst_deg:.1e}, {elapsed:.1f} s",
    )
    assert ok


def test_6_same_pol_equivalence(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(200):
        sc = random_scene(rng, 64, scenario=SAME)
        h_r, h_t = sc.channels()
        p_d = abs(effective_channel(h_r, dris_optimal(h_r, h_t), h_t)) ** 2
        p_bd = abs(effective_channel(h_r, bdris_optimal(h_r, h_t), h_t)) ** 2
        worst = max(worst, abs(p_bd - p_d) / p_d)
    ok = worst <= 1e-9
    report("6 same-polarization equivalence", ok, f"200 scenes, max rel diff {worst:.2e}")
    assert ok


def test_7_property_suite(report, tmp_path):
    out = tmp_path / "validate.json"
    code = cli.main(["validate", "--out", str(out)])
    checks = {c["name"]: c for c in json.loads(out.read_text())["checks"]}
    n = 16
    ok = code == 0
    ok &= checks["reflection_constraints"]["residual"] <= 1e-10
    ok &= checks["identity_cancellation"]["residual"] <= 1e-12 * n
    ok &= checks["norm_law"]["residual"] <= 1e-9
    ok &= checks["dris_dominance"]["passed"] and checks["bdris_dominance"]["passed"]
    ok &= all(c["passed"] for c in checks.values())
    report("7 property suite (validate)", ok, f"exit {code}, {len(checks)} checks")
    assert ok

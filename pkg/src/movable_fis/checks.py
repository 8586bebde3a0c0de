"""Randomized invariant suite shared by ``movable-fis validate`` and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import stats
from .channel import (
    ArrayGeometry,
    LinkGeometry,
    Polarization,
    PolarizationConfig,
    Role,
    Scene,
    SignalConfig,
    effective_channel,
    steering_vector,
)
from .mover import FrequencyBand, grid_search_frequency, optimal_frequency, power_cap
from .reflection import (
    Architecture,
    Design,
    bdfis_matrix,
    bdris_optimal,
    bdris_power_closed_form,
    dfis_matrix,
    dris_optimal,
    dris_power_closed_form,
    validate,
)
from .stats import Scenario


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "residual": float(self.residual),
            "threshold": float(self.threshold),
            "detail": self.detail,
        }


def _le(name, residual, threshold, detail=""):
    return Check(name, bool(residual <= threshold), float(residual), float(threshold), detail)


def random_scene(
    rng: np.random.Generator,
    n: int = 16,
    chi: float | None = None,
    scenario: Scenario | None = None,
) -> Scene:
    """Random valid scene: angles on [-pi/2, pi/2], 1-30 GHz, random polarizations."""
    chi = rng.uniform(0, 1) if chi is None else chi
    if scenario is None:
        tx = Polarization.VERTICAL if rng.random() < 0.5 else Polarization.HORIZONTAL
        rx = Polarization.VERTICAL if rng.random() < 0.5 else Polarization.HORIZONTAL
        pol = PolarizationConfig(chi, tx, rx)
    else:
        pol = Scenario(scenario).polarization(chi)
    return Scene(
        array=ArrayGeometry(n, rng.uniform(0.005, 0.1)),
        tx_link=LinkGeometry(rng.uniform(1, 200), rng.uniform(-np.pi / 2, np.pi / 2)),
        rx_link=LinkGeometry(rng.uniform(1, 200), rng.uniform(-np.pi / 2, np.pi / 2)),
        signal=SignalConfig.from_frequency(rng.uniform(1e9, 30e9)),
        polarization=pol,
    )


def _steering_pair(scene: Scene):
    g_r = steering_vector(scene.array, scene.rx_link, scene.signal, Role.TO_RECEIVER).entries
    g_t = steering_vector(scene.array, scene.tx_link, scene.signal, Role.FROM_TRANSMITTER).entries
    return g_r, g_t


def _same_pol(scene: Scene) -> bool:
    pol = scene.polarization
    return pol.tx_polarization is pol.rx_polarization


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _random_unitaries(rng, n, count):
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def channel_checks(scenes: list[Scene]) -> list[Check]:
    unit, norm_res, cs, dirichlet, cascade, ident = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    for sc in scenes:
        n, chi = sc.array.num_elements, sc.polarization.chi
        g_r, g_t = _steering_pair(sc)
        h_r, h_t = sc.channels()
        hr, ht = h_r.entries, h_t.entries
        unit = max(unit, np.max(np.abs(np.abs(g_r) - 1)), np.max(np.abs(np.abs(g_t) - 1)))
        target = (1 + chi) * n / 2
        norm_res = max(norm_res, _rel(hr @ hr.conj(), target), _rel(ht @ ht.conj(), target))
        scale = np.linalg.norm(hr) * np.linalg.norm(ht)
        cs = max(cs, (abs(hr @ ht) - scale) / scale)
        dirichlet = max(dirichlet, (abs(g_r @ g_t) - n / 2) / (n / 2))
        factor = (1 + chi) if _same_pol(sc) else 2 * math.sqrt(chi)
        cascade = max(cascade, abs(hr @ ht - factor * (g_r @ g_t)) / (n / 2))
        ident = max(ident, abs(effective_channel(hr, np.eye(n), ht)) / n)
    return [
        _le("steering_unit_modulus", unit, 1e-12),
        _le("norm_law", norm_res, 1e-9),
        _le("cauchy_schwarz", cs, 1e-12),
        _le("dirichlet_bound", dirichlet, 1e-12),
        _le("cascade_identity", cascade, 1e-9, "same: (1+chi) g_R g_T, opposite: 2 sqrt(chi) g_R g_T"),
        _le("identity_cancellation", ident, 1e-12, "|h(Theta=I)| / N"),
    ]


def reflection_checks(scenes: list[Scene], rng: np.random.Generator, competitors: int) -> list[Check]:
    constraint, closed, bd_ge_d, same_eq, phase_inv, dist_inv = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    dom_d, dom_bd = -math.inf, -math.inf
    for sc in scenes:
        n = sc.array.num_elements
        chi = sc.polarization.chi
        h_r, h_t = sc.channels()
        hr, ht = h_r.entries, h_t.entries
        g_r, g_t = _steering_pair(sc)
        d_ris, bd_ris = dris_optimal(hr, ht), bdris_optimal(hr, ht)
        d_fis, bd_fis = dfis_matrix(n), bdfis_matrix(n)
        for theta in (d_ris, bd_ris, d_fis, bd_fis):
            rep = validate(theta)
            res = rep.unitarity_residual
            if theta.architecture is Architecture.DIAGONAL_UNIT_MODULUS:
                res = max(rep.unit_modulus_residual, rep.offdiag_max)
            constraint = max(constraint, res)

        def power(theta, a=hr, b=ht):
            return abs(effective_channel(a, theta, b)) ** 2

        p = {t.origin: power(t) for t in (d_ris, bd_ris, d_fis, bd_fis)}
        cascade = hr @ ht
        gg = abs(g_r @ g_t) ** 2
        closed = max(
            closed,
            _rel(p[Design.DRIS], dris_power_closed_form(hr, ht).power),
            _rel(p[Design.BDRIS], bdris_power_closed_form(hr, ht).power),
            abs(p[Design.DFIS] - 4 * abs(cascade) ** 2) / max(p[Design.BDRIS], 1e-300),
            abs(p[Design.BDFIS] - (1 + math.sqrt(chi)) ** 4 * gg) / max(p[Design.BDRIS], 1e-300),
        )
        bd_ge_d = max(bd_ge_d, (p[Design.DRIS] - p[Design.BDRIS]) / max(p[Design.DRIS], 1e-300))
        if _same_pol(sc):
            same_eq = max(same_eq, _rel(p[Design.BDRIS], p[Design.DRIS]))

        a, b = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        hr2, ht2 = a * hr, b * ht
        rotated = {
            Design.DRIS: power(dris_optimal(hr2, ht2), hr2, ht2),
            Design.BDRIS: power(bdris_optimal(hr2, ht2), hr2, ht2),
            Design.DFIS: power(d_fis, hr2, ht2),
            Design.BDFIS: power(bd_fis, hr2, ht2),
        }
        moved = replace(
            sc,
            tx_link=LinkGeometry(rng.uniform(1, 200), sc.tx_link.angle),
            rx_link=LinkGeometry(rng.uniform(1, 200), sc.rx_link.angle),
        )
        mr, mt = (h.entries for h in moved.channels())
        shifted = {
            Design.DRIS: dris_power_closed_form(mr, mt).power,
            Design.BDRIS: bdris_power_closed_form(mr, mt).power,
            Design.DFIS: power(d_fis, mr, mt),
            Design.BDFIS: power(bd_fis, mr, mt),
        }
        ref = max(p[Design.BDRIS], 1e-300)
        for d in p:
            phase_inv = max(phase_inv, abs(rotated[d] - p[d]) / ref)
            dist_inv = max(dist_inv, abs(shifted[d] - p[d]) / ref)

        # competitors: random diagonal unit-modulus and random unitary matrices
        phis = np.exp(1j * rng.uniform(0, 2 * np.pi, (competitors, n)))
        p_diag = np.abs(phis @ (hr * ht) - cascade) ** 2
        units = _random_unitaries(rng, n, competitors)
        p_unit = np.abs(np.einsum("i,kij,j->k", hr, units, ht) - cascade) ** 2
        dom_d = max(dom_d, (p_diag.max() - p[Design.DRIS]) / max(p[Design.DRIS], 1e-300))
        dom_bd = max(dom_bd, (p_unit.max() - p[Design.BDRIS]) / max(p[Design.BDRIS], 1e-300))
    return [
        _le("reflection_constraints", constraint, 1e-10, "unitarity / diagonal unit-modulus residual"),
        _le("closed_form_agreement", closed, 1e-9),
        _le("bd_ge_d", bd_ge_d, 1e-9),
        _le("same_pol_equivalence", same_eq, 1e-9),
        _le("phase_invariance", phase_inv, 1e-9),
        _le("distance_invariance", dist_inv, 1e-9),
        _le("dris_dominance", dom_d, 1e-9, f"{competitors} random diagonal competitors per scene"),
        _le("bdris_dominance", dom_bd, 1e-9, f"{competitors} random unitary competitors per scene"),
    ]


def frequency_checks(rng: np.random.Generator, n: int, geometries: int, grid_points: int) -> list[Check]:
    step_err, cap_err, degenerate_err = 0.0, 0.0, 0.0
    for i in range(geometries):
        scenario = Scenario.SAME_POL if i % 2 == 0 else Scenario.OPPOSITE_POL
        while True:
            sc = random_scene(rng, n, scenario=scenario)
            if abs(math.sin(sc.tx_link.angle) + math.sin(sc.rx_link.angle)) > 0.05:
                break
        theta = dfis_matrix(n) if scenario is Scenario.SAME_POL else bdfis_matrix(n)
        f_star = optimal_frequency(sc.array, sc.tx_link, sc.rx_link).frequency_hz
        band = FrequencyBand(0.9 * f_star, 1.1 * f_star, grid_points)
        choice = grid_search_frequency(sc, theta, band)
        step_err = max(step_err, abs(choice.frequency_hz - f_star) / band.step)
        cap_err = max(cap_err, 1 - choice.achieved_power / power_cap(sc, theta.architecture))

        deg = replace(sc, tx_link=LinkGeometry(sc.tx_link.distance, -sc.rx_link.angle))
        cap = power_cap(deg, theta.architecture)
        for f in rng.uniform(1e9, 30e9, 3):
            got = abs(effective_channel(theta=theta, **_split(deg.with_frequency(f)))) ** 2
            degenerate_err = max(degenerate_err, _rel(got, cap))
    return [
        _le("frequency_oracle_step", step_err, 1.0, "grid argmax distance to f*, in grid steps"),
        _le("frequency_oracle_power", cap_err, 0.005, "1 - achieved / cap"),
        _le("degenerate_any_frequency", degenerate_err, 1e-9),
    ]


def _split(scene: Scene):
    h_r, h_t = scene.channels()
    return {"h_R": h_r, "h_T": h_t}


def cap_checks(ns=(8, 64, 256), chis=(0.0, 0.2, 1.0)) -> list[Check]:
    worst = 0.0
    for n in ns:
        array = ArrayGeometry(n, 0.05)
        tx, rx = LinkGeometry(30.0, 0.4), LinkGeometry(12.0, 0.7)
        f = optimal_frequency(array, tx, rx).frequency_hz
        for chi in chis:
            for scenario, theta, target in (
                (Scenario.SAME_POL, dfis_matrix(n), (1 + chi) ** 2 * n**2),
                (Scenario.OPPOSITE_POL, dfis_matrix(n), 4 * chi * n**2),
                (Scenario.OPPOSITE_POL, bdfis_matrix(n), (1 + chi + 2 * math.sqrt(chi)) ** 2 * n**2 / 4),
            ):
                sc = Scene(array, tx, rx, SignalConfig.from_frequency(f), scenario.polarization(chi))
                got = abs(effective_channel(theta=theta, **_split(sc))) ** 2
                worst = max(worst, abs(got - target) / max(target, n**2))
    return [_le("fis_caps_at_optimal_frequency", worst, 1e-9)]


def gain_checks(points: int = 50) -> list[Check]:
    opp = Scenario.OPPOSITE_POL
    grid = np.linspace(1 / points, 1, points)
    curve = stats.gain_curve(grid)
    mono = max(float(np.max(np.diff(curve.gains[d]))) for d in (Design.BDRIS, Design.BDFIS))
    dfis_dev = float(np.max(np.abs(curve.gains[Design.DFIS] - 4)))
    ends = max(abs(stats.gain(Design.BDRIS, opp, 1.0) - 1), abs(stats.gain(Design.BDFIS, opp, 1.0) - 4))
    ratio = 0.0
    for chi in grid:
        base = stats.leading_coefficient(Design.DRIS, opp, chi)
        for d in stats.GAIN_DESIGNS:
            ratio = max(ratio, _rel(stats.gain(d, opp, chi), stats.leading_coefficient(d, opp, chi) / base))
    dense = np.linspace(0, 1, 10_001)
    bdfis = (1 + dense + 2 * np.sqrt(dense)) ** 2 / 4
    dominance = float(np.max(np.maximum(4 * dense, (1 + dense) ** 2 / 4) - bdfis))
    algebra = float(np.max(np.abs((1 + dense + 2 * np.sqrt(dense)) - (1 + np.sqrt(dense)) ** 2)))
    return [
        Check("gain_monotone_decreasing", mono < 0, mono, 0.0, "max consecutive difference"),
        _le("gain_dfis_constant", dfis_dev, 0.0),
        _le("gain_endpoints", ends, 1e-12),
        _le("gain_leading_ratio", ratio, 1e-12),
        _le("bdfis_dominance", dominance, 1e-12),
        _le("bdfis_identity_algebra", algebra, 1e-12),
    ]


def theta_check(entries: np.ndarray, architecture: Architecture, name: str = "injected_theta") -> Check:
    rep = validate(entries)
    if architecture is Architecture.DIAGONAL_UNIT_MODULUS:
        res = max(rep.unit_modulus_residual, rep.offdiag_max)
    else:
        res = rep.unitarity_residual
    return _le(name, res, 1e-10, f"claimed {architecture.value}")


def run_invariant_suite(
    seed: int = stats.DEFAULT_SEED,
    n: int = 16,
    scenes: int = 200,
    competitors: int = 100,
    geometries: int = 50,
    grid_points: int = 10_000,
) -> list[Check]:
    rng = np.random.default_rng(seed)
    pool = [random_scene(rng, n) for _ in range(scenes)]
    # make sure the chi = 0 corner is exercised
    pool[0] = random_scene(rng, n, chi=0.0, scenario=Scenario.OPPOSITE_POL)
    pool[1] = random_scene(rng, n, chi=0.0, scenario=Scenario.SAME_POL)
    checks = channel_checks(pool)
    checks += reflection_checks(pool, rng, competitors)
    checks += frequency_checks(rng, n, geometries, grid_points)
    checks += cap_checks()
    checks += gain_checks()
    return checks

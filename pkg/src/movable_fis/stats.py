"""Monte Carlo and closed-form average received powers, and gains over D-RIS.

The closed forms treat ``g_R g_T`` as ``CN(0, N/2)``, so that
``E|g_R g_T| = sqrt(pi N / 8)`` and ``E|g_R g_T|^2 = N / 2``. The
``IID_PHASE`` sampler draws independent uniform phases per element, which is
the ensemble behind that approximation. ``GEOMETRIC`` draws random angles and
path phases and goes through the array model; it is not expected to match
the closed forms.

Trials are split into fixed-size blocks. Block ``i`` draws from
``SeedSequence(seed).spawn(n_blocks)[i]``, so estimates are bit-identical for
any number of worker processes.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    Polarization,
    PolarizationConfig,
    PolarizedChannel,
    Orientation,
    _check_chi,
)
from .reflection import (
    Design,
    bdris_power_batch,
    dris_power_batch,
    fis_design,
    fixed_power_batch,
)

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42
BLOCK_SIZE = 10_000


class Scenario(enum.Enum):
    SAME_POL = "same"
    OPPOSITE_POL = "opposite"

    def polarization(self, chi: float) -> PolarizationConfig:
        rx = Polarization.VERTICAL if self is Scenario.SAME_POL else Polarization.HORIZONTAL
        return PolarizationConfig(chi, Polarization.VERTICAL, rx)


class SamplerKind(enum.Enum):
    IID_PHASE = "iid_phase"
    GEOMETRIC = "geometric"


class FisMode(enum.Enum):
    ALIGNED = "aligned"
    FIXED_FREQUENCY = "fixed_frequency"


@dataclass(frozen=True)
class ChannelSampler:
    kind: SamplerKind = SamplerKind.IID_PHASE
    seed: int = DEFAULT_SEED
    spacing_wavelengths: float = 0.5  # d_A / lambda at the nominal frequency (GEOMETRIC)

    def __post_init__(self):
        object.__setattr__(self, "kind", SamplerKind(self.kind))
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.spacing_wavelengths > 0:
            raise ValueError("spacing_wavelengths must be > 0")


@dataclass(frozen=True)
class MeanPowerEstimate:
    mean: float
    standard_error: float
    trials: int
    design: Design
    scenario: Scenario

    def z_score(self, reference: float) -> float:
        if self.standard_error == 0:
            return 0.0 if self.mean == reference else math.inf
        return abs(self.mean - reference) / self.standard_error


@dataclass(frozen=True)
class GainCurve:
    chi_values: np.ndarray
    gains: dict = field(default_factory=dict)  # Design -> np.ndarray


def _check_n(n: int) -> int:
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"N must be an even integer >= 2, got {n!r}")
    return int(n)


# Sampling ------------------------------------------------------------------


def sample_steering_batch(
    sampler: ChannelSampler, n: int, trials: int, rng: np.random.Generator, aligned: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(g_R, g_T)``, each ``(trials, N/2)``.

    ``aligned`` emulates per-realization frequency re-selection: the cascade
    ``g_R g_T`` becomes fully coherent (``|g_R g_T| = N/2``).
    """
    half = _check_n(n) // 2
    if sampler.kind is SamplerKind.IID_PHASE:
        g_r = np.exp(1j * rng.uniform(0, 2 * np.pi, (trials, half)))
        if aligned:
            g_t = g_r.conj() * np.exp(1j * rng.uniform(0, 2 * np.pi, (trials, 1)))
        else:
            g_t = np.exp(1j * rng.uniform(0, 2 * np.pi, (trials, half)))
        return g_r, g_t

    theta_r = rng.uniform(-np.pi / 2, np.pi / 2, (trials, 1))
    theta_t = rng.uniform(-np.pi / 2, np.pi / 2, (trials, 1))
    phase_r = rng.uniform(0, 2 * np.pi, (trials, 1))
    phase_t = rng.uniform(0, 2 * np.pi, (trials, 1))
    # element positions in nominal wavelengths
    x = (np.arange(1, half + 1) - (n + 1) / 2) * sampler.spacing_wavelengths
    scale = np.ones((trials, 1))
    if aligned:
        s = np.abs(np.sin(theta_r) + np.sin(theta_t))
        ok = s > 1e-12
        # lambda_nominal / lambda*, with lambda* = d_A |sin + sin|
        scale[ok] = 1.0 / (sampler.spacing_wavelengths * s[ok])
    g_r = np.exp(-1j * phase_r + 2j * np.pi * x * scale * np.sin(theta_r))
    g_t = np.exp(-1j * phase_t + 2j * np.pi * x * scale * np.sin(theta_t))
    return g_r, g_t


def _assemble_batch(g_r, g_t, chi: float, scenario: Scenario):
    pol = scenario.polarization(chi)
    p_r, p_t = pol.p_rx, pol.p_tx
    h_r = np.concatenate([p_r[0] * g_r, p_r[1] * g_r], axis=1)
    h_t = np.concatenate([p_t[0] * g_t, p_t[1] * g_t], axis=1)
    return h_r, h_t


def sample_channel_batch(
    sampler: ChannelSampler,
    n: int,
    chi: float,
    scenario: Scenario,
    trials: int,
    rng: np.random.Generator | None = None,
    aligned: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    _check_chi(chi)
    rng = np.random.default_rng(sampler.seed) if rng is None else rng
    g_r, g_t = sample_steering_batch(sampler, n, trials, rng, aligned)
    return _assemble_batch(g_r, g_t, chi, Scenario(scenario))


def sample_channels(
    sampler: ChannelSampler, n: int, chi: float, scenario: Scenario, rng=None
) -> tuple[PolarizedChannel, PolarizedChannel]:
    """One realization ``(h_R, h_T)``; reproducible from ``sampler.seed`` when ``rng`` is None."""
    h_r, h_t = sample_channel_batch(sampler, n, chi, scenario, 1, rng)
    return PolarizedChannel(h_r[0], Orientation.ROW), PolarizedChannel(h_t[0], Orientation.COLUMN)


# Monte Carlo ---------------------------------------------------------------


def _block_powers(design, scenario, n, chi, size, seed_seq, sampler, fis_mode) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    aligned = design.is_fixed and fis_mode is FisMode.ALIGNED
    h_r, h_t = sample_channel_batch(sampler, n, chi, scenario, size, rng, aligned)
    if design is Design.DRIS:
        return dris_power_batch(h_r, h_t)
    if design is Design.BDRIS:
        return bdris_power_batch(h_r, h_t)
    theta = fis_design(design, scenario is Scenario.SAME_POL, n)
    return fixed_power_batch(theta, h_r, h_t)


def mc_mean_power(
    design: Design,
    scenario: Scenario,
    n: int,
    chi: float,
    trials: int = DEFAULT_TRIALS,
    sampler: ChannelSampler | None = None,
    *,
    fis_mode: FisMode = FisMode.ALIGNED,
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> MeanPowerEstimate:
    """Average received power (``P_T = 1``) over sampled channels.

    RIS designs are re-optimized per realization. FIS designs keep their
    fixed matrix; in ``ALIGNED`` mode each realization is taken at its best
    frequency, in ``FIXED_FREQUENCY`` mode at whatever phases were drawn.
    """
    design, scenario, fis_mode = Design(design), Scenario(scenario), FisMode(fis_mode)
    if design is Design.CUSTOM:
        raise ValueError("Monte Carlo needs one of DRIS, BDRIS, DFIS, BDFIS")
    if int(trials) != trials or trials < 100:
        raise ValueError(f"trials must be an integer >= 100, got {trials!r}")
    _check_n(n)
    _check_chi(chi)
    sampler = sampler or ChannelSampler()
    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)
    seeds = np.random.SeedSequence(sampler.seed).spawn(len(sizes))
    args = [(design, scenario, n, chi, sz, ss, sampler, fis_mode) for sz, ss in zip(sizes, seeds)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_block_powers, *zip(*args)))
    else:
        chunks = [_block_powers(*a) for a in args]
    powers = np.concatenate(chunks)
    return MeanPowerEstimate(
        mean=float(powers.mean()),
        standard_error=float(powers.std(ddof=1) / math.sqrt(trials)),
        trials=int(trials),
        design=design,
        scenario=scenario,
    )


# Closed forms --------------------------------------------------------------


def mean_cascade_magnitude(n: int) -> float:
    """``E|g_R g_T| = sqrt(pi N / 8)`` under the CN(0, N/2) approximation."""
    return math.sqrt(math.pi * n / 8)


def bdfis_cap_coefficient(chi: float) -> float:
    return (1 + chi + 2 * math.sqrt(chi)) ** 2 / 4


def closed_form_mean(design: Design, scenario: Scenario, n: int, chi: float) -> float:
    """Average (RIS) or frequency-optimized (FIS) received power at ``P_T = 1``."""
    design, scenario = Design(design), Scenario(scenario)
    n = _check_n(n)
    _check_chi(chi)
    rayleigh = n**2 + math.sqrt(2 * math.pi * n) * n + 2 * n
    if scenario is Scenario.SAME_POL:
        if design in (Design.DRIS, Design.BDRIS):
            return (1 + chi) ** 2 / 4 * rayleigh
        if design in (Design.DFIS, Design.BDFIS):
            return (1 + chi) ** 2 * n**2
    else:
        if design is Design.DRIS:
            return chi * rayleigh
        if design is Design.BDRIS:
            return (
                (1 + chi) ** 2 / 4 * n**2
                + (1 + chi) * math.sqrt(math.pi / 2 * chi * n) * n
                + 2 * chi * n
            )
        if design is Design.DFIS:
            return 4 * chi * n**2
        if design is Design.BDFIS:
            return bdfis_cap_coefficient(chi) * n**2
    raise ValueError(f"no closed form for {design.value}")


def leading_coefficient(design: Design, scenario: Scenario, chi: float) -> float:
    """Coefficient of ``N^2`` in :func:`closed_form_mean`."""
    design, scenario = Design(design), Scenario(scenario)
    _check_chi(chi)
    same = scenario is Scenario.SAME_POL
    table = {
        Design.DRIS: (1 + chi) ** 2 / 4 if same else chi,
        Design.BDRIS: (1 + chi) ** 2 / 4,
        Design.DFIS: (1 + chi) ** 2 if same else 4 * chi,
        Design.BDFIS: (1 + chi) ** 2 if same else bdfis_cap_coefficient(chi),
    }
    if design not in table:
        raise ValueError(f"no closed form for {design.value}")
    return table[design]


def gain(design: Design, scenario: Scenario, chi: float) -> float:
    """Large-N gain of ``design`` over D-RIS.

    Opposite polarization at ``chi = 0`` gives ``math.inf`` for BD-RIS and
    BD-FIS (D-RIS collects nothing there).
    """
    design, scenario = Design(design), Scenario(scenario)
    _check_chi(chi)
    if design is Design.DRIS:
        return 1.0
    if design is Design.DFIS:
        return 4.0
    if scenario is Scenario.SAME_POL:
        if design is Design.BDRIS:
            return 1.0
        if design is Design.BDFIS:
            return 4.0
    else:
        if chi == 0 and design in (Design.BDRIS, Design.BDFIS):
            return math.inf
        if design is Design.BDRIS:
            return (1 + chi) ** 2 / (4 * chi)
        if design is Design.BDFIS:
            return (1 + chi + 2 * math.sqrt(chi)) ** 2 / (4 * chi)
    raise ValueError(f"no gain defined for {design.value}")


GAIN_DESIGNS = (Design.BDRIS, Design.DFIS, Design.BDFIS)


def gain_curve(chi_values, scenario: Scenario = Scenario.OPPOSITE_POL) -> GainCurve:
    chis = np.asarray(chi_values, dtype=float)
    if np.any(chis <= 0) or np.any(chis > 1):
        raise ValueError("chi values must lie in (0, 1]")
    gains = {d: np.array([gain(d, scenario, c) for c in chis]) for d in GAIN_DESIGNS}
    return GainCurve(chis, gains)


def log_chi_grid(lo: float = 1e-3, hi: float = 1.0, points: int = 200) -> np.ndarray:
    if not 0 < lo < hi <= 1 or points < 2:
        raise ValueError(f"invalid chi grid {lo}:{hi}:{points}")
    return np.logspace(math.log10(lo), math.log10(hi), points)

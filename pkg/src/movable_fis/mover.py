"""Carrier-frequency selection for movable signals over a fixed surface.

With ``Theta`` fixed, the received power depends on frequency only through
``|g_R g_T|``, a Dirichlet kernel in ``d_A (sin theta_R + sin theta_T) / lambda``.
It peaks at ``N/2`` when that quantity is an integer ``k``; ``k = 1`` gives
``f* = c / (d_A |sin theta_R + sin theta_T|)`` and every ``k f*`` is a harmonic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    LinkGeometry,
    PolarizationConfig,
    Scene,
    SignalConfig,
    array_gain,
    _as_matrix,
)
from .reflection import Architecture, dfis_matrix, fixed_power_batch, validate

DEGENERATE_TOL = 1e-12
TIE_TOL = 1e-12


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    HARMONIC = "harmonic"
    GRID_SEARCH = "grid_search"
    ANY_FREQUENCY_OPTIMAL = "any_frequency_optimal"


@dataclass(frozen=True)
class FrequencyBand:
    f_min: float
    f_max: float
    grid_points: int = 10_001

    def __post_init__(self):
        if not 0 < self.f_min < self.f_max:
            raise ValueError(f"band needs 0 < f_min < f_max, got [{self.f_min}, {self.f_max}]")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ValueError(f"grid_points must be an integer >= 2, got {self.grid_points!r}")
        object.__setattr__(self, "grid_points", int(self.grid_points))

    def grid(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.grid_points)

    @property
    def step(self) -> float:
        return (self.f_max - self.f_min) / (self.grid_points - 1)

    def contains(self, f: float, rtol: float = 1e-12) -> bool:
        return self.f_min * (1 - rtol) <= f <= self.f_max * (1 + rtol)


DEFAULT_BAND = FrequencyBand(1e9, 30e9)


@dataclass(frozen=True)
class FrequencyChoice:
    frequency_hz: float
    method: Method
    achieved_power: float | None = None
    bound_fraction: float | None = None

    def __post_init__(self):
        if self.bound_fraction is not None and self.bound_fraction > 1 + 1e-9:
            raise ValueError(f"bound_fraction {self.bound_fraction} exceeds 1")


def power_cap(scene: Scene, architecture: Architecture) -> float:
    """Largest power any frequency can give for the scene's polarizations.

    Uses ``|g_R g_T| <= N/2``. Diagonal: ``(p_R . p_T)^2 N^2``; unitary:
    ``(|p_R| |p_T| + p_R . p_T)^2 N^2 / 4`` (times ``P_T``).
    """
    p_r, p_t = scene.polarization.p_rx, scene.polarization.p_tx
    n = scene.array.num_elements
    dot = float(p_r @ p_t)
    if Architecture(architecture) is Architecture.DIAGONAL_UNIT_MODULUS:
        amp = dot * n
    else:
        amp = (np.linalg.norm(p_r) * np.linalg.norm(p_t) + dot) * n / 2
    return scene.transmit_power * amp**2


def _architecture_of(theta) -> Architecture:
    arch = getattr(theta, "architecture", None)
    if arch is not None:
        return arch
    report = validate(theta)
    return Architecture.DIAGONAL_UNIT_MODULUS if report.diagonal_ok else Architecture.UNITARY


def _angle_sum(tx: LinkGeometry, rx: LinkGeometry) -> float:
    return math.sin(rx.angle) + math.sin(tx.angle)


def is_degenerate(tx: LinkGeometry, rx: LinkGeometry) -> bool:
    return abs(_angle_sum(tx, rx)) <= DEGENERATE_TOL


def power_vs_frequency(scene: Scene, theta, frequencies) -> np.ndarray:
    """Received power with fixed ``theta`` at each frequency (vectorized)."""
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    wavelength = SPEED_OF_LIGHT / freqs
    pos = scene.array.positions()

    def steering(link):
        path = link.distance - pos * math.sin(link.angle)
        return np.exp(-2j * np.pi * path[None, :] / wavelength[:, None])

    g_r, g_t = steering(scene.rx_link), steering(scene.tx_link)
    p_r, p_t = scene.polarization.p_rx, scene.polarization.p_tx
    h_r = np.concatenate([p_r[0] * g_r, p_r[1] * g_r], axis=1)
    h_t = np.concatenate([p_t[0] * g_t, p_t[1] * g_t], axis=1)
    return scene.transmit_power * fixed_power_batch(_as_matrix(theta), h_r, h_t)


def _evaluate(scene: Scene | None, theta, frequency: float):
    if scene is None:
        return None, None
    power = float(power_vs_frequency(scene, theta, [frequency])[0])
    cap = power_cap(scene, _architecture_of(theta))
    return power, (power / cap if cap > 0 else 0.0)


def _scene_for(array, tx, rx, polarization, transmit_power):
    if polarization is None:
        return None
    # wavelength is a placeholder, every evaluation supplies its own frequency
    return Scene(array, tx, rx, SignalConfig(1.0), polarization, transmit_power)


def optimal_frequency(
    array: ArrayGeometry,
    tx: LinkGeometry,
    rx: LinkGeometry,
    *,
    polarization: PolarizationConfig | None = None,
    theta=None,
    transmit_power: float = 1.0,
    default_band: FrequencyBand = DEFAULT_BAND,
) -> FrequencyChoice:
    """Frequency that makes ``|g_R g_T| = N/2``.

    When ``sin theta_R + sin theta_T = 0`` every frequency is optimal and the
    result carries ``default_band.f_min`` as a sentinel. Power and bound
    fraction are filled in when ``polarization`` is given (``theta``
    defaults to ``-I``).
    """
    s = _angle_sum(tx, rx)
    if abs(s) <= DEGENERATE_TOL:
        f, method = default_band.f_min, Method.ANY_FREQUENCY_OPTIMAL
    else:
        f, method = SPEED_OF_LIGHT / (array.element_spacing * abs(s)), Method.CLOSED_FORM
    if theta is None:
        theta = dfis_matrix(array.num_elements)
    power, frac = _evaluate(_scene_for(array, tx, rx, polarization, transmit_power), theta, f)
    return FrequencyChoice(f, method, power, frac)


def harmonic_frequencies(
    array: ArrayGeometry,
    tx: LinkGeometry,
    rx: LinkGeometry,
    band: FrequencyBand,
    *,
    polarization: PolarizationConfig | None = None,
    theta=None,
    transmit_power: float = 1.0,
) -> list[FrequencyChoice]:
    """All in-band multiples ``k f*`` (ascending); empty if none fits."""
    if is_degenerate(tx, rx):
        raise ValueError("harmonics are undefined when sin(theta_R) + sin(theta_T) = 0")
    f_star = optimal_frequency(array, tx, rx).frequency_hz
    k_lo = max(1, math.ceil(band.f_min / f_star * (1 - 1e-12)))
    k_hi = math.floor(band.f_max / f_star * (1 + 1e-12))
    if theta is None:
        theta = dfis_matrix(array.num_elements)
    scene = _scene_for(array, tx, rx, polarization, transmit_power)
    half = array.half
    out = []
    for k in range(k_lo, k_hi + 1):
        f = k * f_star
        gain = array_gain(array, tx, rx, SignalConfig.from_frequency(f))
        if abs(gain - half) > 1e-9 * half:
            raise RuntimeError(f"harmonic {k} at {f:.6g} Hz gives |g_R g_T| = {gain}, expected {half}")
        power, frac = _evaluate(scene, theta, f)
        out.append(FrequencyChoice(f, Method.CLOSED_FORM if k == 1 else Method.HARMONIC, power, frac))
    return out


def grid_search_frequency(scene: Scene, theta, band: FrequencyBand) -> FrequencyChoice:
    """Exhaustive search over ``band.grid()``; the scene's own wavelength is ignored.

    Powers within ``1e-12`` of the architecture cap from the maximum count as
    ties and resolve to the lowest frequency.
    """
    freqs = band.grid()
    powers = power_vs_frequency(scene, theta, freqs)
    cap = power_cap(scene, _architecture_of(theta))
    best = powers.max()
    idx = int(np.flatnonzero(powers >= best - TIE_TOL * max(cap, best))[0])
    frac = float(powers[idx] / cap) if cap > 0 else 0.0
    return FrequencyChoice(float(freqs[idx]), Method.GRID_SEARCH, float(powers[idx]), frac)

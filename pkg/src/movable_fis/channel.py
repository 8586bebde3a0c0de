"""Dual-polarized line-of-sight channels for a surface-aided SISO link.

The surface is a uniform linear array of ``N`` dual-polarized elements. The
first ``N/2`` entries of every channel vector belong to the vertically
polarized ports, the last ``N/2`` to the horizontally polarized ports.
Element index ``n`` is 1-based in the phase formula and 0-based in storage,
so ``entries[i]`` holds element ``n = i + 1``.

The received channel includes the specular (structural scattering) term::

    h = h_R @ Theta @ h_T - h_R @ h_T
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
"Speed of light in vacuum, m/s."


class Polarization(enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


class Side(enum.Enum):
    TX = "tx"
    RX = "rx"


class Role(enum.Enum):
    TO_RECEIVER = "to_receiver"
    FROM_TRANSMITTER = "from_transmitter"


class Orientation(enum.Enum):
    ROW = "row"
    COLUMN = "column"


class PowerSource(enum.Enum):
    CLOSED_FORM = "closed_form"
    EVALUATED = "evaluated"
    MONTE_CARLO_MEAN = "monte_carlo_mean"


@dataclass(frozen=True)
class ArrayGeometry:
    num_elements: int
    element_spacing: float

    def __post_init__(self):
        n = self.num_elements
        if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
            raise ValueError(f"num_elements must be an even integer >= 2, got {n!r}")
        object.__setattr__(self, "num_elements", int(n))
        if not self.element_spacing > 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing!r}")

    @property
    def half(self) -> int:
        return self.num_elements // 2

    def positions(self) -> np.ndarray:
        """x coordinates ``(n - (N+1)/2) * d_A`` for the ``N/2`` steering entries."""
        n = np.arange(1, self.half + 1)
        return (n - (self.num_elements + 1) / 2) * self.element_spacing


@dataclass(frozen=True)
class LinkGeometry:
    distance: float
    angle: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"distance must be > 0, got {self.distance!r}")
        if not -math.pi / 2 <= self.angle <= math.pi / 2:
            raise ValueError(f"angle must lie in [-pi/2, pi/2], got {self.angle!r}")


@dataclass(frozen=True)
class SignalConfig:
    wavelength: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength!r}")

    @classmethod
    def from_frequency(cls, frequency: float) -> SignalConfig:
        if not frequency > 0:
            raise ValueError(f"frequency must be > 0, got {frequency!r}")
        return cls(SPEED_OF_LIGHT / frequency)

    @property
    def frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength


@dataclass(frozen=True)
class PolarizationConfig:
    chi: float
    tx_polarization: Polarization = Polarization.VERTICAL
    rx_polarization: Polarization = Polarization.VERTICAL

    def __post_init__(self):
        _check_chi(self.chi)
        object.__setattr__(self, "tx_polarization", Polarization(self.tx_polarization))
        object.__setattr__(self, "rx_polarization", Polarization(self.rx_polarization))

    @property
    def p_rx(self) -> np.ndarray:
        return polarization_vector(self.rx_polarization, self.chi, Side.RX)

    @property
    def p_tx(self) -> np.ndarray:
        return polarization_vector(self.tx_polarization, self.chi, Side.TX)


@dataclass(frozen=True)
class SteeringVector:
    entries: np.ndarray
    role: Role

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex).ravel()
        if entries.size == 0:
            raise ValueError("steering vector must not be empty")
        if np.max(np.abs(np.abs(entries) - 1.0)) > 1e-12:
            raise ValueError("steering vector entries must have unit modulus")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return self.entries.size


@dataclass(frozen=True)
class PolarizedChannel:
    """Channel vector ``p kron g`` between the surface and one terminal.

    ``orientation`` is ``ROW`` for ``h_R`` (1 x N) and ``COLUMN`` for ``h_T``
    (N x 1). Entries are stored flat either way.
    """

    entries: np.ndarray
    orientation: Orientation

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex).ravel()
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    def __len__(self):
        return self.entries.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class PowerResult:
    power: float
    source: PowerSource
    theta_origin: Any = None
    frequency_hz: float | None = None

    def __post_init__(self):
        if not self.power >= 0:
            raise ValueError(f"power must be nonnegative, got {self.power!r}")


@dataclass(frozen=True)
class Scene:
    array: ArrayGeometry
    tx_link: LinkGeometry
    rx_link: LinkGeometry
    signal: SignalConfig
    polarization: PolarizationConfig
    transmit_power: float = 1.0

    def __post_init__(self):
        if not self.transmit_power > 0:
            raise ValueError(f"transmit_power must be > 0, got {self.transmit_power!r}")

    @property
    def frequency(self) -> float:
        return self.signal.frequency

    def with_frequency(self, frequency: float) -> Scene:
        return replace(self, signal=SignalConfig.from_frequency(frequency))

    def channels(self) -> tuple[PolarizedChannel, PolarizedChannel]:
        """Return ``(h_R, h_T)`` for this scene."""
        g_r = steering_vector(self.array, self.rx_link, self.signal, Role.TO_RECEIVER)
        g_t = steering_vector(self.array, self.tx_link, self.signal, Role.FROM_TRANSMITTER)
        h_r = assemble_channel(self.polarization.p_rx, g_r)
        h_t = assemble_channel(self.polarization.p_tx, g_t)
        return h_r, h_t


def _check_chi(chi: float) -> None:
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi must lie in [0, 1], got {chi!r}")


def steering_vector(
    array: ArrayGeometry, link: LinkGeometry, signal: SignalConfig, role: Role
) -> SteeringVector:
    """Far-field LOS steering vector of length ``N/2``.

    Entry ``n`` is ``exp(-j 2 pi / lambda * (d - x_n sin(theta)))`` with
    ``x_n = (n - (N+1)/2) d_A``.
    """
    path = link.distance - array.positions() * math.sin(link.angle)
    return SteeringVector(np.exp(-2j * np.pi * path / signal.wavelength), Role(role))


def polarization_vector(pol: Polarization, chi: float, side: Side) -> np.ndarray:
    """Polarization weights ``[1, sqrt(chi)]`` (vertical) or ``[sqrt(chi), 1]`` (horizontal).

    The same 2-vector serves as the row ``p_R`` and the column ``p_T``.
    """
    _check_chi(chi)
    Side(side)
    leak = math.sqrt(chi)
    if Polarization(pol) is Polarization.VERTICAL:
        return np.array([1.0, leak])
    return np.array([leak, 1.0])


def assemble_channel(p, g: SteeringVector | np.ndarray, orientation: Orientation | None = None):
    """Kronecker product ``p kron g``.

    The orientation follows the steering vector's role unless given.
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size != 2:
        raise ValueError(f"polarization vector must have 2 entries, got {p.size}")
    if isinstance(g, SteeringVector):
        if orientation is None:
            orientation = Orientation.ROW if g.role is Role.TO_RECEIVER else Orientation.COLUMN
        g = g.entries
    g = np.asarray(g, dtype=complex).ravel()
    return PolarizedChannel(np.kron(p, g), orientation or Orientation.ROW)


def _as_vector(h) -> np.ndarray:
    return h.entries if isinstance(h, PolarizedChannel) else np.asarray(h, dtype=complex).ravel()


def _as_matrix(theta) -> np.ndarray:
    return np.asarray(getattr(theta, "entries", theta), dtype=complex)


def effective_channel(h_R, theta, h_T) -> complex:
    """Cascaded channel ``h_R Theta h_T - h_R h_T``."""
    h_r, h_t = _as_vector(h_R), _as_vector(h_T)
    mat = _as_matrix(theta)
    n = h_r.size
    if h_t.size != n or mat.shape != (n, n):
        raise ValueError(
            f"dimension mismatch: h_R has {n}, h_T has {h_t.size}, Theta is {mat.shape}"
        )
    return complex(h_r @ mat @ h_t - h_r @ h_t)


def received_power(scene: Scene, theta) -> PowerResult:
    h_r, h_t = scene.channels()
    h = effective_channel(h_r, theta, h_t)
    return PowerResult(
        power=scene.transmit_power * abs(h) ** 2,
        source=PowerSource.EVALUATED,
        theta_origin=getattr(theta, "origin", None),
        frequency_hz=scene.frequency,
    )


def array_gain(array: ArrayGeometry, tx: LinkGeometry, rx: LinkGeometry, signal: SignalConfig) -> float:
    """``|g_R g_T|``, at most ``N/2``."""
    g_r = steering_vector(array, rx, signal, Role.TO_RECEIVER).entries
    g_t = steering_vector(array, tx, signal, Role.FROM_TRANSMITTER).entries
    return abs(g_r @ g_t)


# Scene JSON ---------------------------------------------------------------

SCENE_FIELDS = (
    "num_elements",
    "element_spacing_m",
    "tx",
    "rx",
    "wavelength_m",
    "chi",
    "tx_polarization",
    "rx_polarization",
    "transmit_power_w",
)
_LINK_FIELDS = ("distance_m", "angle_rad")


def scene_to_dict(scene: Scene) -> dict:
    return {
        "num_elements": scene.array.num_elements,
        "element_spacing_m": scene.array.element_spacing,
        "tx": {"distance_m": scene.tx_link.distance, "angle_rad": scene.tx_link.angle},
        "rx": {"distance_m": scene.rx_link.distance, "angle_rad": scene.rx_link.angle},
        "wavelength_m": scene.signal.wavelength,
        "chi": scene.polarization.chi,
        "tx_polarization": scene.polarization.tx_polarization.value,
        "rx_polarization": scene.polarization.rx_polarization.value,
        "transmit_power_w": scene.transmit_power,
    }


def _link_from_dict(data: Any, name: str) -> LinkGeometry:
    if not isinstance(data, Mapping):
        raise ValueError(f"{name}: expected an object with {list(_LINK_FIELDS)}")
    unknown = set(data) - set(_LINK_FIELDS)
    if unknown:
        raise ValueError(f"{name}: unknown field(s) {sorted(unknown)}")
    missing = [k for k in _LINK_FIELDS if k not in data]
    if missing:
        raise ValueError(f"{name}: missing field(s) {missing}")
    return LinkGeometry(float(data["distance_m"]), float(data["angle_rad"]))


def scene_from_dict(data: Mapping[str, Any]) -> Scene:
    """Strict parse: unknown fields are rejected; ``transmit_power_w`` defaults to 1."""
    unknown = set(data) - set(SCENE_FIELDS)
    if unknown:
        raise ValueError(f"unknown scene field(s) {sorted(unknown)}")
    missing = [k for k in SCENE_FIELDS if k not in data and k != "transmit_power_w"]
    if missing:
        raise ValueError(f"missing scene field(s) {missing}")
    try:
        pol = PolarizationConfig(
            float(data["chi"]),
            Polarization(str(data["tx_polarization"]).lower()),
            Polarization(str(data["rx_polarization"]).lower()),
        )
    except ValueError as exc:
        raise ValueError(f"polarization: {exc}") from None
    return Scene(
        array=ArrayGeometry(data["num_elements"], float(data["element_spacing_m"])),
        tx_link=_link_from_dict(data["tx"], "tx"),
        rx_link=_link_from_dict(data["rx"], "rx"),
        signal=SignalConfig(float(data["wavelength_m"])),
        polarization=pol,
        transmit_power=float(data.get("transmit_power_w", 1.0)),
    )

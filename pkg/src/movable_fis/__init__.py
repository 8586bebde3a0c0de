"""Received-power models for dual-polarized reconfigurable and fixed surfaces.

Modules: ``channel`` (steering vectors, polarized channels, received power),
``reflection`` (optimal and fixed reflection matrices), ``mover`` (carrier
frequency selection), ``stats`` (Monte Carlo means, closed forms, gains) and
``cli`` (experiment harness).
"""

from .channel import (
    ArrayGeometry,
    LinkGeometry,
    Polarization,
    PolarizationConfig,
    Scene,
    SignalConfig,
    effective_channel,
    received_power,
    steering_vector,
)
from .mover import FrequencyBand, grid_search_frequency, harmonic_frequencies, optimal_frequency
from .reflection import (
    Architecture,
    Design,
    ReflectionMatrix,
    bdfis_matrix,
    bdris_optimal,
    dfis_matrix,
    dris_optimal,
    validate,
)
from .stats import ChannelSampler, Scenario, closed_form_mean, gain, mc_mean_power

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "LinkGeometry",
    "Polarization",
    "PolarizationConfig",
    "Scene",
    "SignalConfig",
    "effective_channel",
    "received_power",
    "steering_vector",
    "FrequencyBand",
    "grid_search_frequency",
    "harmonic_frequencies",
    "optimal_frequency",
    "Architecture",
    "Design",
    "ReflectionMatrix",
    "bdfis_matrix",
    "bdris_optimal",
    "dfis_matrix",
    "dris_optimal",
    "validate",
    "ChannelSampler",
    "Scenario",
    "closed_form_mean",
    "gain",
    "mc_mean_power",
]

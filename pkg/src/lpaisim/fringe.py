"""Deterministic phase and population response of the pi/2 - pi - pi/2 sequence.

The three-pulse Mach-Zehnder interferometer accumulates

    dphi = (k g - chirp_rate) T^2 + (phi1 - 2 phi2 + phi3) + scan phase

where k is the effective two-photon wavevector and T the free-evolution time
between pulses. Ramping the Raman difference frequency at chirp_rate = k g
cancels the free-fall Doppler shift and nulls the kinematic term; the chirp
left off turns the population versus T into a chirped sinusoid whose phase
carries g, which is how the gravity extraction works.

Populations follow the usual two-level fringe P = C - (A/2) cos(dphi + phi0),
reducing to (1 - cos dphi)/2 for the ideal A = 1, C = 1/2, phi0 = 0 fringe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import PhysicalParams, pi_pulse_duration
from .errors import ConfigError

# Scale factor of the linear-in-T phase term from the finite pulse duration:
# the sensitivity function of a three-pulse sequence adds tau_pi (1 + 2/pi)
# to the effective interrogation window.
PULSE_SCALE = 1.0 + 2.0 / math.pi


@dataclass(frozen=True)
class PulseSequencePhases:
    """Laser phase imprinted at each pulse, plus the programmable scan offset
    added to the third pulse."""

    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0
    applied_scan_phase: float = 0.0

    @property
    def laser_phase(self) -> float:
        return self.phi1 - 2.0 * self.phi2 + self.phi3 + self.applied_scan_phase


@dataclass(frozen=True)
class FringeModel:
    """Population fringe P = offset - (contrast/2) cos(dphi + phase_origin).

    contrast is peak to peak; offset need not exceed contrast (normalized
    populations may reach 0 or 1 and are clamped downstream).
    """

    contrast: float = 1.0
    offset: float = 0.5
    phase_origin: float = 0.0

    def __post_init__(self):
        if self.contrast < 0:
            raise ConfigError("contrast must be non-negative")


def mz_phase(
    g: float,
    k: float,
    T: float,
    chirp_rate: float = 0.0,
    laser: PulseSequencePhases = PulseSequencePhases(),
) -> float:
    """Total Mach-Zehnder phase (rad) for acceleration g along k.

    Exactly quadratic in T; chirp_rate = k*g reduces it to the laser phases
    alone.
    """
    if T < 0:
        raise ConfigError("interrogation time must be non-negative")
    return (k * g - chirp_rate) * T * T + laser.laser_phase


def transition_probability(dphi, fm: FringeModel = FringeModel()):
    """Fringe population for a total phase dphi; clamped to [0, 1].

    Accepts scalars or arrays.
    """
    p = fm.offset - 0.5 * fm.contrast * np.cos(dphi + fm.phase_origin)
    return np.clip(p, 0.0, 1.0)


def phase_to_accel(dphi: float, k: float, T: float) -> float:
    """Invert the kinematic phase: a = dphi / (k T^2), in m/s^2."""
    if T <= 0:
        raise ConfigError("phase_to_accel requires T > 0")
    if k <= 0:
        raise ConfigError("phase_to_accel requires k > 0")
    return dphi / (k * T * T)


def accel_to_phase(a: float, k: float, T: float) -> float:
    """Kinematic phase for an acceleration a: dphi = a k T^2 (rad)."""
    return a * k * T * T


def doppler_chirp_rate(k: float, g: float) -> float:
    """Frequency ramp rate k*g (rad/s^2) that cancels the free-fall Doppler
    shift of the Raman resonance."""
    return k * g


def exponential_envelope(tau: float) -> Callable[[np.ndarray], np.ndarray]:
    """Contrast decay envelope exp(-T/tau); the usual single-knob model for
    slow contrast loss over the scan."""
    if tau <= 0:
        raise ConfigError("envelope time constant must be positive")

    def env(T):
        return np.exp(-np.asarray(T, dtype=float) / tau)

    return env


def chirped_phase(T, g: float, params: PhysicalParams, phase_origin: float = 0.0):
    """Phase of the uncompensated fringe versus interrogation time:

        theta(T) = phi0 + tau_pi k g (1 + 2/pi) T + k g T^2

    The linear term comes from the finite pulse duration; the quadratic term
    is the kinematic phase.
    """
    T = np.asarray(T, dtype=float)
    k = params.effective_wavevector
    tau_pi = pi_pulse_duration(params.rabi_frequency)
    return phase_origin + tau_pi * k * g * PULSE_SCALE * T + k * g * T * T


def chirped_fringe(
    T,
    g: float,
    params: PhysicalParams,
    fm: FringeModel,
    envelope: Callable | None = None,
    amplitude: float | None = None,
):
    """Population versus interrogation time with the Doppler chirp off:

        P(T) = A0 envelope(T) cos(theta(T)) + C

    with theta from `chirped_phase` (phase origin taken from fm). A0 defaults
    to the cosine amplitude of the fringe model (contrast/2) and C to its
    offset; pass `amplitude` to override A0 directly. Clamped to [0, 1].
    """
    T = np.asarray(T, dtype=float)
    env = envelope(T) if envelope is not None else 1.0
    a0 = amplitude if amplitude is not None else 0.5 * fm.contrast
    theta = chirped_phase(T, g, params, fm.phase_origin)
    return np.clip(a0 * env * np.cos(theta) + fm.offset, 0.0, 1.0)

"""Shared physical constants and cycle-timing construction.

All quantities are SI unless noted. The timing model mirrors the actual
sequencer: every phase of the measurement cycle is generated by a gate array
with a fixed timing resolution (quantum, default 20 ns), so every duration is
a non-negative integer multiple of that quantum. Rounding is always downward,
so a constructed cycle never exceeds the requested one.

Cycle layout, in order:

    cool | prep | pi/2 | T | pi | T | pi/2 | detect1 | detect2 | recapture

The interrogation time T enters twice; the duty cycle is 2T over the full
cycle time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, InfeasibleRateError

# Fundamental constants
HBAR = 1.054571817e-34      # J s
KB = 1.380649e-23           # J/K
MU_B = 9.2740100783e-24     # J/T

# Rb-87 values
RB87_MASS = 1.44316060e-25          # kg
RB87_D2_WAVELENGTH = 780.241e-9     # m
RB87_HYPERFINE_SPLITTING = 6.834682611e9   # Hz
RB87_D2_LINEWIDTH = 2 * math.pi * 6.07e6   # rad/s

DEFAULT_GRAVITY = 9.7916378          # m/s^2, local value
DEFAULT_RABI_FREQUENCY = 2 * math.pi * 161e3   # rad/s, two-photon effective
DEFAULT_QUANTUM = 20e-9              # s, sequencer timing resolution

# Operating envelope used for rate-dependent defaults: the optimized cycles
# run from 50 Hz (duty 0.75) to 330 Hz (duty 0.30), with the non-interrogation
# overhead linear in the cycle period between those anchors.
RATE_LO = 50.0
RATE_HI = 330.0
DUTY_AT_RATE_LO = 0.75
DUTY_AT_RATE_HI = 0.30


@dataclass(frozen=True)
class PhysicalParams:
    """Atom and laser constants for the accelerometer.

    wavelength : single-photon wavelength of the Raman/cooling light (m)
    gravity : local gravitational acceleration g_k (m/s^2)
    atom_mass : kg
    hyperfine_splitting : ground-state splitting (Hz)
    rabi_frequency : effective two-photon Rabi frequency (rad/s)
    natural_linewidth : excited-state linewidth Gamma (rad/s)
    """

    wavelength: float = RB87_D2_WAVELENGTH
    gravity: float = DEFAULT_GRAVITY
    atom_mass: float = RB87_MASS
    hyperfine_splitting: float = RB87_HYPERFINE_SPLITTING
    rabi_frequency: float = DEFAULT_RABI_FREQUENCY
    natural_linewidth: float = RB87_D2_LINEWIDTH

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ConfigError("wavelength must be positive")
        if self.gravity <= 0:
            raise ConfigError("gravity must be positive")
        if self.rabi_frequency <= 0:
            raise ConfigError("rabi_frequency must be positive")
        if self.atom_mass <= 0:
            raise ConfigError("atom_mass must be positive")

    @property
    def effective_wavevector(self) -> float:
        """Two-photon effective wavevector for counter-propagating beams,
        k = 4*pi/wavelength (rad/m). Derived, never stored, so it is exact
        by construction."""
        return 4 * math.pi / self.wavelength

    @property
    def single_photon_wavevector(self) -> float:
        return 2 * math.pi / self.wavelength


def quantize_duration(duration: float, quantum: float = DEFAULT_QUANTUM) -> float:
    """Round a duration down to an integer multiple of the timing quantum.

    Idempotent: ratios within 1e-6 of an integer snap to it (float round-trip
    error on realistic tick counts is orders of magnitude smaller), everything
    else floors.
    """
    if duration < 0:
        raise ConfigError(f"duration must be non-negative, got {duration}")
    if quantum <= 0:
        raise ConfigError("quantum must be positive")
    ratio = duration / quantum
    nearest = round(ratio)
    n = nearest if abs(ratio - nearest) <= 1e-6 else math.floor(ratio)
    return n * quantum


@dataclass(frozen=True)
class CycleOverheads:
    """Non-interrogation windows of one cycle (seconds).

    cool : sub-Doppler (molasses) hold; the trap field is off but the cloud
        is held viscously, so it neither falls nor loads from vapor.
    prep : state preparation (depump to the clock manifold); free fall.
    detect : the two fluorescence readout pulses; free fall.
    recapture : trap back on; re-centers the cloud and loads from vapor.
    """

    cool: float = 0.0
    prep: float = 0.0
    detect: tuple[float, float] = (0.0, 0.0)
    recapture: float = 0.0

    def total(self) -> float:
        return self.cool + self.prep + self.detect[0] + self.detect[1] + self.recapture


@dataclass(frozen=True)
class TimingSequence:
    """Fully resolved, quantized cycle timing.

    Invariants (enforced): every duration is an integer multiple of
    `quantum`; `cycle_time` equals the sum of all phases plus 2 T.
    """

    cool_duration: float
    prep_duration: float
    pulse_durations: tuple[float, float, float]   # (pi/2, pi, pi/2)
    interrogation_T: float
    detect_durations: tuple[float, float]
    recapture_duration: float
    cycle_time: float
    quantum: float = DEFAULT_QUANTUM

    def __post_init__(self):
        for name, value in self._all_durations():
            if value < -1e-18:
                raise ConfigError(f"{name} is negative: {value}")
            n = value / self.quantum
            if abs(n - round(n)) > 1e-6:
                raise ConfigError(
                    f"{name} = {value} is not a multiple of the {self.quantum} s quantum"
                )
        total = (
            self.cool_duration
            + self.prep_duration
            + sum(self.pulse_durations)
            + 2 * self.interrogation_T
            + sum(self.detect_durations)
            + self.recapture_duration
        )
        if abs(total - self.cycle_time) > 0.5 * self.quantum:
            raise ConfigError(
                f"cycle_time {self.cycle_time} does not equal phase sum {total}"
            )

    def _all_durations(self):
        yield "cool_duration", self.cool_duration
        yield "prep_duration", self.prep_duration
        for i, p in enumerate(self.pulse_durations):
            yield f"pulse_durations[{i}]", p
        yield "interrogation_T", self.interrogation_T
        for i, d in enumerate(self.detect_durations):
            yield f"detect_durations[{i}]", d
        yield "recapture_duration", self.recapture_duration

    @property
    def pulse_total(self) -> float:
        return sum(self.pulse_durations)

    @property
    def free_fall_time(self) -> float:
        """Time with the trap and molasses both off: prep, pulses,
        interrogation, and readout. The cloud is in free fall for all of it."""
        return (
            self.prep_duration
            + self.pulse_total
            + 2 * self.interrogation_T
            + sum(self.detect_durations)
        )

    @property
    def duty_cycle(self) -> float:
        """Fraction of the cycle spent accumulating phase, 2T/cycle."""
        return 2 * self.interrogation_T / self.cycle_time


def pi_pulse_duration(rabi_frequency: float) -> float:
    """Duration of a resonant pi pulse, pi/Omega_eff (seconds, unquantized)."""
    if rabi_frequency <= 0:
        raise ConfigError("rabi_frequency must be positive")
    return math.pi / rabi_frequency


def raman_pulse_durations(
    rabi_frequency: float = DEFAULT_RABI_FREQUENCY,
    quantum: float = DEFAULT_QUANTUM,
) -> tuple[float, float, float]:
    """Quantized (pi/2, pi, pi/2) pulse triple for the Mach-Zehnder sequence."""
    tau_pi = pi_pulse_duration(rabi_frequency)
    half = quantize_duration(tau_pi / 2, quantum)
    full = quantize_duration(tau_pi, quantum)
    return (half, full, half)


def build_timing(
    rate: float,
    overheads: CycleOverheads | float,
    quantum: float = DEFAULT_QUANTUM,
    pulse_durations: tuple[float, float, float] | None = None,
    rabi_frequency: float = DEFAULT_RABI_FREQUENCY,
) -> TimingSequence:
    """Construct the quantized cycle for a requested data rate.

    `overheads` may be a CycleOverheads breakdown or a single total (seconds);
    a bare total is booked entirely to the cool window. Pulse durations
    default to the quantized pi/2-pi-pi/2 triple at `rabi_frequency`.

    T is the largest quantum multiple that fits; the sub-quantum slack left
    over after rounding is folded into the recapture hold so the cycle time
    equals the quantized 1/rate exactly. Raises InfeasibleRateError when the
    overheads plus pulses meet or exceed the cycle period.
    """
    if rate <= 0:
        raise InfeasibleRateError(f"rate must be positive, got {rate}")
    if isinstance(overheads, (int, float)):
        overheads = CycleOverheads(cool=float(overheads))
    if pulse_durations is None:
        pulse_durations = raman_pulse_durations(rabi_frequency, quantum)

    cycle = quantize_duration(1.0 / rate, quantum)
    cool = quantize_duration(overheads.cool, quantum)
    prep = quantize_duration(overheads.prep, quantum)
    det = (
        quantize_duration(overheads.detect[0], quantum),
        quantize_duration(overheads.detect[1], quantum),
    )
    recap = quantize_duration(overheads.recapture, quantum)
    pulses = tuple(quantize_duration(p, quantum) for p in pulse_durations)

    fixed = cool + prep + det[0] + det[1] + recap + sum(pulses)
    budget = cycle - fixed
    if budget <= 0.5 * quantum:
        raise InfeasibleRateError(
            f"rate {rate} Hz infeasible: overheads + pulses ({fixed * 1e3:.4f} ms) "
            f"fill the {cycle * 1e3:.4f} ms cycle"
        )
    T = quantize_duration(budget / 2, quantum)
    slack = budget - 2 * T   # 0 or 1 quantum, by construction
    recap = quantize_duration(recap + slack, quantum)

    return TimingSequence(
        cool_duration=cool,
        prep_duration=prep,
        pulse_durations=pulses,
        interrogation_T=T,
        detect_durations=det,
        recapture_duration=recap,
        cycle_time=cycle,
        quantum=quantum,
    )


def duty_cycle(timing: TimingSequence) -> float:
    """Fraction of the cycle spent accumulating interferometric phase, 2T/cycle."""
    return timing.duty_cycle


def default_overhead_total(rate: float) -> float:
    """Total non-interrogation time (overheads + pulses) at a given rate.

    Linear in 1/rate through the two calibrated duty anchors
    (75% at 50 Hz, 30% at 330 Hz). Between and beyond the anchors this is an
    interpolation choice; the true per-rate optimum is hardware-specific and
    can be overridden in the config.
    """
    if rate <= 0:
        raise ConfigError("rate must be positive")
    x1, y1 = 1.0 / RATE_LO, (1.0 - DUTY_AT_RATE_LO) / RATE_LO
    x2, y2 = 1.0 / RATE_HI, (1.0 - DUTY_AT_RATE_HI) / RATE_HI
    slope = (y1 - y2) / (x1 - x2)
    intercept = y1 - slope * x1
    total = intercept + slope / rate
    if total >= 1.0 / rate:
        raise InfeasibleRateError(
            f"rate {rate} Hz leaves no interrogation time in the default envelope"
        )
    return total

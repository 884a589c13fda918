"""Per-shot phase-noise budget and the quantum-projection floor.

The measured shot-to-shot phase noise decomposes into a Raman-beam phase
term, a magnetic term, and an unattributed residual; the three add in
quadrature to the 31.1 mrad/shot budget at the 50 Hz operating point. The
total falls off mildly (and, as modeled here, linearly) with data rate,
about 25% lower at 330 Hz than at 50 Hz. Shot noise is white and Gaussian;
slow disturbances for stability studies come from the optional sinusoidal
injectors rather than from a colored-noise model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import RATE_HI, RATE_LO
from .errors import ConfigError

log = logging.getLogger(__name__)

DEFAULT_RAMAN_NOISE = 0.021      # rad/shot
DEFAULT_MAGNETIC_NOISE = 0.015   # rad/shot
DEFAULT_BUDGET_TOTAL = 0.0311    # rad/shot at the 50 Hz anchor
# Residual chosen so the three components reproduce the budget total exactly.
DEFAULT_RESIDUAL_NOISE = math.sqrt(
    DEFAULT_BUDGET_TOTAL**2 - DEFAULT_RAMAN_NOISE**2 - DEFAULT_MAGNETIC_NOISE**2
)


@dataclass(frozen=True)
class DisturbanceInjector:
    """Deterministic sinusoidal phase disturbance, phase(t) = amplitude *
    sin(2 pi frequency t + phase). Used to reproduce bump features in the
    Allan deviation; off unless configured."""

    frequency: float          # Hz
    amplitude: float          # rad
    phase: float = 0.0        # rad

    def __post_init__(self):
        if self.frequency <= 0:
            raise ConfigError("injector frequency must be positive")
        if self.amplitude < 0:
            raise ConfigError("injector amplitude must be non-negative")


@dataclass(frozen=True)
class NoiseBudget:
    """Independent per-shot phase-noise amplitudes (rad/shot) and the linear
    rate roll-off of their quadrature total.

    rate_rolloff is the fractional reduction of the total from the low to the
    high end of the operating envelope (50 to 330 Hz).
    """

    raman_phase_noise: float = DEFAULT_RAMAN_NOISE
    magnetic_noise: float = DEFAULT_MAGNETIC_NOISE
    residual_noise: float = DEFAULT_RESIDUAL_NOISE
    rate_rolloff: float = 0.25
    injectors: tuple[DisturbanceInjector, ...] = ()

    def __post_init__(self):
        for name in ("raman_phase_noise", "magnetic_noise", "residual_noise"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not 0 <= self.rate_rolloff < 1:
            raise ConfigError("rate_rolloff must be in [0, 1)")


def quadrature_total(budget: NoiseBudget) -> float:
    """Quadrature sum of the attributed sources (Raman + magnetic), rad/shot.
    The unattributed residual is excluded here; see `budget_total`."""
    return math.hypot(budget.raman_phase_noise, budget.magnetic_noise)


def budget_total(budget: NoiseBudget) -> float:
    """Full quadrature total including the residual, rad/shot, at the low-rate
    anchor."""
    return math.sqrt(
        budget.raman_phase_noise**2
        + budget.magnetic_noise**2
        + budget.residual_noise**2
    )


def total_shot_noise(budget: NoiseBudget, rate: float) -> float:
    """Total per-shot phase noise at a data rate (rad/shot).

    Linear in rate between the envelope anchors: the full budget at 50 Hz,
    (1 - rate_rolloff) of it at 330 Hz. Rates outside [50, 330] extrapolate
    on the same line (floored at zero) and are logged as out of envelope.
    """
    if rate <= 0:
        raise ConfigError("rate must be positive")
    if not RATE_LO <= rate <= RATE_HI:
        log.warning(
            "rate %.6g Hz outside the calibrated %g..%g Hz noise envelope; "
            "extrapolating",
            rate, RATE_LO, RATE_HI,
        )
    frac = 1.0 - budget.rate_rolloff * (rate - RATE_LO) / (RATE_HI - RATE_LO)
    return budget_total(budget) * max(frac, 0.0)


def sample_shot_phase_noise(budget: NoiseBudget, rate: float, rng) -> float:
    """One zero-mean Gaussian phase-noise draw (rad) at the given rate.
    Deterministic for a seeded generator."""
    return rng.normal(0.0, total_shot_noise(budget, rate))


def projection_noise_phase(n_atoms: float, contrast: float = 1.0) -> float:
    """Quantum-projection phase floor at mid-fringe, 1/(contrast sqrt(N)) rad.

    The binomial spread of N independent two-level atoms read out at the
    steepest point of the fringe.
    """
    if n_atoms < 1:
        raise ConfigError("projection noise requires at least one atom")
    if not 0 < contrast <= 1:
        raise ConfigError("contrast must be in (0, 1]")
    return 1.0 / (contrast * math.sqrt(n_atoms))

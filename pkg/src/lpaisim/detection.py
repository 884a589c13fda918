"""Fluorescence readout: state populations to photon counts and back.

Two sequential detection pulses follow each interferometer sequence: the
first collects fluorescence from the F=2 output port, the second (with
repump on) from all atoms. Atoms parked in field-sensitive sublevels by the
state preparation never participate in the interferometer but do fluoresce
in the second pulse, so the population estimate divides the count ratio by
the participating fraction (1 - spectator_fraction).

Counts are Poisson draws around (atoms in port) x (detected photons per
atom); the participating atoms land in F=2 binomially. Electronics noise on
the photodetector is available as an additive Gaussian term, default off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RB87_D2_LINEWIDTH
from .errors import ConfigError, DegenerateSignalError


@dataclass(frozen=True)
class DetectionConfig:
    """Readout chain parameters.

    scattering_rate is photons scattered per second per atom during a
    detection pulse; left unset it defaults to the saturated two-level limit
    (Gamma/2) times `saturation_factor`.
    """

    collection_efficiency: float = 0.012
    pulse_duration: float = 100e-6
    quantum_efficiency: float = 0.55
    saturation_factor: float = 0.8
    scattering_rate: float | None = None
    spectator_fraction: float = 0.57
    electronics_noise_counts: float = 0.0
    enabled: bool = True
    natural_linewidth: float = RB87_D2_LINEWIDTH

    def __post_init__(self):
        for name in ("collection_efficiency", "quantum_efficiency"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in [0, 1]")
        if not 0 <= self.spectator_fraction < 1:
            raise ConfigError("spectator_fraction must be in [0, 1)")
        if self.pulse_duration <= 0:
            raise ConfigError("pulse_duration must be positive")
        if self.saturation_factor <= 0:
            raise ConfigError("saturation_factor must be positive")
        if self.scattering_rate is None:
            object.__setattr__(
                self,
                "scattering_rate",
                0.5 * self.natural_linewidth * self.saturation_factor,
            )
        if self.scattering_rate <= 0:
            raise ConfigError("scattering_rate must be positive")

    @property
    def participating_fraction(self) -> float:
        return 1.0 - self.spectator_fraction


def detected_photons_per_atom(cfg: DetectionConfig) -> float:
    """Mean detected photon count contributed by one atom in one pulse."""
    return (
        cfg.scattering_rate
        * cfg.pulse_duration
        * cfg.collection_efficiency
        * cfg.quantum_efficiency
    )


def simulate_detection(p_true: float, n_atoms: float, cfg: DetectionConfig, rng):
    """Draw one detection outcome: (signal_F2, signal_total) photon counts.

    Participating atoms (1 - spectator_fraction) of N split binomially into
    F=2 with probability p_true; each port signal is a Poisson draw at
    (atoms) x (photons per atom). The total pulse sees every atom, spectators
    included.
    """
    if not 0 <= p_true <= 1:
        raise ConfigError(f"p_true must be in [0, 1], got {p_true}")
    if n_atoms < 0:
        raise ConfigError("atom number must be non-negative")
    gamma = detected_photons_per_atom(cfg)
    n_total = int(round(n_atoms))
    n_part = int(round(cfg.participating_fraction * n_atoms))
    atoms_f2 = rng.binomial(n_part, p_true)
    signal_f2 = float(rng.poisson(atoms_f2 * gamma))
    signal_total = float(rng.poisson(n_total * gamma))
    if cfg.electronics_noise_counts > 0:
        signal_f2 = max(signal_f2 + rng.normal(0.0, cfg.electronics_noise_counts), 0.0)
        signal_total = max(
            signal_total + rng.normal(0.0, cfg.electronics_noise_counts), 0.0
        )
    return signal_f2, signal_total


def normalized_population(
    signal_f2: float, signal_total: float, spectator_fraction: float
) -> float:
    """Estimate the transition probability from the two detection signals:
    (F2/total) / (1 - spectator_fraction), clamped to [0, 1]."""
    if signal_total <= 0:
        raise DegenerateSignalError("total detection signal is empty")
    if not 0 <= spectator_fraction < 1:
        raise ConfigError("spectator_fraction must be in [0, 1)")
    ratio = (signal_f2 / signal_total) / (1.0 - spectator_fraction)
    return float(np.clip(ratio, 0.0, 1.0))


def readout_phase_noise(
    cfg: DetectionConfig,
    n_atoms: float,
    p_true: float = 0.5,
    contrast: float = 1.0,
) -> dict:
    """First-order phase-noise contributions of the readout at an operating
    point (rad/shot): photon shot noise alone, atom projection noise alone,
    and their quadrature total. Report helper, not a sampler."""
    gamma = detected_photons_per_atom(cfg)
    n_part = cfg.participating_fraction * n_atoms
    mu_f2 = n_part * p_true * gamma
    mu_tot = n_atoms * gamma
    if mu_f2 <= 0 or mu_tot <= 0:
        raise ConfigError("operating point has no signal")
    p_norm = (mu_f2 / mu_tot) / cfg.participating_fraction
    var_photon = p_norm**2 * (1.0 / mu_f2 + 1.0 / mu_tot)
    var_projection = p_true * (1.0 - p_true) / n_part
    dphi = lambda var: 2.0 * np.sqrt(var) / contrast
    return {
        "photon_phase_noise": float(dphi(var_photon)),
        "projection_phase_noise": float(dphi(var_projection)),
        "total_phase_noise": float(dphi(var_photon + var_projection)),
        "photons_per_atom": float(gamma),
    }

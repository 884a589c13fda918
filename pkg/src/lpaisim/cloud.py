"""Atom-cloud dynamics across a measurement cycle.

The cycle recycles atoms: after the interferometer and readout, the trap
snaps back on and recaptures most of the cloud, so the slow vapor-loading
step (which would otherwise cap the cycle rate near 50 Hz) only has to
replace the few percent that fell or diffused out of the capture volume.

Model choices, all config-exposed:

- The cloud is an isotropic Gaussian; the capture region is a hard sphere
  around the trap center.
- During prep, Raman pulses, interrogation, and readout the cloud is in free
  fall and expands thermally. The molasses (cool) stage holds it in place
  (viscous damping, negligible sink rate) without loading from vapor; the
  recapture stage re-centers it at the trap origin, restores the trap-
  equilibrium size, and loads fresh atoms from vapor at `loading_rate`.
- Atom number follows N' = F e^(-loss * cycle) N + L * t_recapture with F the
  geometric recapture fraction. The map is affine, so its fixed point and
  convergence rate are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import HBAR, KB, MU_B, PhysicalParams
from .errors import ConfigError, DivergenceError

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class MotConfig:
    """Trap, cooling, and loading parameters.

    axial_gradient is in G/cm (converted internally); trap_detuning is the
    cooling-light detuning from resonance in rad/s (negative = red).
    restoring_time documents the calculated trap pull-back time; the cycle
    model treats re-centering as complete within the recapture window, and
    `restoring_time(mot, params)` recomputes the value from trap theory.
    """

    loading_rate: float = 4.0e7            # atoms/s from vapor, trap on
    capture_radius: float = 3.3e-3         # m, hard-sphere capture region
    axial_gradient: float = 7.8            # G/cm
    saturation_parameter: float = 108.0    # combined over all six beams
    trap_detuning: float = -2.0 * math.pi * 9.0e6   # rad/s
    background_loss_rate: float = 1.0      # 1/s, vacuum-limited
    restoring_time: float = 3.5e-3         # s, documented trap response
    post_cooling_temperature: float = 5.5e-6   # K
    min_cool_duration: float = 100e-6      # s, shortest effective molasses
    initial_cloud_radius: float = 1.2e-3   # m, RMS at trap equilibrium

    def __post_init__(self):
        if self.loading_rate < 0:
            raise ConfigError("loading_rate must be non-negative")
        if self.capture_radius <= 0:
            raise ConfigError("capture_radius must be positive")
        if self.saturation_parameter <= 0:
            raise ConfigError("saturation_parameter must be positive")
        if self.post_cooling_temperature <= 0:
            raise ConfigError("post_cooling_temperature must be positive")
        if self.initial_cloud_radius <= 0:
            raise ConfigError("initial_cloud_radius must be positive")
        if self.restoring_time <= 0:
            raise ConfigError("restoring_time must be positive")
        if self.background_loss_rate < 0:
            raise ConfigError("background_loss_rate must be non-negative")


@dataclass(frozen=True)
class CloudState:
    """Snapshot of the ensemble between cycle stages. Position and velocity
    are along gravity, relative to the trap center."""

    atom_number: float
    temperature: float
    centroid_position: float = 0.0
    centroid_velocity: float = 0.0
    rms_radius: float = 1.2e-3

    def __post_init__(self):
        if self.atom_number < 0:
            raise ConfigError("atom_number must be non-negative")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.rms_radius <= 0:
            raise ConfigError("rms_radius must be positive")


def thermal_velocity(temperature: float, atom_mass: float) -> float:
    """One-dimensional RMS thermal velocity sqrt(kB T / m)."""
    return math.sqrt(KB * temperature / atom_mass)


def cloud_after_tof(
    c: CloudState, t: float, g: float, atom_mass: float = PhysicalParams().atom_mass
) -> CloudState:
    """Free-fall propagation for a time t: ballistic centroid motion and
    thermal expansion of the RMS radius. Atom number unchanged."""
    if t < 0:
        raise ConfigError("time of flight must be non-negative")
    v_th = thermal_velocity(c.temperature, atom_mass)
    return replace(
        c,
        centroid_position=c.centroid_position + c.centroid_velocity * t + 0.5 * g * t * t,
        centroid_velocity=c.centroid_velocity + g * t,
        rms_radius=math.sqrt(c.rms_radius**2 + (v_th * t) ** 2),
    )


def _gaussian_mass_in_sphere(radius: float, offset: float, sigma: float) -> float:
    """Fraction of an isotropic 3-D Gaussian (std sigma per axis) whose center
    sits `offset` from the center of a sphere of the given radius.

    Closed form from the radial integral of the offset Gaussian:

        F = Phi(u) + Phi(w) - 1 + (sigma/(d sqrt(2 pi))) (e^{-w^2/2} - e^{-u^2/2})

    with u = (R - d)/sigma, w = (R + d)/sigma. The d -> 0 limit switches to
    the centered series to dodge the 0/0 cancellation.
    """
    d = abs(offset)
    if d < 1e-6 * sigma:
        x = radius / sigma
        return math.erf(x / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * x * math.exp(
            -0.5 * x * x
        )
    u = (radius - d) / sigma
    w = (radius + d) / sigma
    phi_u = 0.5 * (1.0 + math.erf(u / math.sqrt(2.0)))
    phi_w = 0.5 * (1.0 + math.erf(w / math.sqrt(2.0)))
    tail = (sigma / (d * SQRT_2PI)) * (math.exp(-0.5 * w * w) - math.exp(-0.5 * u * u))
    # cancellation can leave a ~1e-85 negative when the cloud is far outside
    return min(max(phi_u + phi_w - 1.0 + tail, 0.0), 1.0)


def recapture_fraction(c: CloudState, mot: MotConfig) -> float:
    """Fraction of the cloud inside the capture sphere when the trap snaps
    back on. Geometric overlap only (velocity selection is not modeled);
    monotone non-increasing in displacement and in cloud size."""
    f = _gaussian_mass_in_sphere(
        mot.capture_radius, c.centroid_position, c.rms_radius
    )
    return min(max(f, 0.0), 1.0)


def evolve_cycle(c: CloudState, cfg) -> CloudState:
    """One full measurement cycle applied to the cloud.

    Free fall spans prep + pulses + 2T + readout; the recapture stage then
    retains the geometric fraction (minus background loss over the cycle),
    loads loading_rate * recapture_duration fresh atoms, and re-centers the
    cloud at the trap origin with the equilibrium radius. The molasses stage
    resets the temperature whenever it meets the configured minimum duration.

    cfg is a CycleConfig (duck-typed: .timing, .mot, .physical).
    """
    timing = cfg.timing
    mot = cfg.mot
    fallen = cloud_after_tof(
        c, timing.free_fall_time, cfg.physical.gravity, cfg.physical.atom_mass
    )
    retained = recapture_fraction(fallen, mot) * math.exp(
        -mot.background_loss_rate * timing.cycle_time
    )
    n_next = retained * c.atom_number + mot.loading_rate * timing.recapture_duration
    temperature = (
        mot.post_cooling_temperature
        if timing.cool_duration >= mot.min_cool_duration
        else c.temperature
    )
    return CloudState(
        atom_number=n_next,
        temperature=temperature,
        centroid_position=0.0,
        centroid_velocity=0.0,
        rms_radius=mot.initial_cloud_radius,
    )


def steady_state_retention(cfg) -> float:
    """Per-cycle retention factor r_eff = F * exp(-loss * cycle) evaluated on
    the steady released cloud (trap equilibrium at the cooled temperature)."""
    mot = cfg.mot
    released = CloudState(
        atom_number=1.0,
        temperature=mot.post_cooling_temperature,
        rms_radius=mot.initial_cloud_radius,
    )
    fallen = cloud_after_tof(
        released, cfg.timing.free_fall_time, cfg.physical.gravity, cfg.physical.atom_mass
    )
    return recapture_fraction(fallen, mot) * math.exp(
        -mot.background_loss_rate * cfg.timing.cycle_time
    )


def equilibrium_atom_number(cfg) -> float:
    """Fixed point of the per-cycle atom-number map,

        N* = L * t_recapture / (1 - r_eff).

    The map is affine with slope r_eff, so iteration converges geometrically
    from any starting number. Raises DivergenceError when r_eff >= 1 (no
    losses and perfect recapture: the number grows without bound).
    """
    r_eff = steady_state_retention(cfg)
    if r_eff >= 1.0:
        raise DivergenceError(
            f"retention per cycle is {r_eff:.6f} >= 1; atom number diverges"
        )
    load = cfg.mot.loading_rate * cfg.timing.recapture_duration
    return load / (1.0 - r_eff)


# --- trap response -----------------------------------------------------------

def scattering_force(
    v: float, mot: MotConfig, params: PhysicalParams
) -> float:
    """Net radiation-pressure force (N) of a counter-propagating beam pair on
    an atom moving at velocity v, Doppler terms only:

        F(v) = (hbar k Gamma / 2) [ s / (1 + s + (2(d - k v)/Gamma)^2)
                                  - s / (1 + s + (2(d + k v)/Gamma)^2) ]

    with s the (combined) saturation parameter and d the detuning. Restoring
    for red detuning: F'(0) < 0.
    """
    k = params.single_photon_wavevector
    gamma = params.natural_linewidth
    s = mot.saturation_parameter
    d = mot.trap_detuning
    prefactor = 0.5 * HBAR * k * gamma
    lorentz = lambda det: s / (1.0 + s + (2.0 * det / gamma) ** 2)
    return prefactor * (lorentz(d - k * v) - lorentz(d + k * v))


def doppler_damping_coefficient(mot: MotConfig, params: PhysicalParams) -> float:
    """Velocity-damping coefficient beta = -dF/dv at v = 0 (kg/s):

        beta = -8 hbar k^2 s (d/Gamma) / (1 + s + (2 d/Gamma)^2)^2

    Positive for red detuning. Saturates: beta peaks at s = 1 + (2d/Gamma)^2
    and falls off at higher intensity.
    """
    k = params.single_photon_wavevector
    gamma = params.natural_linewidth
    s = mot.saturation_parameter
    d_norm = mot.trap_detuning / gamma
    denom = (1.0 + s + 4.0 * d_norm * d_norm) ** 2
    return -8.0 * HBAR * k * k * s * d_norm / denom


def trap_spring_constant(mot: MotConfig, params: PhysicalParams) -> float:
    """Linearized trap spring constant kappa = beta * mu_B B' / (hbar k)
    (N/m): the field gradient maps position to an effective Zeeman detuning
    exactly as velocity maps through the Doppler shift, so the same damping
    coefficient scales into a restoring term."""
    beta = doppler_damping_coefficient(mot, params)
    gradient_si = mot.axial_gradient * 1e-2   # G/cm -> T/m
    return beta * MU_B * gradient_si / (HBAR * params.single_photon_wavevector)


def restoring_time(mot: MotConfig, params: PhysicalParams) -> float:
    """Characteristic time for the trap to pull a displaced cloud back to
    center: the oscillation period 2 pi sqrt(m / kappa) of the linearized
    trap. About 3.3 ms at the default parameters."""
    kappa = trap_spring_constant(mot, params)
    if kappa <= 0:
        raise ConfigError("trap is not restoring (check detuning sign)")
    return 2.0 * math.pi * math.sqrt(params.atom_mass / kappa)

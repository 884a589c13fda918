"""Simulation driver: assembles per-shot phase/amplitude arrays for each
measurement mode, runs the compiled shot loop, and packages the results.

Three modes share one kernel model p_i = offset + amp_i * cos(theta_i + eps_i):

  mid_fringe    locked at quadrature (theta = pi/2), chirp matched to gravity;
                populations swing linearly with the per-shot phase error.
  phase_scan    applied Raman phase swept over two full fringes.
  gravity_scan  interrogation time swept with the chirp off; the accumulated
                phase traces the chirped gravity fringe.

Every series derives its streams from one SeedSequence, so a (config, seed)
pair replays byte-identically on either kernel implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import CloudState, equilibrium_atom_number, evolve_cycle
from .config import CycleConfig
from .detection import detected_photons_per_atom
from .errors import ConfigError, DegenerateSignalError
from .fringe import chirped_phase, exponential_envelope
from .kernel import run_shots
from .noise import total_shot_noise

QUADRATURE_PHASE = math.pi / 2.0


@dataclass
class ShotSeries:
    """One simulated measurement run.

    scan_values holds the per-shot scan variable: the applied Raman phase
    (rad) for mid_fringe/phase_scan, the interrogation time T (s) for
    gravity_scan. Counts are zero when detection is disabled.
    """

    kind: str
    data_rate: float
    timestamps: np.ndarray
    scan_values: np.ndarray
    populations: np.ndarray
    true_probabilities: np.ndarray
    phase_noise: np.ndarray
    f2_counts: np.ndarray
    total_counts: np.ndarray
    atom_number: float
    seed: int
    config: CycleConfig = field(repr=False)

    def __len__(self) -> int:
        return len(self.populations)


def _series_rngs(seed):
    """(root entropy, shot rng, electronics rng) for a run seed."""
    ss = np.random.SeedSequence(seed)
    shot_ss, elec_ss = ss.spawn(2)
    return (
        int(ss.entropy),
        np.random.Generator(np.random.PCG64(shot_ss)),
        np.random.Generator(np.random.PCG64(elec_ss)),
    )


def _ensemble_counts(cfg: CycleConfig) -> tuple[float, int, int]:
    n_eq = equilibrium_atom_number(cfg)
    n_total = int(round(n_eq))
    n_part = int(round(cfg.detection.participating_fraction * n_eq))
    if n_part < 1:
        raise ConfigError("equilibrium ensemble has no participating atoms")
    return n_eq, n_part, n_total


def _apply_electronics_noise(cfg: CycleConfig, rng, f2, tot):
    """Additive Gaussian counting noise on both fluorescence channels,
    applied after the shot loop so the kernel streams stay implementation
    independent. Returns (f2, tot, populations)."""
    enc = cfg.detection.electronics_noise_counts
    if enc > 0.0 and cfg.detection.enabled and len(f2):
        f2 = np.maximum(f2 + rng.normal(0.0, enc, size=len(f2)), 0.0)
        tot = np.maximum(tot + rng.normal(0.0, enc, size=len(tot)), 0.0)
        if np.any(tot <= 0.0):
            raise DegenerateSignalError(
                "electronics noise wiped out the total-fluorescence signal"
            )
        pops = np.clip(
            (f2 / tot) / cfg.detection.participating_fraction, 0.0, 1.0
        )
        return f2, tot, pops
    return f2, tot, None


def _run_series(cfg, kind, theta, amp, scan_values, times, seed, implementation):
    entropy, shot_rng, elec_rng = _series_rngs(seed)
    n_eq, n_part, n_total = _ensemble_counts(cfg)
    sigma = total_shot_noise(cfg.noise, cfg.data_rate)
    offset = cfg.gravity_scan.offset if kind == "gravity_scan" else cfg.fringe.offset
    noise, pops, f2, tot = run_shots(
        shot_rng,
        theta,
        amp,
        offset,
        sigma,
        times,
        injectors=cfg.noise.injectors,
        n_part=n_part,
        n_total=n_total,
        gamma=detected_photons_per_atom(cfg.detection),
        participating_fraction=cfg.detection.participating_fraction,
        detect=cfg.detection.enabled,
        implementation=implementation,
    )
    f2, tot, reweighed = _apply_electronics_noise(cfg, elec_rng, f2, tot)
    probs = np.clip(offset + np.asarray(amp) * np.cos(theta + noise), 0.0, 1.0)
    return ShotSeries(
        kind=kind,
        data_rate=cfg.data_rate,
        timestamps=np.asarray(times, dtype=np.float64),
        scan_values=np.asarray(scan_values, dtype=np.float64),
        populations=reweighed if reweighed is not None else pops,
        true_probabilities=probs,
        phase_noise=noise,
        f2_counts=f2,
        total_counts=tot,
        atom_number=n_eq,
        seed=entropy,
        config=cfg,
    )


def simulate_mid_fringe(
    cfg: CycleConfig,
    shots: int = 12000,
    seed=None,
    implementation=None,
) -> ShotSeries:
    """Fixed-phase acquisition at the quadrature lock point.

    The frequency chirp cancels the Doppler term exactly, and the applied
    Raman phase parks the fringe at pi/2, where the population responds
    linearly to phase disturbances: p = offset + (contrast/2) sin(eps).
    """
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    applied = QUADRATURE_PHASE - cfg.fringe.phase_origin
    theta = np.full(shots, QUADRATURE_PHASE)
    amp = np.full(shots, -0.5 * cfg.fringe.contrast)
    times = np.arange(shots, dtype=np.float64) * cfg.timing.cycle_time
    scan = np.full(shots, applied)
    return _run_series(cfg, "mid_fringe", theta, amp, scan, times, seed, implementation)


def simulate_fringe_scan(
    cfg: CycleConfig,
    points: int = 400,
    seed=None,
    implementation=None,
) -> ShotSeries:
    """Applied-phase scan over two full fringes (one shot per phase step)."""
    if points < 8:
        raise ConfigError("a fringe scan needs at least 8 points")
    scan = np.linspace(0.0, 4.0 * math.pi, points, endpoint=False)
    theta = scan + cfg.fringe.phase_origin
    amp = np.full(points, -0.5 * cfg.fringe.contrast)
    times = np.arange(points, dtype=np.float64) * cfg.timing.cycle_time
    return _run_series(cfg, "phase_scan", theta, amp, scan, times, seed, implementation)


def gravity_scan_times(cfg: CycleConfig) -> np.ndarray:
    """Interrogation-time grid for the gravity fringe scan."""
    gs = cfg.gravity_scan
    return np.linspace(0.0, gs.t_max, gs.points)


def simulate_gravity_scan(
    cfg: CycleConfig,
    seed=None,
    t_values=None,
    shots_per_point: int = 1,
    implementation=None,
) -> ShotSeries:
    """Chirp-off interrogation-time sweep tracing the gravity fringe.

    Longer interrogation stretches the cycle, so wall-clock timestamps grow
    with 2T on top of the fixed overhead; the per-shot noise level stays at
    the configured rate's budget.
    """
    if shots_per_point < 1:
        raise ConfigError("shots_per_point must be >= 1")
    gs = cfg.gravity_scan
    if t_values is None:
        t_values = gravity_scan_times(cfg)
    t_values = np.asarray(t_values, dtype=np.float64)
    if np.any(t_values < 0):
        raise ConfigError("interrogation times must be non-negative")
    t_shot = np.repeat(t_values, shots_per_point)

    theta = chirped_phase(t_shot, cfg.physical.gravity, cfg.physical, gs.phase_origin)
    envelope = exponential_envelope(gs.envelope_tau)
    amp = gs.amplitude * envelope(t_shot)

    fixed = cfg.timing.cycle_time - 2.0 * cfg.timing.interrogation_T
    cycles = fixed + 2.0 * t_shot
    times = np.concatenate(([0.0], np.cumsum(cycles[:-1])))
    return _run_series(
        cfg, "gravity_scan", theta, amp, t_shot, times, seed, implementation
    )


def settle_ensemble(
    cfg: CycleConfig,
    start: CloudState | None = None,
    rel_tol: float = 1e-3,
    max_cycles: int = 1000,
) -> tuple[CloudState, int]:
    """Iterate the per-cycle atom-number map until it changes by less than
    rel_tol per cycle. Returns (state, cycles used)."""
    state = start
    if state is None:
        state = CloudState(
            atom_number=cfg.mot.loading_rate * cfg.timing.recapture_duration,
            temperature=cfg.mot.post_cooling_temperature,
            rms_radius=cfg.mot.initial_cloud_radius,
        )
    for cycle in range(1, max_cycles + 1):
        nxt = evolve_cycle(state, cfg)
        scale = max(abs(nxt.atom_number), 1e-300)
        if abs(nxt.atom_number - state.atom_number) / scale < rel_tol:
            return nxt, cycle
        state = nxt
    return state, max_cycles

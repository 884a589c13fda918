"""Estimation pipeline: fringe calibration, per-shot phase readout, the
chirped-fringe gravity fit, Allan-deviation statistics, and the data-rate
sensitivity sweep.

All fits are hand-rolled linear algebra on numpy primitives (lstsq / solve);
the gravity fit is a grid-initialized damped Gauss-Newton with an analytic
Jacobian, which keeps it deterministic and fast enough for dense scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import CycleConfig, with_data_rate
from .core import pi_pulse_duration
from .errors import (
    ConfigError,
    FitAmbiguityError,
    FitConvergenceError,
    InsufficientDataError,
    RankDeficiencyError,
)
from .fringe import PULSE_SCALE, phase_to_accel
from .noise import total_shot_noise


# --- per-shot phase readout --------------------------------------------------

def mid_fringe_phases(series, contrast=None, offset=None) -> np.ndarray:
    """Per-shot phase deviations from a quadrature-locked series.

    Inverts p = offset + (contrast/2) sin(eps). Calibration values default to
    the configured fringe model; pass fitted ones to use a measured
    calibration instead.
    """
    if series.kind != "mid_fringe":
        raise ConfigError(f"need a mid_fringe series, got {series.kind!r}")
    fm = series.config.fringe
    contrast = fm.contrast if contrast is None else contrast
    offset = fm.offset if offset is None else offset
    if contrast <= 0:
        raise ConfigError("contrast must be positive")
    s = np.clip(2.0 * (series.populations - offset) / contrast, -1.0, 1.0)
    return np.arcsin(s)


def phases_to_accelerations(series, phases) -> np.ndarray:
    """Phase deviations to acceleration deviations (m/s^2) via 1/(k T^2)."""
    cfg = series.config
    return phase_to_accel(
        np.asarray(phases),
        cfg.physical.effective_wavevector,
        cfg.timing.interrogation_T,
    )


def series_accelerations(series, in_g: bool = False) -> np.ndarray:
    """Per-shot acceleration readout of a mid-fringe series."""
    accel = phases_to_accelerations(series, mid_fringe_phases(series))
    return accel / series.config.physical.gravity if in_g else accel


def shot_sensitivity(dphi: float, cfg: CycleConfig) -> float:
    """Single-shot acceleration resolution, in units of local g, for a given
    per-shot phase noise."""
    accel = phase_to_accel(
        dphi, cfg.physical.effective_wavevector, cfg.timing.interrogation_T
    )
    return accel / cfg.physical.gravity


def short_term_sensitivity(dphi: float, cfg: CycleConfig) -> float:
    """White-noise sensitivity in g/sqrt(Hz): per-shot resolution divided by
    the square root of the data rate."""
    return shot_sensitivity(dphi, cfg) / math.sqrt(cfg.data_rate)


def measured_phase_noise(series) -> float:
    """Sample standard deviation of the mid-fringe phase readout (rad)."""
    phases = mid_fringe_phases(series)
    if len(phases) < 2:
        raise InsufficientDataError("need at least 2 shots to estimate noise")
    return float(np.std(phases, ddof=1))


# --- fringe calibration fit --------------------------------------------------

@dataclass
class FringeFit:
    contrast: float
    offset: float
    phase_origin: float
    sigma_contrast: float
    sigma_offset: float
    sigma_phase_origin: float
    residual_rms: float
    n_points: int


def fit_fringe(phases, populations) -> FringeFit:
    """Least-squares fringe calibration from an applied-phase scan.

    Model: p = offset - (contrast/2) cos(phase + phase_origin), solved in the
    linear basis [1, cos, sin]. Requires at least 8 points spanning a full
    fringe; a scan that cannot pin the phase (degenerate design matrix or a
    vanishing fitted amplitude) raises RankDeficiencyError.
    """
    phases = np.asarray(phases, dtype=float)
    populations = np.asarray(populations, dtype=float)
    if phases.shape != populations.shape or phases.ndim != 1:
        raise ConfigError("phases and populations must be 1-d and equal length")
    n = len(phases)
    if n < 8:
        raise InsufficientDataError(f"fringe fit needs >= 8 points, got {n}")
    if np.ptp(phases) < 2.0 * math.pi - 1e-9:
        raise InsufficientDataError("fringe scan must span at least 2 pi")

    X = np.column_stack([np.ones(n), np.cos(phases), np.sin(phases)])
    coef, _, rank, _ = np.linalg.lstsq(X, populations, rcond=None)
    if rank < 3:
        raise RankDeficiencyError("fringe design matrix is rank-deficient")
    c0, a, b = coef
    half = math.hypot(a, b)

    resid = populations - X @ coef
    dof = n - 3
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)

    # p = c0 + a cos + b sin  vs  offset - (A/2) cos(phi + phi0):
    #   a = -(A/2) cos(phi0),  b = (A/2) sin(phi0)
    if half < 4.0 * math.sqrt(max(cov[1, 1], cov[2, 2])) or half == 0.0:
        raise RankDeficiencyError(
            "fitted fringe amplitude is consistent with zero; phase undefined"
        )
    phase_origin = math.atan2(b, -a)
    r2 = half * half
    var_half = (a * a * cov[1, 1] + 2 * a * b * cov[1, 2] + b * b * cov[2, 2]) / r2
    var_phase = (b * b * cov[1, 1] - 2 * a * b * cov[1, 2] + a * a * cov[2, 2]) / (
        r2 * r2
    )
    return FringeFit(
        contrast=2.0 * half,
        offset=float(c0),
        phase_origin=phase_origin,
        sigma_contrast=2.0 * math.sqrt(max(var_half, 0.0)),
        sigma_offset=math.sqrt(max(cov[0, 0], 0.0)),
        sigma_phase_origin=math.sqrt(max(var_phase, 0.0)),
        residual_rms=math.sqrt(s2 * dof / n),
        n_points=n,
    )


# --- chirped-fringe gravity fit ----------------------------------------------

@dataclass
class GravityFit:
    gravity: float
    sigma_gravity: float
    phase_origin: float
    amplitude: float
    envelope_tau: float
    offset: float
    residual_rms: float
    iterations: int
    grid_gravity: float
    include_linear_term: bool


def _gravity_phase(t, g, k, tau_pi, include_linear):
    lin = tau_pi * k * g * PULSE_SCALE if include_linear else 0.0
    return lin * t + k * g * t * t


def _grid_stage(t, y, cfg, include_linear):
    """Coarse gravity estimate: scan g over the prior window, solving the
    conditionally linear parameters (offset, quadrature amplitudes) at each
    grid point. Returns (g_grid_best, phi0, a0, c0)."""
    gs = cfg.gravity_scan
    k = cfg.physical.effective_wavevector
    tau_pi = pi_pulse_duration(cfg.physical.rabi_frequency)
    env = np.exp(-t / gs.envelope_tau)
    t_max = float(np.max(t))
    if t_max <= 0:
        raise InsufficientDataError("gravity scan needs a positive time span")

    # Grid finer than a quarter fringe at the longest interrogation time, so
    # the true minimum cannot fall between samples.
    step = math.pi / (4.0 * k * t_max * t_max)
    lo = gs.prior_center - gs.prior_half_width
    hi = gs.prior_center + gs.prior_half_width
    n_grid = max(int(math.ceil((hi - lo) / step)) + 1, 16)
    grid = np.linspace(lo, hi, n_grid)

    ssr = np.empty(n_grid)
    coefs = np.empty((n_grid, 3))
    ones = np.ones_like(t)
    for i, g in enumerate(grid):
        psi = _gravity_phase(t, g, k, tau_pi, include_linear)
        X = np.column_stack([ones, env * np.cos(psi), env * np.sin(psi)])
        coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if rank < 3:
            ssr[i] = np.inf
            continue
        r = y - X @ coef
        ssr[i] = float(r @ r)
        coefs[i] = coef

    best = int(np.argmin(ssr))
    if not np.isfinite(ssr[best]):
        raise RankDeficiencyError("gravity grid stage is rank-deficient everywhere")

    # Likelihood-ratio ambiguity guard: another local minimum statistically
    # indistinguishable from the best one means the prior window admits more
    # than one fringe assignment.
    dof = max(len(y) - 3, 1)
    s2 = max(ssr[best] / dof, 1e-300)
    interior = np.arange(1, n_grid - 1)
    local = interior[
        (ssr[interior] <= ssr[interior - 1]) & (ssr[interior] <= ssr[interior + 1])
    ]
    for i in local:
        if abs(grid[i] - grid[best]) > 2.0 * step and (ssr[i] - ssr[best]) / s2 < 9.0:
            raise FitAmbiguityError(
                f"gravity fit is ambiguous: competing minimum at {grid[i]:.6f} "
                f"vs {grid[best]:.6f} m/s^2; shrink the prior window"
            )

    c0, a, b = coefs[best]
    a0 = math.hypot(a, b)
    if a0 == 0.0:
        raise RankDeficiencyError("gravity fringe amplitude fitted as zero")
    #   a cos(psi) + b sin(psi) = a0 cos(psi + phi0)
    phi0 = math.atan2(-b, a)
    return float(grid[best]), phi0, a0, float(c0)


def _gravity_model_jacobian(p, t, k, tau_pi, include_linear):
    g, phi0, a0, tau, c0 = p
    psi = phi0 + _gravity_phase(t, g, k, tau_pi, include_linear)
    env = np.exp(-t / tau)
    cos_psi = np.cos(psi)
    sin_psi = np.sin(psi)
    model = c0 + a0 * env * cos_psi
    dpsi_dg = (tau_pi * k * PULSE_SCALE if include_linear else 0.0) * t + k * t * t
    J = np.column_stack(
        [
            -a0 * env * sin_psi * dpsi_dg,   # d/dg
            -a0 * env * sin_psi,             # d/dphi0
            env * cos_psi,                   # d/da0
            a0 * env * cos_psi * t / (tau * tau),   # d/dtau
            np.ones_like(t),                 # d/dc0
        ]
    )
    return model, J


def fit_chirped_gravity(
    t_values,
    populations,
    cfg: CycleConfig,
    include_linear_term: bool = True,
    max_iterations: int = 200,
) -> GravityFit:
    """Extract gravity from a chirp-off interrogation-time scan.

    Two stages: a grid search over gravity inside the configured prior window
    (linear solve for the remaining parameters at each point, with an
    ambiguity guard on competing minima), then a damped Gauss-Newton refine
    over (gravity, phase origin, amplitude, envelope time, offset) with an
    analytic Jacobian. The quoted sigma_gravity comes from the usual
    s^2 (J^T J)^-1 covariance at the optimum.
    """
    t = np.asarray(t_values, dtype=float)
    y = np.asarray(populations, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ConfigError("t_values and populations must be 1-d and equal length")
    if len(t) < 8:
        raise InsufficientDataError(f"gravity fit needs >= 8 points, got {len(t)}")

    k = cfg.physical.effective_wavevector
    tau_pi = pi_pulse_duration(cfg.physical.rabi_frequency)
    g0, phi0, a0, c0 = _grid_stage(t, y, cfg, include_linear_term)
    p = np.array([g0, phi0, a0, cfg.gravity_scan.envelope_tau, c0])

    model, J = _gravity_model_jacobian(p, t, k, tau_pi, include_linear_term)
    r = y - model
    ssr = float(r @ r)
    lam = 1e-3
    iterations = 0
    converged = False
    while iterations < max_iterations:
        iterations += 1
        # Column-equilibrated damped normal equations.
        norms = np.sqrt((J * J).sum(axis=0))
        norms[norms == 0.0] = 1.0
        Js = J / norms
        A = Js.T @ Js
        rhs = Js.T @ r
        accepted = False
        for _ in range(50):
            try:
                delta = np.linalg.solve(A + lam * np.eye(5), rhs) / norms
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + delta
            if trial[3] <= 0.0 or not np.all(np.isfinite(trial)):
                lam *= 10.0
                continue
            model_t, J_t = _gravity_model_jacobian(
                trial, t, k, tau_pi, include_linear_term
            )
            r_t = y - model_t
            ssr_t = float(r_t @ r_t)
            if ssr_t <= ssr:
                rel_step = np.max(np.abs(delta) / np.maximum(np.abs(trial), 1e-12))
                p, model, J, r = trial, model_t, J_t, r_t
                ssr_prev, ssr = ssr, ssr_t
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if rel_step < 1e-10 or (ssr_prev - ssr) <= 1e-14 * max(ssr, 1e-300):
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            # Damping saturated: the current point is a numerical optimum.
            converged = True
        if converged:
            break
    if not converged:
        raise FitConvergenceError(
            f"gravity fit did not converge in {max_iterations} iterations"
        )

    dof = max(len(y) - 5, 1)
    s2 = ssr / dof
    norms = np.sqrt((J * J).sum(axis=0))
    norms[norms == 0.0] = 1.0
    Js = J / norms
    try:
        cov_scaled = np.linalg.inv(Js.T @ Js)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError("singular covariance at the optimum") from exc
    var_g = s2 * cov_scaled[0, 0] / (norms[0] * norms[0])

    g, phi0, a0, tau, c0 = p
    if a0 < 0.0:
        a0, phi0 = -a0, phi0 + math.pi
    return GravityFit(
        gravity=float(g),
        sigma_gravity=math.sqrt(max(var_g, 0.0)),
        phase_origin=math.remainder(phi0, 2.0 * math.pi),
        amplitude=float(a0),
        envelope_tau=float(tau),
        offset=float(c0),
        residual_rms=math.sqrt(ssr / len(y)),
        iterations=iterations,
        grid_gravity=g0,
        include_linear_term=include_linear_term,
    )


# --- Allan deviation ---------------------------------------------------------

@dataclass
class AllanCurve:
    taus: np.ndarray
    sigmas: np.ndarray
    errors: np.ndarray
    bin_counts: np.ndarray
    sample_period: float
    overlapping: bool = False

    def __len__(self) -> int:
        return len(self.taus)


def allan_deviation(
    values,
    sample_period: float,
    max_m: int | None = None,
    overlapping: bool = False,
) -> AllanCurve:
    """Two-sample (Allan) deviation at octave-spaced averaging times.

    Non-overlapping estimator by default: chop the series into M bins of m
    samples, sigma^2(tau) = sum of successive bin-mean differences squared
    over 2(M-1). The overlapping variant strides the bins by one sample for
    lower estimator variance at long tau. Error bars use the standard
    1/sqrt(2(M-1)) fractional width.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ConfigError("values must be 1-d")
    n = len(x)
    if n < 4:
        raise InsufficientDataError(f"Allan analysis needs >= 4 samples, got {n}")
    if sample_period <= 0:
        raise ConfigError("sample_period must be positive")

    taus, sigmas, errors, counts = [], [], [], []
    m = 1
    limit = n // 2 if max_m is None else min(max_m, n // 2)
    while m <= limit:
        if overlapping:
            csum = np.concatenate(([0.0], np.cumsum(x)))
            means = (csum[m:] - csum[:-m]) / m
            diffs = means[m:] - means[:-m]
            n_diffs = len(diffs)
        else:
            n_bins = n // m
            means = x[: n_bins * m].reshape(n_bins, m).mean(axis=1)
            diffs = np.diff(means)
            n_diffs = n_bins - 1
        if n_diffs < 1:
            break
        avar = float(diffs @ diffs) / (2.0 * n_diffs)
        sigma = math.sqrt(avar)
        taus.append(m * sample_period)
        sigmas.append(sigma)
        errors.append(sigma / math.sqrt(2.0 * n_diffs))
        counts.append(n_diffs + 1)
        m *= 2

    return AllanCurve(
        taus=np.array(taus),
        sigmas=np.array(sigmas),
        errors=np.array(errors),
        bin_counts=np.array(counts),
        sample_period=sample_period,
        overlapping=overlapping,
    )


def allan_slope(curve: AllanCurve, tau_max: float | None = None) -> float:
    """Log-log slope of the Allan curve (white phase/frequency noise shows
    -1/2). Restrict with tau_max to exclude long-tau points with few bins."""
    mask = np.ones(len(curve), dtype=bool)
    if tau_max is not None:
        mask &= curve.taus <= tau_max
    if mask.sum() < 2:
        raise InsufficientDataError("need >= 2 Allan points for a slope")
    logt = np.log(curve.taus[mask])
    logs = np.log(curve.sigmas[mask])
    return float(np.polyfit(logt, logs, 1)[0])


def allan_of_series(series, in_g: bool = True, **kwargs) -> AllanCurve:
    """Allan deviation of a mid-fringe series' acceleration readout."""
    accel = series_accelerations(series, in_g=in_g)
    return allan_deviation(accel, series.config.timing.cycle_time, **kwargs)


# --- data-rate sweep ---------------------------------------------------------

@dataclass
class SweepRow:
    data_rate: float
    interrogation_T: float
    duty_cycle: float
    phase_noise_budget: float
    sensitivity_budget: float        # g/sqrt(Hz), rate-dependent budget
    sensitivity_flat_budget: float   # g/sqrt(Hz), budget pinned at its 50 Hz value
    sensitivity_measured: float | None = None
    mc_shots: int = 0
    seed: int | None = None


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)


DEFAULT_SWEEP_RATES = (50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 330.0)


def noise_report(cfg: CycleConfig) -> dict:
    """Phase-noise budget breakdown at the configured operating point,
    the atom/photon readout floor for the equilibrium ensemble, and what-if
    sensitivities if the budget collapsed to its irreducible parts."""
    from .cloud import equilibrium_atom_number
    from .detection import readout_phase_noise
    from .noise import budget_total, quadrature_total

    n_eq = equilibrium_atom_number(cfg)
    budget = cfg.noise
    total = total_shot_noise(budget, cfg.data_rate)
    full_budget = budget_total(budget)
    readout = readout_phase_noise(
        cfg.detection, n_eq, p_true=0.5, contrast=cfg.fringe.contrast
    )
    projection = readout["projection_phase_noise"]
    floor = readout["total_phase_noise"]
    return {
        "data_rate": cfg.data_rate,
        "interrogation_T": cfg.timing.interrogation_T,
        "duty_cycle": cfg.timing.duty_cycle,
        "equilibrium_atoms": n_eq,
        "raman_phase_noise": budget.raman_phase_noise,
        "magnetic_noise": budget.magnetic_noise,
        "residual_noise": budget.residual_noise,
        "known_quadrature_sum": quadrature_total(budget),
        "budget_total": full_budget,
        "total_at_rate": total,
        "photon_phase_noise": readout["photon_phase_noise"],
        "projection_phase_noise": projection,
        "readout_floor_phase": floor,
        "budget_to_projection_ratio": full_budget / projection,
        "photons_per_atom": readout["photons_per_atom"],
        "sensitivity_budget": short_term_sensitivity(total, cfg),
        "sensitivity_residual_only": short_term_sensitivity(
            budget.residual_noise, cfg
        ),
        "sensitivity_readout_floor": short_term_sensitivity(floor, cfg),
    }


def sweep_data_rate(
    cfg: CycleConfig,
    rates=DEFAULT_SWEEP_RATES,
    seed=None,
    mc_shots: int = 10000,
    implementation=None,
) -> SweepResult:
    """Sensitivity versus data rate with the cycle re-optimized at each rate.

    Besides the analytic budget prediction, each row carries a flat-budget
    column (no rate roll-off, for comparison) and, when mc_shots > 0, a
    Monte-Carlo estimate from a quadrature-locked run through the full
    detection and readout chain.
    """
    from .engine import simulate_mid_fringe   # local import to avoid a cycle

    root = np.random.default_rng(seed)
    flat = total_shot_noise(cfg.noise, 50.0)
    result = SweepResult()
    for rate in rates:
        cfg_r = with_data_rate(cfg, rate)
        dphi = total_shot_noise(cfg_r.noise, rate)
        row = SweepRow(
            data_rate=rate,
            interrogation_T=cfg_r.timing.interrogation_T,
            duty_cycle=cfg_r.timing.duty_cycle,
            phase_noise_budget=dphi,
            sensitivity_budget=short_term_sensitivity(dphi, cfg_r),
            sensitivity_flat_budget=short_term_sensitivity(flat, cfg_r),
        )
        if mc_shots > 0:
            run_seed = int(root.integers(2**63))
            series = simulate_mid_fringe(
                cfg_r, shots=mc_shots, seed=run_seed, implementation=implementation
            )
            row.sensitivity_measured = short_term_sensitivity(
                measured_phase_noise(series), cfg_r
            )
            row.mc_shots = mc_shots
            row.seed = run_seed
        result.rows.append(row)
    return result

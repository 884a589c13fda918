"""End-to-end checks pinning the simulator to its design operating points.

Each test states its quantitative target inline and prints a PASS line with
the measured value (visible under pytest -rA or -s). Soft runtime ceilings
guard against accidental performance regressions; they are generous compared
to a desk machine.
"""

import csv
import json
import math
import time

import numpy as np
import pytest

from lpaisim.analysis import (
    allan_deviation,
    allan_of_series,
    allan_slope,
    fit_chirped_gravity,
    measured_phase_noise,
    short_term_sensitivity,
)
from lpaisim.cli import main
from lpaisim.cloud import (
    CloudState,
    cloud_after_tof,
    equilibrium_atom_number,
    evolve_cycle,
    recapture_fraction,
)
from lpaisim.config import default_config
from lpaisim.core import quantize_duration
from lpaisim.detection import normalized_population, simulate_detection
from lpaisim.engine import simulate_gravity_scan, simulate_mid_fringe
from lpaisim.fringe import (
    FringeModel,
    PulseSequencePhases,
    doppler_chirp_rate,
    mz_phase,
    phase_to_accel,
    transition_probability,
)
from lpaisim.noise import (
    DisturbanceInjector,
    NoiseBudget,
    budget_total,
    projection_noise_phase,
    quadrature_total,
)

G_LOCAL = 9.7916378


def _cli(*argv):
    try:
        main(list(argv))
    except SystemExit as exc:
        assert not exc.code, f"CLI exited {exc.code}"


def test_doppler_chirp_rate_cancels_free_fall():
    # k g for lambda = 780.241 nm, local g: 2 pi x 25.10 kHz/ms within 0.4%
    cfg = default_config(100.0)
    alpha = doppler_chirp_rate(cfg.physical.effective_wavevector, G_LOCAL)
    khz_per_ms = alpha / (2 * math.pi) / 1e6   # Hz/s -> kHz/ms
    assert khz_per_ms == pytest.approx(25.10, rel=0.004)
    print(f"PASS chirp rate: {khz_per_ms:.4f} kHz/ms (target 25.10 +- 0.4%)")


def test_pi_phase_shift_is_milli_g_scale():
    # a pi fringe shift at T = 3.415 ms reads 1.71 mg within 1%
    cfg = default_config(100.0)
    a = phase_to_accel(math.pi, cfg.physical.effective_wavevector, 3.415e-3)
    milli_g = a / G_LOCAL * 1e3
    assert milli_g == pytest.approx(1.71, rel=0.01)
    print(f"PASS fringe scale: pi -> {milli_g:.4f} mg (target 1.71 +- 1%)")


def test_hundred_hz_sensitivity():
    # 12,000 quadrature-locked shots at 100 Hz (31.1 mrad low-rate budget)
    # must resolve 1.6 ug/sqrt(Hz) within 15%
    start = time.perf_counter()
    cfg = default_config(100.0)
    series = simulate_mid_fringe(cfg, shots=12_000, seed=2024)
    dphi = measured_phase_noise(series)
    sens = short_term_sensitivity(dphi, cfg) * 1e6   # ug/sqrt(Hz)
    elapsed = time.perf_counter() - start
    assert sens == pytest.approx(1.6, rel=0.15)
    assert elapsed < 10.0
    print(
        f"PASS 100 Hz sensitivity: {sens:.3f} ug/sqrt(Hz) "
        f"(target 1.6 +- 15%), phase noise {dphi * 1e3:.2f} mrad, {elapsed:.2f} s"
    )


def test_data_rate_sweep_endpoints(tmp_path):
    # sweep must hit 0.57 ug/sqrt(Hz) at 50 Hz and 36.7 at 330 Hz within 30%,
    # duty cycle 75% -> 30% within 5 points, sensitivity monotone in rate
    start = time.perf_counter()
    _cli(
        "--seed", "404", "--out-dir", str(tmp_path),
        "sweep", "--mc-shots", "10000",
    )
    with open(tmp_path / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_rate = {float(r["data_rate"]): r for r in rows}
    sens50 = float(by_rate[50.0]["sensitivity_measured"]) * 1e6
    sens330 = float(by_rate[330.0]["sensitivity_measured"]) * 1e6
    duty50 = float(by_rate[50.0]["duty_cycle"])
    duty330 = float(by_rate[330.0]["duty_cycle"])
    measured = [float(r["sensitivity_measured"]) for r in rows]
    elapsed = time.perf_counter() - start

    assert sens50 == pytest.approx(0.57, rel=0.30)
    assert sens330 == pytest.approx(36.7, rel=0.30)
    assert duty50 == pytest.approx(0.75, abs=0.05)
    assert duty330 == pytest.approx(0.30, abs=0.05)
    assert all(a < b for a, b in zip(measured, measured[1:]))
    assert elapsed < 60.0
    print(
        f"PASS rate sweep: {sens50:.3f} ug/sqrt(Hz) @ 50 Hz (target 0.57 +- 30%), "
        f"{sens330:.1f} @ 330 Hz (target 36.7 +- 30%), duty {duty50:.3f} -> {duty330:.3f}, "
        f"monotone over {len(rows)} rates, {elapsed:.1f} s"
    )


def test_gravity_recovery_across_seeds():
    # 20 seeded chirp-off scans: >= 18 must land within 3 sigma of the
    # configured gravity, with per-fit sigma of order 1e-5 m/s^2
    start = time.perf_counter()
    cfg = default_config(100.0)
    hits, sigmas = 0, []
    for seed in range(20):
        series = simulate_gravity_scan(cfg, seed=seed)
        fit = fit_chirped_gravity(series.scan_values, series.populations, cfg)
        sigmas.append(fit.sigma_gravity)
        if abs(fit.gravity - G_LOCAL) < 3 * fit.sigma_gravity:
            hits += 1
    median_sigma = float(np.median(sigmas))
    elapsed = time.perf_counter() - start
    assert hits >= 18
    assert 3e-6 < median_sigma < 3e-5
    assert elapsed < 120.0
    print(
        f"PASS gravity: {hits}/20 fits within 3 sigma, "
        f"median sigma {median_sigma:.2e} m/s^2 (order 1e-5), {elapsed:.1f} s"
    )


def test_allan_white_noise_slope_and_injected_bump():
    # 1e5 white-noise shots: log-log Allan slope -0.5 +- 0.05 over two
    # decades; with a tone injected, a local maximum near half its period
    start = time.perf_counter()
    cfg = default_config(100.0)
    series = simulate_mid_fringe(cfg, shots=100_000, seed=7)
    curve = allan_of_series(series)
    # two decades: cycle time 0.01 s up to 1 s, all with plentiful bins
    slope = allan_slope(curve, tau_max=1.0 + 1e-9)
    assert slope == pytest.approx(-0.5, abs=0.05)

    period = 1.0
    noisy = default_config(
        100.0,
        noise=NoiseBudget(
            injectors=(DisturbanceInjector(frequency=1.0 / period, amplitude=0.04),)
        ),
    )
    bumped = simulate_mid_fringe(noisy, shots=100_000, seed=7)
    bcurve = allan_of_series(bumped)
    s = bcurve.sigmas
    local_max_taus = [
        bcurve.taus[i]
        for i in range(1, len(s) - 1)
        if s[i] > s[i - 1] and s[i] > s[i + 1]
    ]
    elapsed = time.perf_counter() - start
    assert any(0.25 * period <= t <= 0.75 * period for t in local_max_taus), (
        f"no Allan maximum near half the injected period; maxima at {local_max_taus}"
    )
    assert elapsed < 30.0
    print(
        f"PASS Allan: white slope {slope:.3f} (target -0.5 +- 0.05), "
        f"injected-tone maxima at {[f'{t:.2f}' for t in local_max_taus]} s "
        f"for period {period} s, {elapsed:.1f} s"
    )


def test_noise_budget_quadrature_and_projection_margin():
    # 21 and 15 mrad in quadrature: 26 +- 1 mrad; that budget must sit 5 to
    # 15 times above the projection floor of 8.6e4 participating atoms
    budget = NoiseBudget(raman_phase_noise=0.021, magnetic_noise=0.015)
    quad = quadrature_total(budget) * 1e3
    assert quad == pytest.approx(26.0, abs=1.0)
    floor = projection_noise_phase(8.6e4)
    ratio = budget_total(default_config(100.0).noise) / floor
    assert 5.0 <= ratio <= 15.0
    print(
        f"PASS noise budget: quadrature {quad:.2f} mrad (target 26 +- 1), "
        f"budget/projection ratio {ratio:.2f} (target 5..15)"
    )


def test_recapture_band_and_monte_carlo_oracle():
    # defaults from 50 to 330 Hz recapture 85..95% of the cloud, fraction
    # non-increasing with time of flight; closed form matches a 1e6-sample
    # Monte-Carlo reference to 1e-3
    start = time.perf_counter()
    fractions = {}
    for rate in (50.0, 100.0, 330.0):
        cfg = default_config(rate)
        released = CloudState(
            atom_number=1.0,
            temperature=cfg.mot.post_cooling_temperature,
            rms_radius=cfg.mot.initial_cloud_radius,
        )
        fallen = cloud_after_tof(
            released, cfg.timing.free_fall_time, cfg.physical.gravity,
            cfg.physical.atom_mass,
        )
        f = recapture_fraction(fallen, cfg.mot)
        assert 0.85 <= f <= 0.95, f"recapture {f:.4f} out of band at {rate} Hz"
        fractions[rate] = f

        rng = np.random.default_rng(int(rate))
        pos = rng.normal(0.0, fallen.rms_radius, size=(1_000_000, 3))
        pos[:, 2] += fallen.centroid_position
        mc = float(
            (np.linalg.norm(pos, axis=1) <= cfg.mot.capture_radius).mean()
        )
        assert abs(f - mc) < 1e-3, f"closed form {f:.6f} vs MC {mc:.6f} at {rate} Hz"

    cfg = default_config(100.0)
    released = CloudState(
        atom_number=1.0,
        temperature=cfg.mot.post_cooling_temperature,
        rms_radius=cfg.mot.initial_cloud_radius,
    )
    tofs = np.linspace(1e-3, 20e-3, 12)
    seq = [
        recapture_fraction(
            cloud_after_tof(released, t, cfg.physical.gravity, cfg.physical.atom_mass),
            cfg.mot,
        )
        for t in tofs
    ]
    elapsed = time.perf_counter() - start
    assert all(a >= b for a, b in zip(seq, seq[1:]))
    assert elapsed < 30.0
    print(
        "PASS recapture: "
        + ", ".join(f"{r:g} Hz -> {f:.4f}" for r, f in fractions.items())
        + f" (band 0.85..0.95), non-increasing with TOF, MC within 1e-3, {elapsed:.1f} s"
    )


def test_equilibrium_atom_number():
    # default 100 Hz cycle settles at 2e5 atoms within 20%; the closed-form
    # fixed point agrees with 1000 iterations of the cycle map to 0.1%
    cfg = default_config(100.0)
    closed = equilibrium_atom_number(cfg)
    assert closed == pytest.approx(2e5, rel=0.20)
    state = CloudState(
        atom_number=10 * closed,
        temperature=cfg.mot.post_cooling_temperature,
        rms_radius=cfg.mot.initial_cloud_radius,
    )
    for _ in range(1000):
        state = evolve_cycle(state, cfg)
    assert state.atom_number == pytest.approx(closed, rel=1e-3)
    print(
        f"PASS equilibrium: {closed:,.0f} atoms (target 2e5 +- 20%), "
        f"1000-cycle iteration within 0.1%"
    )


class TestPropertySuite:
    def test_same_seed_byte_identical(self, tmp_path):
        start = time.perf_counter()
        cfg = default_config(100.0)
        a = simulate_mid_fringe(cfg, shots=2000, seed=55)
        b = simulate_mid_fringe(cfg, shots=2000, seed=55)
        for x, y in (
            (a.populations, b.populations),
            (a.phase_noise, b.phase_noise),
            (a.f2_counts, b.f2_counts),
            (a.total_counts, b.total_counts),
        ):
            assert x.tobytes() == y.tobytes()
        # and through the CLI, file for file
        one, two = tmp_path / "one", tmp_path / "two"
        for d in (one, two):
            _cli("--seed", "42", "--out-dir", str(d), "simulate", "--shots", "150")
        assert (one / "simulate.csv").read_bytes() == (two / "simulate.csv").read_bytes()
        print(
            f"PASS determinism: array and file outputs byte-identical "
            f"({time.perf_counter() - start:.2f} s)"
        )

    def test_quantization_idempotent(self):
        for d in np.geomspace(1e-8, 10.0, 4000):
            once = quantize_duration(float(d))
            assert quantize_duration(once) == once
        print("PASS quantization idempotent over 4000 durations")

    def test_transition_probability_range(self):
        rng = np.random.default_rng(1)
        dphi = rng.uniform(-50, 50, 100_000)
        p = transition_probability(dphi, FringeModel(contrast=1.0, offset=0.5))
        assert p.min() >= 0.0 and p.max() <= 1.0
        p2 = transition_probability(dphi, FringeModel(contrast=0.8, offset=0.45))
        assert p2.min() >= 0.0 and p2.max() <= 1.0
        print("PASS transition probability bounded on 1e5 phases")

    def test_phase_acceleration_round_trip(self):
        cfg = default_config(100.0)
        k = cfg.physical.effective_wavevector
        T = cfg.timing.interrogation_T
        rng = np.random.default_rng(3)
        for a in rng.uniform(-0.5, 0.5, 200):
            phi = mz_phase(
                float(a), k, T, chirp_rate=0.0,
                laser=PulseSequencePhases(0.0, 0.0, 0.0),
            )
            back = phase_to_accel(phi, k, T)
            assert abs(back - a) < 1e-12 * max(1.0, abs(a))
        print("PASS mz_phase/phase_to_accel round trip at 1e-12 on 200 draws")

    @pytest.mark.parametrize("p_true", [0.1, 0.5, 0.9])
    def test_readout_estimator_unbiased(self, p_true):
        start = time.perf_counter()
        cfg = default_config(100.0)
        rng = np.random.default_rng(int(p_true * 1000))
        n_atoms = 2e5
        draws = 4000
        estimates = np.empty(draws)
        for i in range(draws):
            f2, tot = simulate_detection(p_true, n_atoms, cfg.detection, rng)
            estimates[i] = normalized_population(
                f2, tot, cfg.detection.spectator_fraction
            )
        se = estimates.std(ddof=1) / math.sqrt(draws)
        bias = float(estimates.mean()) - p_true
        assert abs(bias) <= 3 * se, f"bias {bias:.2e} exceeds 3 x SE {se:.2e}"
        assert time.perf_counter() - start < 60.0
        print(
            f"PASS unbiased readout at p={p_true}: bias {bias:+.2e} "
            f"within 3 x SE {se:.2e} over {draws} draws"
        )

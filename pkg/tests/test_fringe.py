import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpaisim.core import PhysicalParams, pi_pulse_duration
from lpaisim.errors import ConfigError
from lpaisim.fringe import (
    PULSE_SCALE,
    FringeModel,
    PulseSequencePhases,
    accel_to_phase,
    chirped_fringe,
    chirped_phase,
    doppler_chirp_rate,
    exponential_envelope,
    mz_phase,
    phase_to_accel,
    transition_probability,
)

PARAMS = PhysicalParams()
K = PARAMS.effective_wavevector
G = PARAMS.gravity


class TestMzPhase:
    def test_matches_hand_formula(self):
        # independent oracle: (k g - chirp) T^2 + (phi1 - 2 phi2 + phi3)
        T = 2.5e-3
        chirp = 1.577e8
        phases = PulseSequencePhases(phi1=0.1, phi2=0.25, phi3=0.07,
                                     applied_scan_phase=0.4)
        expect = (K * G - chirp) * T * T + (0.1 - 2 * 0.25 + 0.07) + 0.4
        assert mz_phase(G, K, T, chirp, phases) == pytest.approx(expect, rel=1e-14)

    def test_matched_chirp_cancels_kinematic_phase(self):
        T = 3.3482e-3
        chirp = doppler_chirp_rate(K, G)
        assert mz_phase(G, K, T, chirp) == pytest.approx(0.0, abs=1e-9)

    def test_scales_quadratically_with_T(self):
        p1 = mz_phase(G, K, 1e-3)
        p2 = mz_phase(G, K, 2e-3)
        assert p2 == pytest.approx(4 * p1, rel=1e-12)

    def test_negative_T_rejected(self):
        with pytest.raises(ConfigError):
            mz_phase(G, K, -1e-3)


class TestDopplerChirp:
    def test_value(self):
        # k g / 2 pi in kHz per ms
        khz_per_ms = doppler_chirp_rate(K, G) / (2 * math.pi) / 1e3 / 1e3
        assert khz_per_ms == pytest.approx(25.0995, rel=1e-4)


class TestPhaseAccelConversion:
    def test_scale_factor(self):
        # pi of phase at T = 3.415 ms
        a = phase_to_accel(math.pi, K, 3.415e-3)
        assert a == pytest.approx(0.016727, rel=1e-3)

    @given(
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=1e-4, max_value=1e-2),
    )
    def test_round_trip(self, accel, T):
        phase = accel_to_phase(accel, K, T)
        back = phase_to_accel(phase, K, T)
        assert back == pytest.approx(accel, rel=1e-12, abs=1e-15)

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ConfigError):
            phase_to_accel(1.0, K, 0.0)
        with pytest.raises(ConfigError):
            phase_to_accel(1.0, 0.0, 1e-3)


class TestTransitionProbability:
    def test_midpoint_and_extremes(self):
        fm = FringeModel(contrast=1.0, offset=0.5, phase_origin=0.0)
        assert transition_probability(0.0, fm) == pytest.approx(0.0)
        assert transition_probability(math.pi, fm) == pytest.approx(1.0)
        assert transition_probability(math.pi / 2, fm) == pytest.approx(0.5)

    def test_quadrature_slope_sign(self):
        # just past quadrature the population rises with phase
        fm = FringeModel()
        lo = transition_probability(math.pi / 2 - 1e-3, fm)
        hi = transition_probability(math.pi / 2 + 1e-3, fm)
        assert hi > lo

    @given(
        st.floats(min_value=-50, max_value=50),
        st.floats(min_value=0.05, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_range(self, dphi, contrast, offset, origin):
        fm = FringeModel(contrast=contrast, offset=offset, phase_origin=origin)
        p = transition_probability(dphi, fm)
        assert 0.0 <= p <= 1.0

    def test_vectorized(self):
        fm = FringeModel()
        dphi = np.linspace(0, 2 * math.pi, 7)
        p = transition_probability(dphi, fm)
        assert p.shape == dphi.shape
        assert p[0] == pytest.approx(0.0)


class TestChirpedFringe:
    def test_phase_polynomial_coefficients(self):
        # theta(T) - phi0 = c1 T + c2 T^2 with c1 = tau_pi k g (1 + 2/pi)
        tau_pi = pi_pulse_duration(PARAMS.rabi_frequency)
        c1 = tau_pi * K * G * PULSE_SCALE
        assert c1 == pytest.approx(801.6, rel=1e-3)
        T = np.array([1e-3, 2e-3, 5e-3])
        theta = chirped_phase(T, G, PARAMS, phase_origin=0.3)
        assert theta == pytest.approx(0.3 + c1 * T + K * G * T * T, rel=1e-12)

    def test_fringe_count_over_scan(self):
        # the quadratic term alone wraps k g t_max^2 / 2 pi times
        t_max = 7e-3
        wraps = K * G * t_max**2 / (2 * math.pi)
        assert 1220 < wraps < 1240

    def test_envelope_decay(self):
        env = exponential_envelope(10e-3)
        assert env(0.0) == pytest.approx(1.0)
        assert env(10e-3) == pytest.approx(math.exp(-1))
        with pytest.raises(ConfigError):
            exponential_envelope(-1.0)

    def test_fringe_values(self):
        fm = FringeModel(contrast=1.0, offset=0.5, phase_origin=math.pi)
        # at T=0 the fringe sits at offset + a0 cos(phi0) = 0.5 - a0
        p0 = chirped_fringe(0.0, G, PARAMS, fm, amplitude=0.5)
        assert p0 == pytest.approx(0.0)
        # with an envelope, the swing shrinks but the center stays put
        env = exponential_envelope(5e-3)
        T = np.linspace(0, 7e-3, 2001)
        p = chirped_fringe(T, G, PARAMS, fm, envelope=env, amplitude=0.5)
        assert np.all((p >= 0.0) & (p <= 1.0))
        assert p.mean() == pytest.approx(0.5, abs=0.02)

    def test_default_amplitude_is_half_contrast(self):
        fm = FringeModel(contrast=0.8, offset=0.5, phase_origin=0.0)
        p = chirped_fringe(0.0, G, PARAMS, fm)
        assert p == pytest.approx(0.5 + 0.4)

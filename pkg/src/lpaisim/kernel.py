"""Shot-loop kernel selection.

Prefers the compiled extension; falls back to the pure-Python loop when the
extension is missing or when LPAISIM_PURE_PYTHON=1 is set. Both produce
bit-identical output for the same seed (covered by the parity test), so the
choice only affects speed.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("LPAISIM_PURE_PYTHON", "") == "1":
    from . import _shotloop_py as _impl

    IMPLEMENTATION = "python"
else:
    try:
        from . import _shotloop as _impl  # type: ignore[attr-defined]

        IMPLEMENTATION = "cython"
    except ImportError:
        from . import _shotloop_py as _impl

        IMPLEMENTATION = "python"


def _as_f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _resolve_impl(implementation):
    """None means the import-time choice; 'cython' or 'python' force one."""
    if implementation is None:
        return _impl
    if implementation == "python":
        from . import _shotloop_py

        return _shotloop_py
    if implementation == "cython":
        from . import _shotloop   # raises ImportError when not built

        return _shotloop
    raise ValueError(f"unknown kernel implementation {implementation!r}")


def run_shots(
    rng,
    theta,
    amp,
    offset: float,
    sigma: float,
    times,
    injectors=(),
    n_part: int = 0,
    n_total: int = 0,
    gamma: float = 0.0,
    participating_fraction: float = 1.0,
    detect: bool = True,
    implementation=None,
):
    """Run the per-shot loop over precomputed deterministic inputs.

    theta, amp, times : per-shot phase, cosine amplitude, and timestamp arrays
        (population model p_i = offset + amp_i * cos(theta_i + noise_i)).
    sigma : white phase-noise standard deviation (rad/shot).
    injectors : iterable of DisturbanceInjector for deterministic phase terms.
    n_part, n_total : participating / fluorescing atom counts for detection.
    gamma : mean detected photons per atom per pulse.
    detect : when false, populations are the exact probabilities and the
        count channels stay zero.

    Returns (phase_noise, populations, f2_counts, total_counts); raises on
    detection shots whose total signal is empty.
    """
    theta = _as_f64(theta)
    amp = _as_f64(amp)
    times = _as_f64(times)
    if amp.shape != theta.shape or times.shape != theta.shape:
        raise ValueError("theta, amp, times must have identical shapes")
    inj_omega = _as_f64([2.0 * np.pi * inj.frequency for inj in injectors])
    inj_amp = _as_f64([inj.amplitude for inj in injectors])
    inj_phase = _as_f64([inj.phase for inj in injectors])

    impl = _resolve_impl(implementation)
    noise, pops, f2, tot, degenerate = impl.run_shots(
        rng,
        theta,
        amp,
        float(offset),
        float(sigma),
        inj_omega,
        inj_amp,
        inj_phase,
        times,
        int(n_part),
        int(n_total),
        float(gamma),
        1.0 / float(participating_fraction),
        bool(detect),
    )
    if degenerate:
        from .errors import DegenerateSignalError

        raise DegenerateSignalError(
            f"{degenerate} shots produced an empty total detection signal"
        )
    return noise, pops, f2, tot

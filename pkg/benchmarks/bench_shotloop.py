"""Timing comparison of the compiled and pure-Python shot loops.

Run: python3 benchmarks/bench_shotloop.py [shots]

Both kernels draw the same random stream, so the benchmark double-checks
bit-for-bit parity while it measures throughput.
"""

import sys
import time

import numpy as np

from lpaisim.kernel import run_shots
from lpaisim.noise import DisturbanceInjector


def make_inputs(shots):
    theta = np.linspace(0.0, 40.0, shots)
    amp = np.full(shots, -0.5)
    times = np.arange(shots) * 0.01
    inj = (DisturbanceInjector(frequency=1.0, amplitude=0.03, phase=0.0),)
    return theta, amp, times, inj


def run(impl, shots, seed=1234):
    theta, amp, times, inj = make_inputs(shots)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    t0 = time.perf_counter()
    out = run_shots(
        rng, theta, amp, 0.5, 0.0311, times, injectors=inj,
        n_part=86000, n_total=200000, gamma=10.07,
        participating_fraction=0.43, detect=True, implementation=impl,
    )
    return time.perf_counter() - t0, out


def main():
    shots = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000

    try:
        # Warm-up and parity reference.
        _, ref = run("cython", shots)
        have_cython = True
    except ImportError:
        have_cython = False
        print("compiled kernel not built; timing the pure-Python loop only")

    t_py, out_py = run("python", shots)
    print(f"python : {shots} shots in {t_py:8.3f} s  ({shots / t_py:12,.0f} shots/s)")

    if have_cython:
        t_cy, out_cy = run("cython", shots)
        print(f"cython : {shots} shots in {t_cy:8.3f} s  ({shots / t_cy:12,.0f} shots/s)")
        print(f"speedup: {t_py / t_cy:.1f}x")
        for name, a, b in zip(("noise", "pops", "f2", "tot"), out_cy, out_py):
            if not np.array_equal(np.asarray(a), np.asarray(b)):
                raise SystemExit(f"PARITY FAILURE in {name}")
        print("parity : all output arrays bit-identical")


if __name__ == "__main__":
    main()

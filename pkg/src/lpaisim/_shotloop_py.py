"""Pure-Python per-shot loop, bit-identical to the compiled kernel.

Generator.normal/binomial/poisson with scalar arguments call the same numpy
C distribution functions the compiled loop calls, so for the same seed and
the same call order the two implementations consume the PCG64 stream
identically. Keep the arithmetic expression trees in step with _shotloop.pyx;
any reordering breaks bit parity.
"""

from __future__ import annotations

from math import cos, sin

import numpy as np


def run_shots(
    rng,
    theta,
    amp,
    offset,
    sigma,
    inj_omega,
    inj_amp,
    inj_phase,
    times,
    n_part,
    n_total,
    gamma,
    inv_participating,
    detect,
):
    n = len(theta)
    n_inj = len(inj_omega)

    noise_out = np.empty(n, dtype=np.float64)
    pop_out = np.empty(n, dtype=np.float64)
    f2_out = np.zeros(n, dtype=np.int64)
    tot_out = np.zeros(n, dtype=np.int64)
    degenerate = 0

    theta_l = [float(x) for x in theta]
    amp_l = [float(x) for x in amp]
    times_l = [float(x) for x in times]
    inj = [(float(inj_omega[j]), float(inj_amp[j]), float(inj_phase[j]))
           for j in range(n_inj)]
    offset = float(offset)
    sigma = float(sigma)
    gamma = float(gamma)
    inv_participating = float(inv_participating)
    n_part = int(n_part)
    n_total_f = float(int(n_total))

    normal = rng.normal
    binomial = rng.binomial
    poisson = rng.poisson

    for i in range(n):
        eps = float(normal(0.0, sigma))
        ph = eps
        for omega_j, amp_j, phase_j in inj:
            ph = ph + amp_j * sin(omega_j * times_l[i] + phase_j)
        noise_out[i] = ph
        p = offset + amp_l[i] * cos(theta_l[i] + ph)
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        if detect:
            atoms_f2 = int(binomial(n_part, p))
            c_f2 = int(poisson(float(atoms_f2) * gamma))
            c_tot = int(poisson(n_total_f * gamma))
            f2_out[i] = c_f2
            tot_out[i] = c_tot
            if c_tot > 0:
                q = (float(c_f2) / float(c_tot)) * inv_participating
                if q < 0.0:
                    q = 0.0
                elif q > 1.0:
                    q = 1.0
                pop_out[i] = q
            else:
                degenerate += 1
                pop_out[i] = 0.0
        else:
            pop_out[i] = p

    return noise_out, pop_out, f2_out, tot_out, degenerate

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-shot Monte-Carlo loop.

Consumes the PCG64 stream through numpy's C distribution functions in the
exact order the pure-Python fallback uses its Generator methods, so both
implementations are bit-identical for the same seed. Draw order per shot:

    1. normal(0, sigma)                     phase noise (always drawn)
    2. binomial(n_part, p)                  atoms in the F=2 port
    3. poisson(atoms_f2 * gamma)            F=2 photon counts
    4. poisson(n_total * gamma)             total photon counts

Steps 2-4 are skipped entirely when detect is false.
"""

from libc.math cimport cos, sin
from libc.string cimport memset
from libc.stdint cimport int64_t

from cpython.pycapsule cimport PyCapsule_GetPointer

import numpy as np

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    binomial_t,
    random_binomial,
    random_normal,
    random_poisson,
)


def run_shots(object rng,
              double[::1] theta,
              double[::1] amp,
              double offset,
              double sigma,
              double[::1] inj_omega,
              double[::1] inj_amp,
              double[::1] inj_phase,
              double[::1] times,
              int64_t n_part,
              int64_t n_total,
              double gamma,
              double inv_participating,
              bint detect):
    """Simulate len(theta) shots; returns (phase_noise, populations,
    f2_counts, total_counts, n_degenerate)."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t n_inj = inj_omega.shape[0]

    noise_arr = np.empty(n, dtype=np.float64)
    pop_arr = np.empty(n, dtype=np.float64)
    f2_arr = np.zeros(n, dtype=np.int64)
    tot_arr = np.zeros(n, dtype=np.int64)

    cdef double[::1] noise_out = noise_arr
    cdef double[::1] pop_out = pop_arr
    cdef int64_t[::1] f2_out = f2_arr
    cdef int64_t[::1] tot_out = tot_arr

    cdef bitgen_t *state
    cdef binomial_t binom
    memset(&binom, 0, sizeof(binom))

    capsule = rng.bit_generator.capsule
    state = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef Py_ssize_t i, j
    cdef double eps, ph, p, q
    cdef int64_t atoms_f2, c_f2, c_tot
    cdef int64_t degenerate = 0

    with rng.bit_generator.lock, nogil:
        for i in range(n):
            eps = random_normal(state, 0.0, sigma)
            ph = eps
            for j in range(n_inj):
                ph = ph + inj_amp[j] * sin(inj_omega[j] * times[i] + inj_phase[j])
            noise_out[i] = ph
            p = offset + amp[i] * cos(theta[i] + ph)
            if p < 0.0:
                p = 0.0
            elif p > 1.0:
                p = 1.0
            if detect:
                atoms_f2 = random_binomial(state, p, n_part, &binom)
                c_f2 = random_poisson(state, (<double> atoms_f2) * gamma)
                c_tot = random_poisson(state, (<double> n_total) * gamma)
                f2_out[i] = c_f2
                tot_out[i] = c_tot
                if c_tot > 0:
                    q = ((<double> c_f2) / (<double> c_tot)) * inv_participating
                    if q < 0.0:
                        q = 0.0
                    elif q > 1.0:
                        q = 1.0
                    pop_out[i] = q
                else:
                    degenerate = degenerate + 1
                    pop_out[i] = 0.0
            else:
                pop_out[i] = p

    return noise_arr, pop_arr, f2_arr, tot_arr, int(degenerate)

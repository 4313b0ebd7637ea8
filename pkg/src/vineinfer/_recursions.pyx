# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled ARMA(1,1)-GARCH(1,1) filter and simulator."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def arma_garch_recursion(const double[::1] x, double mu, double phi, double theta,
                         double omega, double alpha, double beta, double sigma2_0):
    """Innovations and conditional variances of an ARMA(1,1)-GARCH(1,1) filter."""
    cdef Py_ssize_t n = x.shape[0], t
    eps_arr = np.empty(n)
    s2_arr = np.empty(n)
    cdef double[::1] eps = eps_arr
    cdef double[::1] s2 = s2_arr
    cdef double prev_x = mu / (1.0 - phi)
    cdef double prev_e = 0.0
    cdef double prev_s2 = sigma2_0
    for t in range(n):
        if t == 0:
            s2[t] = sigma2_0
        else:
            s2[t] = omega + alpha * prev_e * prev_e + beta * prev_s2
        eps[t] = x[t] - mu - phi * prev_x - theta * prev_e
        prev_x = x[t]
        prev_e = eps[t]
        prev_s2 = s2[t]
    return eps_arr, s2_arr


def garch_simulate(const double[::1] z, double mu, double phi, double theta,
                   double omega, double alpha, double beta, double sigma2_0):
    """Generate a path driven by standardised innovations ``z``."""
    cdef Py_ssize_t n = z.shape[0], t
    x_arr = np.empty(n)
    s2_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] s2 = s2_arr
    cdef double prev_x = mu / (1.0 - phi)
    cdef double prev_e = 0.0
    cdef double prev_s2 = sigma2_0
    cdef double e
    for t in range(n):
        if t == 0:
            s2[t] = sigma2_0
        else:
            s2[t] = omega + alpha * prev_e * prev_e + beta * prev_s2
        e = z[t] * s2[t] ** 0.5
        x[t] = mu + phi * prev_x + theta * prev_e + e
        prev_x = x[t]
        prev_e = e
        prev_s2 = s2[t]
    return x_arr, s2_arr

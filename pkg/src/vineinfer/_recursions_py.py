"""Pure-Python ARMA(1,1)-GARCH(1,1) filter and simulator (fallback for the compiled kernels)."""

import numpy as np


def arma_garch_recursion(x, mu, phi, theta, omega, alpha, beta, sigma2_0):
    """Innovations and conditional variances of an ARMA(1,1)-GARCH(1,1) filter."""
    x = np.ascontiguousarray(x, dtype=float)
    n = x.shape[0]
    eps = np.empty(n)
    s2 = np.empty(n)
    prev_x = mu / (1.0 - phi)
    prev_e = 0.0
    prev_s2 = sigma2_0
    for t in range(n):
        s2[t] = sigma2_0 if t == 0 else omega + alpha * prev_e * prev_e + beta * prev_s2
        eps[t] = x[t] - mu - phi * prev_x - theta * prev_e
        prev_x, prev_e, prev_s2 = x[t], eps[t], s2[t]
    return eps, s2


def garch_simulate(z, mu, phi, theta, omega, alpha, beta, sigma2_0):
    """Generate a path driven by standardised innovations ``z``."""
    z = np.ascontiguousarray(z, dtype=float)
    n = z.shape[0]
    x = np.empty(n)
    s2 = np.empty(n)
    prev_x = mu / (1.0 - phi)
    prev_e = 0.0
    prev_s2 = sigma2_0
    for t in range(n):
        s2[t] = sigma2_0 if t == 0 else omega + alpha * prev_e * prev_e + beta * prev_s2
        e = z[t] * s2[t] ** 0.5
        x[t] = mu + phi * prev_x + theta * prev_e + e
        prev_x, prev_e, prev_s2 = x[t], e, s2[t]
    return x, s2

"""Independent closed-form references used by the test-suite."""

import numpy as np
from scipy import special, stats


def gaussian_vine_correlation(model):
    """Correlation matrix implied by an all-Gaussian vine (partial correlations on edges)."""
    d = model.d
    sig = np.eye(d)
    for (level, col), cop in sorted(model.copulas.items()):
        e = model.array.edge(level, col)
        a, b = e.var_a - 1, e.var_b - 1
        s = sorted(x - 1 for x in e.cond_set)
        rho = cop.theta[0] if cop.kind == "N" else 0.0
        if cop.family.reflection.negates:
            rho = -rho
        if not s:
            val = rho
        else:
            sss = sig[np.ix_(s, s)]
            sa, sb = sig[a, s], sig[b, s]
            ra = sig[a, a] - sa @ np.linalg.solve(sss, sa)
            rb = sig[b, b] - sb @ np.linalg.solve(sss, sb)
            val = sa @ np.linalg.solve(sss, sb) + rho * np.sqrt(ra * rb)
        sig[a, b] = sig[b, a] = val
    return sig


def gaussian_copula_logpdf(corr, u):
    z = special.ndtri(np.atleast_2d(u))
    mvn = stats.multivariate_normal(mean=np.zeros(len(corr)), cov=corr)
    return mvn.logpdf(z) - stats.norm.logpdf(z).sum(axis=1)


def gaussian_conditional_quantile(corr, u, j, q):
    """Copula-scale quantile of variable ``j`` (0-based) given the other coordinates of ``u``."""
    z = special.ndtri(np.asarray(u, dtype=float))
    rest = [k for k in range(len(corr)) if k != j]
    w = np.linalg.solve(corr[np.ix_(rest, rest)], corr[rest, j])
    mean = z[..., rest] @ w
    sd = np.sqrt(corr[j, j] - corr[j, rest] @ w)
    return special.ndtr(mean + sd * special.ndtri(q))

"""Student-t distribution function and quantile through the regularised incomplete beta."""

import numpy as np
from scipy import special


def t_cdf(nu, x):
    return special.stdtr(nu, x)


def t_ppf(nu, p):
    """Quantile of the standard Student-t with ``nu`` degrees of freedom.

    Uses ``P(|T| > t) = I_{nu/(nu+t^2)}(nu/2, 1/2)``; near the median the
    complementary beta is inverted instead so that small ``|t|`` keeps full
    relative precision.
    """
    p = np.asarray(p, dtype=float)
    tail = 2.0 * np.minimum(p, 1.0 - p)
    far = tail < 0.5
    z = np.empty(p.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = special.betaincinv(nu / 2.0, 0.5, tail[far])
        z[far] = np.sqrt(nu * (1.0 - x) / x)
        y = special.betaincinv(0.5, nu / 2.0, 1.0 - tail[~far])
        z[~far] = np.sqrt(nu * y / (1.0 - y))
    return np.where(p < 0.5, -z, z)

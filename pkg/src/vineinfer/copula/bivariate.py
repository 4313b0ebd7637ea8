"""Bivariate copulas with reflections.

A :class:`BivariateCopula` pairs a :class:`CopulaFamily` (base kind plus a
reflection mode) with a parameter tuple.  The reflected forms are

* first variable reflected:  ``C_u(u, v) = v - C(1 - u, v)``
* survival:                  ``C_s(u, v) = u + v - 1 + C(1 - u, 1 - v)``
* second variable reflected: ``C_v(u, v) = u - C(u, 1 - v)``

Serialised family codes follow the usual vine-table convention: ``N``, ``t``,
``C``, ``G``, ``F``, ``BB1``, ``BB8`` with an optional ``.s``, ``.u`` or
``.v`` suffix, and ``I`` for independence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, optimize

from ..exceptions import ConvergenceError, CopulaDomainError
from . import _families as fam

__all__ = [
    "EPS",
    "Reflection",
    "CopulaFamily",
    "BivariateCopula",
    "clamp",
    "copula_cdf",
    "copula_pdf",
    "hfunc",
    "hinv",
    "simulate_pair",
    "frank_tau",
]

EPS = 1e-10

_NPARAMS = {"I": 0, "N": 1, "t": 2, "C": 1, "G": 1, "F": 1, "BB1": 2, "BB8": 2}


def clamp(u):
    """Clamp u-scores into ``[EPS, 1 - EPS]``."""
    return np.clip(np.asarray(u, dtype=float), EPS, 1.0 - EPS)


class Reflection(enum.Enum):
    NONE = ""
    FIRST = "u"
    SURVIVAL = "s"
    SECOND = "v"

    @property
    def flips_first(self) -> bool:
        return self in (Reflection.FIRST, Reflection.SURVIVAL)

    @property
    def flips_second(self) -> bool:
        return self in (Reflection.SECOND, Reflection.SURVIVAL)

    @property
    def negates(self) -> bool:
        return self in (Reflection.FIRST, Reflection.SECOND)


@dataclass(frozen=True)
class CopulaFamily:
    """Base copula kind together with a reflection mode."""

    kind: str
    reflection: Reflection = Reflection.NONE

    def __post_init__(self):
        if self.kind not in fam.KINDS:
            raise CopulaDomainError(f"unknown copula kind {self.kind!r}")
        if not isinstance(self.reflection, Reflection):
            object.__setattr__(self, "reflection", Reflection(self.reflection))
        if self.kind == "I" and self.reflection is not Reflection.NONE:
            raise CopulaDomainError("the independence copula admits no reflection")

    @property
    def nparams(self) -> int:
        return _NPARAMS[self.kind]

    @property
    def code(self) -> str:
        if self.reflection is Reflection.NONE:
            return self.kind
        return f"{self.kind}.{self.reflection.value}"

    @classmethod
    def from_code(cls, code: str) -> "CopulaFamily":
        kind, _, suffix = code.strip().partition(".")
        try:
            refl = Reflection(suffix)
        except ValueError:
            raise CopulaDomainError(f"unknown reflection suffix in {code!r}") from None
        return cls(kind, refl)

    def swapped(self) -> "CopulaFamily":
        """Family of ``C(v, u)``; base kinds are exchangeable."""
        swap = {Reflection.FIRST: Reflection.SECOND, Reflection.SECOND: Reflection.FIRST}
        return CopulaFamily(self.kind, swap.get(self.reflection, self.reflection))

    def __str__(self):
        return self.code


def _check_domain(kind: str, theta: tuple) -> None:
    if len(theta) != _NPARAMS[kind]:
        raise CopulaDomainError(f"{kind} copula takes {_NPARAMS[kind]} parameter(s), got {len(theta)}")
    if not all(np.isfinite(theta)):
        raise CopulaDomainError(f"non-finite parameter {theta} for {kind} copula")
    ok = True
    if kind == "N":
        ok = -1.0 < theta[0] < 1.0
    elif kind == "t":
        ok = -1.0 < theta[0] < 1.0 and 2.0 <= theta[1] <= 30.0
    elif kind == "C":
        ok = 0.0 < theta[0] <= 28.0
    elif kind == "G":
        ok = 1.0 <= theta[0] <= 17.0
    elif kind == "F":
        ok = -35.0 <= theta[0] <= 35.0 and theta[0] != 0.0
    elif kind == "BB1":
        ok = theta[0] > 0.0 and theta[1] >= 1.0
    elif kind == "BB8":
        ok = theta[0] >= 1.0 and 0.0 < theta[1] <= 1.0
    if not ok:
        raise CopulaDomainError(f"parameter {theta} outside the admissible domain of the {kind} copula")


def _solve_hinv(kind, theta, p, b, tol=1e-13, maxiter=200):
    """Safeguarded Newton search for ``a`` with ``h(a | b) = p``.

    The bracket starts at ``[EPS, 1 - EPS]``; Newton steps that leave the
    current bracket are replaced by bisection.
    """
    p, b = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(b, dtype=float))
    shape = p.shape
    p = p.ravel().copy()
    b = b.ravel().copy()
    out = np.empty_like(p)

    f_lo = fam.hfunc(kind, theta, np.full_like(p, EPS), b) - p
    f_hi = fam.hfunc(kind, theta, np.full_like(p, 1.0 - EPS), b) - p
    at_lo = f_lo >= 0.0
    at_hi = (f_hi <= 0.0) & ~at_lo
    out[at_lo] = EPS
    out[at_hi] = 1.0 - EPS
    idx = np.flatnonzero(~(at_lo | at_hi))
    if idx.size == 0:
        return out.reshape(shape)

    pa, ba = p[idx], b[idx]
    lo = np.full(idx.size, EPS)
    hi = np.full(idx.size, 1.0 - EPS)
    x = np.clip(pa, EPS, 1.0 - EPS)
    for _ in range(maxiter):
        fx = fam.hfunc(kind, theta, x, ba) - pa
        done = (np.abs(fx) <= tol) | (hi - lo <= 4e-16 * np.maximum(x, 1e-300) + 1e-300)
        neg = fx < 0.0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        if np.all(done):
            break
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            dens = np.exp(fam.logpdf(kind, theta, x, ba))
            newton = x - fx / dens
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi)
        mid = 0.5 * (lo + hi)
        x = np.where(done, x, np.where(bad, mid, newton))
    else:
        fx = fam.hfunc(kind, theta, x, ba) - pa
        worst = int(np.argmax(np.abs(fx)))
        if abs(fx[worst]) > 1e-8 and hi[worst] - lo[worst] > 1e-14:
            raise ConvergenceError(
                f"inverse h-function of {kind}{theta} did not converge",
                bracket=(float(lo[worst]), float(hi[worst])),
            )
    out[idx] = x
    return out.reshape(shape)


@dataclass(frozen=True)
class BivariateCopula:
    """A parametric pair-copula.

    Parameters
    ----------
    family : CopulaFamily
    theta : tuple of float
        Parameters in family order: ``(rho,)`` for N, ``(rho, nu)`` for t,
        ``(theta, delta)`` for BB1 and BB8, ``(theta,)`` otherwise.
    """

    family: CopulaFamily
    theta: tuple = ()

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, "family", CopulaFamily.from_code(self.family))
        theta = tuple(float(t) for t in np.atleast_1d(self.theta)) if len(np.atleast_1d(self.theta)) else ()
        object.__setattr__(self, "theta", theta)
        _check_domain(self.family.kind, theta)

    @classmethod
    def independence(cls) -> "BivariateCopula":
        return cls(CopulaFamily("I"), ())

    @property
    def kind(self) -> str:
        return self.family.kind

    @property
    def nparams(self) -> int:
        return self.family.nparams

    def swapped(self) -> "BivariateCopula":
        """The copula of ``(V, U)``."""
        return BivariateCopula(self.family.swapped(), self.theta)

    # -- evaluation ---------------------------------------------------------

    def cdf(self, u, v):
        u, v = clamp(u), clamp(v)
        refl = self.family.reflection
        k, th = self.kind, self.theta
        if refl is Reflection.NONE:
            out = fam.cdf(k, th, u, v)
        elif refl is Reflection.FIRST:
            out = v - fam.cdf(k, th, 1.0 - u, v)
        elif refl is Reflection.SECOND:
            out = u - fam.cdf(k, th, u, 1.0 - v)
        else:
            out = u + v - 1.0 + fam.cdf(k, th, 1.0 - u, 1.0 - v)
        return np.clip(out, 0.0, 1.0)

    def logpdf(self, u, v):
        u, v = clamp(u), clamp(v)
        refl = self.family.reflection
        a = 1.0 - u if refl.flips_first else u
        b = 1.0 - v if refl.flips_second else v
        return fam.logpdf(self.kind, self.theta, a, b)

    def pdf(self, u, v):
        return np.exp(self.logpdf(u, v))

    def h1(self, u, v):
        """``P(U1 <= u | U2 = v)``, the derivative of C in its second argument."""
        u, v = clamp(u), clamp(v)
        refl = self.family.reflection
        a = 1.0 - u if refl.flips_first else u
        b = 1.0 - v if refl.flips_second else v
        r = fam.hfunc(self.kind, self.theta, a, b)
        return np.clip(1.0 - r if refl.flips_first else r, 0.0, 1.0)

    def h2(self, u, v):
        """``P(U2 <= v | U1 = u)``, the derivative of C in its first argument."""
        u, v = clamp(u), clamp(v)
        refl = self.family.reflection
        a = 1.0 - v if refl.flips_second else v
        b = 1.0 - u if refl.flips_first else u
        r = fam.hfunc(self.kind, self.theta, a, b)
        return np.clip(1.0 - r if refl.flips_second else r, 0.0, 1.0)

    def evaluate(self, u, v):
        """``(logpdf, h1, h2)`` at ``(u, v)`` in one pass."""
        u, v = clamp(u), clamp(v)
        refl = self.family.reflection
        a = 1.0 - u if refl.flips_first else u
        b = 1.0 - v if refl.flips_second else v
        lp, ha, hb = fam.evaluate(self.kind, self.theta, a, b)
        if refl.flips_first:
            ha = 1.0 - ha
        if refl.flips_second:
            hb = 1.0 - hb
        return lp, np.clip(ha, 0.0, 1.0), np.clip(hb, 0.0, 1.0)

    def _base_hinv(self, p, b):
        out = fam.hinv(self.kind, self.theta, p, b)
        if out is None:
            out = _solve_hinv(self.kind, self.theta, p, b)
        return clamp(out)

    def hinv1(self, p, v):
        """Solve ``h1(u, v) = p`` for ``u``."""
        p = np.asarray(p, dtype=float)
        v = clamp(v)
        refl = self.family.reflection
        b = 1.0 - v if refl.flips_second else v
        if refl.flips_first:
            return clamp(1.0 - self._base_hinv(1.0 - p, b))
        return self._base_hinv(p, b)

    def hinv2(self, u, p):
        """Solve ``h2(u, v) = p`` for ``v``."""
        p = np.asarray(p, dtype=float)
        u = clamp(u)
        refl = self.family.reflection
        b = 1.0 - u if refl.flips_first else u
        if refl.flips_second:
            return clamp(1.0 - self._base_hinv(1.0 - p, b))
        return self._base_hinv(p, b)

    def simulate(self, n: int, seed=None) -> np.ndarray:
        """Draw ``n`` pairs by the conditional method."""
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.default_rng(seed)
        w = rng.random((n, 2))
        u = clamp(w[:, 0])
        return np.column_stack([u, self.hinv2(u, w[:, 1])])

    # -- summaries ------------------------------------------------------------

    @property
    def tau(self) -> float:
        """Kendall's tau implied by the parameters."""
        t = _base_tau(self.kind, self.theta)
        return -t if self.family.reflection.negates else t

    @property
    def code(self) -> str:
        return self.family.code

    def __str__(self):
        params = ", ".join(f"{t:.4g}" for t in self.theta)
        return f"{self.code}({params})"


# -- Kendall's tau ------------------------------------------------------------

def _debye1(x: float) -> float:
    if x == 0.0:
        return 1.0
    val, _ = integrate.quad(lambda t: t / np.expm1(t) if t != 0.0 else 1.0, 0.0, abs(x))
    d = val / abs(x)
    # D1(-x) = D1(x) + x/2
    return d if x > 0 else d + abs(x) / 2.0


def frank_tau(theta: float) -> float:
    """Kendall's tau of the Frank copula, ``1 - 4/theta * (1 - D1(theta))``."""
    if theta == 0.0:
        return 0.0
    return 1.0 - 4.0 / theta * (1.0 - _debye1(theta))


@lru_cache(maxsize=16)
def _gl_unit(m):
    x, w = leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _numeric_tau(kind, theta):
    # tau = 1 - 4 * int int dC/du * dC/dv du dv
    x, w = _gl_unit(200)
    uu, vv = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w)
    d_du = fam.hfunc(kind, theta, vv, uu)
    d_dv = fam.hfunc(kind, theta, uu, vv)
    return 1.0 - 4.0 * float(np.sum(ww * d_du * d_dv))


def _base_tau(kind, theta):
    if kind == "I":
        return 0.0
    if kind in ("N", "t"):
        return 2.0 / np.pi * np.arcsin(theta[0])
    if kind == "C":
        return theta[0] / (theta[0] + 2.0)
    if kind == "G":
        return 1.0 - 1.0 / theta[0]
    if kind == "F":
        return frank_tau(theta[0])
    if kind == "BB1":
        return 1.0 - 2.0 / (theta[1] * (theta[0] + 2.0))
    return _numeric_tau(kind, theta)


def frank_theta_from_tau(tau: float) -> float:
    """Numerically invert :func:`frank_tau` on ``[-35, 35]``."""
    lo_tau, hi_tau = frank_tau(-35.0), frank_tau(35.0)
    if tau <= lo_tau:
        return -35.0
    if tau >= hi_tau:
        return 35.0
    if abs(tau) < 1e-8:
        return 1e-6 if tau >= 0 else -1e-6
    return optimize.brentq(lambda t: frank_tau(t) - tau, -35.0, 35.0, xtol=1e-10)


# -- functional interface -------------------------------------------------------

def copula_cdf(cop: BivariateCopula, u, v):
    return cop.cdf(u, v)


def copula_pdf(cop: BivariateCopula, u, v):
    return cop.pdf(u, v)


def hfunc(cop: BivariateCopula, cond_on: str, u_free, u_cond):
    """Conditional distribution function of one margin given the other.

    ``cond_on="second"`` gives ``P(U1 <= u_free | U2 = u_cond)``;
    ``cond_on="first"`` gives ``P(U2 <= u_free | U1 = u_cond)``.
    """
    if cond_on == "second":
        return cop.h1(u_free, u_cond)
    if cond_on == "first":
        return cop.h2(u_cond, u_free)
    raise ValueError("cond_on must be 'first' or 'second'")


def hinv(cop: BivariateCopula, cond_on: str, p, u_cond):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("p must lie strictly inside (0, 1)")
    if cond_on == "second":
        return cop.hinv1(p, u_cond)
    if cond_on == "first":
        return cop.hinv2(u_cond, p)
    raise ValueError("cond_on must be 'first' or 'second'")


def simulate_pair(cop: BivariateCopula, n: int, seed=None) -> np.ndarray:
    return cop.simulate(n, seed)

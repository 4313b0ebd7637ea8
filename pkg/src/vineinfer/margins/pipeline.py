"""Per-variable filtering and marginal transforms bundled for a vine model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ..copula.bivariate import clamp
from ..exceptions import InputError
from .garch import GarchFit, fit_arma_garch
from .skewt import MarginModel, fit_skewt

__all__ = ["MarginPipeline", "NormalMargin", "LogNormalMargin", "ParametricMargins", "pit", "inverse_pit"]


def pit(margin, x):
    """u-scores of ``x`` under ``margin``, clamped into the open unit interval."""
    return clamp(margin.cdf(x))


def inverse_pit(margin, u):
    return margin.ppf(clamp(u))


@dataclass(frozen=True)
class NormalMargin:
    loc: float = 0.0
    scale: float = 1.0

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.loc) / self.scale)

    def ppf(self, p):
        return self.loc + self.scale * special.ndtri(p)

    @classmethod
    def fit(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(float(x.mean()), float(x.std(ddof=1)))

    def to_dict(self):
        return {"kind": "normal", "loc": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class LogNormalMargin:
    meanlog: float = 0.0
    sdlog: float = 1.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.where(x > 0, x, np.nan)) - self.meanlog) / self.sdlog
        return np.where(x > 0, special.ndtr(np.nan_to_num(z, nan=-np.inf)), 0.0)

    def ppf(self, p):
        return np.exp(self.meanlog + self.sdlog * special.ndtri(p))

    @classmethod
    def fit(cls, x):
        lx = np.log(np.asarray(x, dtype=float))
        return cls(float(lx.mean()), float(lx.std(ddof=1)))

    def to_dict(self):
        return {"kind": "lognormal", "meanlog": self.meanlog, "sdlog": self.sdlog}


def _margin_from_dict(d):
    kind = d.get("kind", "skewt")
    if kind == "normal":
        return NormalMargin(d["loc"], d["scale"])
    if kind == "lognormal":
        return LogNormalMargin(d["meanlog"], d["sdlog"])
    return MarginModel.from_dict(d)


def _margin_to_dict(m):
    if isinstance(m, MarginModel):
        return {"kind": "skewt", **m.to_dict()}
    return m.to_dict()


@dataclass(frozen=True)
class ParametricMargins:
    """One fixed univariate margin per column, mapping ``(n, d)`` matrices."""

    margins: tuple

    @property
    def d(self):
        return len(self.margins)

    def cdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.d:
            raise InputError(f"expected {self.d} columns, got {x.shape[1]}")
        return np.column_stack([pit(m, x[:, j]) for j, m in enumerate(self.margins)])

    def ppf(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.column_stack([inverse_pit(m, u[:, j]) for j, m in enumerate(self.margins)])

    @classmethod
    def fit(cls, x, family):
        """Fit ``family`` (a class with a ``fit`` method) to every column."""
        x = np.asarray(x, dtype=float)
        return cls(tuple(family.fit(x[:, j]) for j in range(x.shape[1])))

    def to_dict(self):
        return {"margins": [_margin_to_dict(m) for m in self.margins]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(_margin_from_dict(m) for m in d["margins"]))


@dataclass(frozen=True)
class MarginPipeline(ParametricMargins):
    """ARMA-GARCH filters plus skewed-t margins of their standardised residuals.

    ``cdf``/``ppf`` act on the residual scale, the scale on which the vine is
    fitted and on which predictions are made.
    """

    names: tuple = ()
    filters: tuple = field(default=(), repr=False)

    @classmethod
    def fit_series(cls, series, names=None):
        """Filter each column, then fit a skewed t to its residuals.

        Returns ``(pipeline, residuals)``.
        """
        x = np.asarray(series, dtype=float)
        if x.ndim != 2:
            raise InputError("expected an (n, d) matrix")
        d = x.shape[1]
        names = tuple(names) if names is not None else tuple(f"V{j + 1}" for j in range(d))
        fits, margins, resid = [], [], []
        for j in range(d):
            g: GarchFit = fit_arma_garch(x[:, j])
            fits.append(g)
            resid.append(g.residuals)
            margins.append(fit_skewt(g.residuals))
        return cls(tuple(margins), names, tuple(fits)), np.column_stack(resid)

    def to_dict(self):
        return {
            "names": list(self.names),
            "margins": [_margin_to_dict(m) for m in self.margins],
            "filters": [f.to_dict() for f in self.filters],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(_margin_from_dict(m) for m in d["margins"]), tuple(d.get("names", ())), ())

"""Heavy-tailed marginal families on [0, inf).

Every asymptotic formula in this package consumes the same handful of
functionals of a marginal: the tail, the local mass ``F(x, x+t]``, the mean
and the mean of the max-of-two-copies distribution (cdf ``F**2``).  They live
on :class:`Marginal`, which is immutable and safe to share between threads.

All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import integrate, special

FAMILIES = ("pareto", "weibull", "lognormal")


class DomainError(ValueError):
    """Argument outside the support or admissible range of an operation."""


class ConfigurationError(ValueError):
    """Invalid family parameters."""


class UnsupportedFamilyError(ValueError):
    """Operation not available for this family."""


class NumericUnderflowError(ArithmeticError):
    """A denominator underflowed to zero."""


def _check_nonneg(x):
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"x must be >= 0, got {x!r}")


@dataclass(frozen=True)
class Marginal:
    """A nonnegative heavy-tailed distribution.

    Parameters
    ----------
    family : {"pareto", "weibull", "lognormal"}
    params : dict
        ``pareto``: ``alpha`` (> 1), ``k`` (> 0), tail ``(k/(x+k))**alpha``.
        ``weibull``: ``beta`` in (0, 1), tail ``exp(-x**beta)``.
        ``lognormal``: ``mu``, ``sigma`` (> 0).
    """

    family: str
    params: dict = field(default_factory=dict)
    _mean: float = field(init=False, repr=False, compare=False)
    _mean_sq: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        p = {k: float(v) for k, v in self.params.items()}
        object.__setattr__(self, "params", p)
        if fam == "pareto":
            _require(p, "alpha", "k")
            if not p["alpha"] > 1:
                raise ConfigurationError(f"Pareto alpha must be > 1 for a finite mean, got {p['alpha']}")
            if not p["k"] > 0:
                raise ConfigurationError(f"Pareto k must be > 0, got {p['k']}")
        elif fam == "weibull":
            _require(p, "beta")
            if not 0 < p["beta"] < 1:
                raise ConfigurationError(f"Weibull beta must lie in (0, 1), got {p['beta']}")
        elif fam == "lognormal":
            _require(p, "mu", "sigma")
            if not p["sigma"] > 0:
                raise ConfigurationError(f"lognormal sigma must be > 0, got {p['sigma']}")
        else:
            raise ConfigurationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "_mean", self._closed_mean())
        object.__setattr__(self, "_mean_sq", self._closed_mean_sq())

    # -- constructors -----------------------------------------------------
    @classmethod
    def pareto(cls, alpha: float, k: float) -> "Marginal":
        return cls("pareto", {"alpha": alpha, "k": k})

    @classmethod
    def weibull(cls, beta: float) -> "Marginal":
        return cls("weibull", {"beta": beta})

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "Marginal":
        return cls("lognormal", {"mu": mu, "sigma": sigma})

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **self.params}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Marginal":
        d = dict(d)
        try:
            fam = d.pop("family")
        except KeyError:
            raise ConfigurationError("marginal needs a 'family' field") from None
        return cls(fam, d)

    # -- basic functions --------------------------------------------------
    def tail(self, x):
        """Survival function ``1 - cdf(x)``."""
        _check_nonneg(x)
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.family == "pareto":
            out = (p["k"] / (x + p["k"])) ** p["alpha"]
        elif self.family == "weibull":
            out = np.exp(-(x ** p["beta"]))
        else:
            with np.errstate(divide="ignore"):
                z = (np.log(x) - p["mu"]) / p["sigma"]
            out = special.ndtr(-z)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        _check_nonneg(x)
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.family == "pareto":
            out = -np.expm1(-p["alpha"] * np.log1p(x / p["k"]))
        elif self.family == "weibull":
            out = -np.expm1(-(x ** p["beta"]))
        else:
            with np.errstate(divide="ignore"):
                z = (np.log(x) - p["mu"]) / p["sigma"]
            out = special.ndtr(z)
        return out[()] if out.ndim == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q >= 1)):
            raise DomainError("quantile level must lie in [0, 1)")
        p = self.params
        if self.family == "pareto":
            out = p["k"] * np.expm1(-np.log1p(-q) / p["alpha"])
        elif self.family == "weibull":
            out = (-np.log1p(-q)) ** (1.0 / p["beta"])
        else:
            out = np.exp(p["mu"] + p["sigma"] * special.ndtri(q))
        return out[()] if out.ndim == 0 else out

    def density(self, x):
        _check_nonneg(x)
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.family == "pareto":
            a, k = p["alpha"], p["k"]
            out = a * k**a / (x + k) ** (a + 1)
        elif self.family == "weibull":
            b = p["beta"]
            with np.errstate(divide="ignore"):
                out = b * x ** (b - 1) * np.exp(-(x**b))
        else:
            mu, s = p["mu"], p["sigma"]
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(
                    x > 0,
                    np.exp(-((np.log(x) - mu) ** 2) / (2 * s * s)) / (x * s * math.sqrt(2 * math.pi)),
                    0.0,
                )
        return out[()] if out.ndim == 0 else out

    def local_mass(self, x, t=1.0):
        """``F(x, x+t] = cdf(x+t) - cdf(x)`` as a difference of tails without cancellation."""
        _check_nonneg(x)
        if np.any(np.asarray(t) <= 0):
            raise DomainError(f"increment t must be > 0, got {t!r}")
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.family == "pareto":
            a, k = p["alpha"], p["k"]
            out = self.tail(x) * -np.expm1(-a * np.log1p(t / (x + k)))
        elif self.family == "weibull":
            b = p["beta"]
            xb = x**b
            # (x+t)**b - x**b: the expm1 form only where the difference would cancel
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                grow = np.where(t < x, xb * np.expm1(b * np.log1p(t / np.where(x > 0, x, 1.0))), (x + t) ** b - xb)
            out = np.exp(-xb) * -np.expm1(-grow)
        else:
            # both tails tiny far out: ndtr of the negated argument keeps relative precision
            out = self.tail(x) - self.tail(x + t)
        return out[()] if out.ndim == 0 else out

    # -- moments ----------------------------------------------------------
    def mean(self) -> float:
        return self._mean

    def mean_of_square_dist(self) -> float:
        """Mean of the distribution with cdf ``F**2`` (max of two i.i.d. copies)."""
        return self._mean_sq

    def _closed_mean(self) -> float:
        p = self.params
        if self.family == "pareto":
            return p["k"] / (p["alpha"] - 1)
        if self.family == "weibull":
            return math.gamma(1 + 1 / p["beta"])
        return math.exp(p["mu"] + p["sigma"] ** 2 / 2)

    def _closed_mean_sq(self) -> float:
        p = self.params
        if self.family == "pareto":
            a, k = p["alpha"], p["k"]
            return 2 * k / (a - 1) - k / (2 * a - 1)
        if self.family == "weibull":
            g = math.gamma(1 + 1 / p["beta"])
            return 2 * g - 2 ** (-1 / p["beta"]) * g
        # no closed form for lognormal; 1 - F**2 written as tail*(2 - tail)
        return integrate_tail(lambda x: self.tail(x) * (2.0 - self.tail(x)), self, rel_tol=1e-8)

    # -- regularly varying density form ----------------------------------
    def rv_density(self, x):
        """Regularly varying density ``alpha k**alpha / (x+k)**(alpha+1)`` (Pareto only)."""
        if self.family != "pareto":
            raise UnsupportedFamilyError(f"regularly varying density mode needs a Pareto marginal, not {self.family}")
        return self.density(x)

    @property
    def tail_index(self) -> float:
        if self.family != "pareto":
            raise UnsupportedFamilyError(f"{self.family} has no finite tail index")
        return self.params["alpha"]


def _require(p, *names):
    missing = [n for n in names if n not in p]
    if missing:
        raise ConfigurationError(f"missing parameter(s) {missing}")


def truncation_point(m: Marginal, eps: float = 1e-12) -> float:
    """Point beyond which the integral of the tail is below ``eps``."""
    p = m.params
    if m.family == "pareto":
        a, k = p["alpha"], p["k"]
        # int_X^inf (k/(x+k))^a dx = k^a (X+k)^(1-a) / (a-1)
        return (eps * (a - 1) / k**a) ** (1 / (1 - a)) - k
    if m.family == "weibull":
        b = p["beta"]
        # int_X^inf exp(-x^b) dx = Gamma(1/b, X^b) / b
        lo, hi = 1.0, 1.0
        while special.gammaincc(1 / b, hi**b) * math.gamma(1 / b) / b > eps:
            hi *= 2
        while hi - lo > 1e-6 * hi:
            mid = 0.5 * (lo + hi)
            if special.gammaincc(1 / b, mid**b) * math.gamma(1 / b) / b > eps:
                lo = mid
            else:
                hi = mid
        return hi
    mu, s = p["mu"], p["sigma"]
    # int_X^inf sf = E[(L - X)^+]; bound via E[L 1{L>X}] = e^{mu+s^2/2} Phi(s - z)
    z = mu + s * s
    x = math.exp(z)
    while math.exp(mu + s * s / 2) * special.ndtr(s - (math.log(x) - mu) / s) > eps:
        x *= 2
    return x


def integrate_tail(fn, m: Marginal, rel_tol: float = 1e-10) -> float:
    """Integrate a tail-like function on [0, inf) by adaptive Gauss-Kronrod.

    Pieces are log-spaced up to the truncation point of ``m``; whatever lies
    beyond contributes less than 1e-12.
    """
    x_cut = truncation_point(m)
    edges = [0.0, 1.0]
    while edges[-1] < x_cut:
        edges.append(min(edges[-1] * 4, x_cut))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda x: float(fn(x)), a, b, epsabs=0.0, epsrel=rel_tol, limit=200)
        total += val
    return total


def tail_of_convolution_excess(m: Marginal, x: float, rel_tol: float = 1e-8) -> float:
    """``P(X1 + X2 > x) - 2 P(X1 > x)`` for i.i.d. copies, computed without cancellation.

    Splitting on which summand is at most ``x/2``::

        P(X1+X2 > x) = 2 int_0^{x/2} tail(x-t) dF(t) + tail(x/2)**2

    and subtracting ``2 tail(x)`` under the integral leaves a nonnegative
    integrand ``F(x-t, x]``.
    """
    h = x / 2
    t_sw = min(1.0, h)

    # below t_sw: probability scale u = F(t), which absorbs any density
    # singularity at 0 (Weibull with beta < 1)
    def in_u(u):
        t = float(m.quantile(u))
        if t <= 0.0:
            return 0.0
        return float(m.local_mass(x - t, t))

    acc, _ = integrate.quad(in_u, 0.0, float(m.cdf(t_sw)), epsabs=0.0, epsrel=rel_tol, limit=400)

    # above t_sw: plain t scale with the density; F(t) would round to 1 far out
    def in_t(t):
        return float(m.local_mass(x - t, t)) * float(m.density(t))

    edges = [t_sw]
    while edges[-1] < h:
        edges.append(min(edges[-1] * 4, h))
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(in_t, a, b, epsabs=0.0, epsrel=rel_tol, limit=400)
        acc += val
    th = float(m.tail(h))
    return 2 * acc - 2 * float(m.tail(x)) * th + th * th


def tail_of_convolution(m: Marginal, x: float, rel_tol: float = 1e-8) -> float:
    """``P(X1 + X2 > x)`` for two independent copies."""
    return 2 * float(m.tail(x)) + tail_of_convolution_excess(m, x, rel_tol)


def s2_diagnostic(m: Marginal, x: float) -> float:
    """Ratio ``(tail2*(x) - 2 tail(x)) / (2 mean F(x, x+1])``; tends to 1 for second-order subexponential F."""
    denom = 2 * m.mean() * float(m.local_mass(x, 1.0))
    if not denom > 0 or not math.isfinite(denom):
        raise NumericUnderflowError(f"local mass underflows at x={x}")
    return tail_of_convolution_excess(m, x) / denom

"""First- and second-order approximations for joint and sum tails.

For weighted sums ``S = sum_i theta_i X_i`` (i <= n) and
``T = sum_j Theta_j Y_j`` (j <= m) with FGM pairs ``(X_i, Y_i)`` and bounded
random weights independent of the pairs, this module evaluates

* the joint tail ``P(S > x, T > y)``: :func:`joint_asy1`, :func:`joint_asy2`
  and the density form :func:`joint_asy2_rv`;
* the sum tail ``P(S + T > z)``: :func:`sum_asy1`, :func:`sum_asy2` and
  :func:`sum_asy2_rv`;
* the discounted-loss risk model wrappers :func:`risk_joint_asy2` and
  :func:`risk_sum_asy2`.

Remainders are dropped.  Each result carries a breakdown by group so the
retained terms can be inspected.  Expectations over the weights use
Gauss-Legendre quadrature for i.i.d. uniform weights and seeded Monte Carlo
otherwise; pass ``method`` to force either.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .distributions import UnsupportedFamilyError
from .fgm import AsymptoticEstimate, FgmPair
from .weights import DiscountProduct, IidUniform, WeightModel, weight_expectation_quadrature

DEFAULT_N_MC = 1_000_000


@dataclass(frozen=True)
class ModelSpec:
    pair: FgmPair
    weights: WeightModel

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def m(self) -> int:
        return self.weights.m

    def to_dict(self) -> dict:
        return {"pair": self.pair.to_dict(), "weights": self.weights.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(FgmPair.from_dict(d["pair"]), WeightModel.from_dict(d["weights"]))


# -- expectation backends ---------------------------------------------------

class _Quadrature:
    def __init__(self, wm):
        self.wm = wm

    def __call__(self, fn, dims):
        return weight_expectation_quadrature(self.wm, fn, dims)


class _MonteCarlo:
    """Fixed set of weight draws; each expectation returns per-draw values."""

    _cache: dict = {}

    def __init__(self, wm, n_mc, seed, chunk_size=1 << 16):
        key = (wm, n_mc, seed)
        if key not in self._cache:
            ts, Ts = [], []
            for c, size in enumerate(_rng.chunk_sizes(n_mc, chunk_size)):
                gen = _rng.generator(seed, _rng.TAG_WEIGHTS, 0, c)
                t, T = wm.transform(gen.random((size, wm.n_uniforms)))
                ts.append(t)
                Ts.append(T)
            self._cache.clear()
            self._cache[key] = (np.concatenate(ts), np.concatenate(Ts))
        self.theta, self.big_theta = self._cache[key]

    def __call__(self, fn, dims):
        cols = [self.theta[:, i] if name == "theta" else self.big_theta[:, i] for name, i in dims]
        return np.asarray(fn(*cols), dtype=float)


def _integrator(wm, method, n_mc, seed):
    if method is None:
        method = "quadrature" if type(wm) is IidUniform else "mc"
    if method == "quadrature":
        return _Quadrature(wm)
    if method == "mc":
        return _MonteCarlo(wm, n_mc, seed)
    raise ValueError(f"unknown expectation method {method!r}")


class _Groups:
    """Accumulates named groups; values are floats (quadrature) or per-draw arrays (MC)."""

    def __init__(self):
        self.groups: dict[str, object] = {}

    def add(self, name, val, coef=1.0):
        prev = self.groups.get(name, 0.0)
        self.groups[name] = prev + coef * val

    def touch(self, name):
        self.groups.setdefault(name, 0.0)

    def finish(self, first: str, order: str) -> AsymptoticEstimate:
        names = list(self.groups)
        means = {k: float(np.mean(v)) for k, v in self.groups.items()}
        first_val = means[first]
        corr = sum(means[k] for k in names if k != first)
        stderr = 0.0
        arrays = [v for v in self.groups.values() if isinstance(v, np.ndarray) and v.ndim > 0]
        if arrays:
            keep = names if order == "second" else [first]
            total = sum(np.broadcast_to(self.groups[k], arrays[0].shape) for k in keep)
            stderr = float(np.std(total, ddof=1) / math.sqrt(total.size))
        return AsymptoticEstimate(
            first_order=first_val,
            second_order_correction=corr,
            terms=tuple((k, means[k]) for k in names),
            order=order,
            stderr=stderr,
        )


def _check_positive(*vals):
    for v in vals:
        if not v > 0:
            raise ValueError(f"thresholds must be positive, got {v}")


# -- joint tail --------------------------------------------------------------

def _joint_first_order(ms, x, y, E, acc):
    pair, F, G = ms.pair, ms.pair.F, ms.pair.G
    for i in range(ms.n):
        for j in range(ms.m):
            if i == j:
                fn = lambda c, d: pair.joint_tail(x / c, y / d)
            else:
                fn = lambda c, d: F.tail(x / c) * G.tail(y / d)
            acc.add("first_order", E(fn, [("theta", i), ("Theta", j)]))


def joint_asy1(ms: ModelSpec, x: float, y: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """``sum_{i,j} P(theta_i X_i > x, Theta_j Y_j > y)``; same-index pairs use the FGM joint tail."""
    _check_positive(x, y)
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _joint_first_order(ms, x, y, E, acc)
    return acc.finish("first_order", "first")


def joint_asy2(ms: ModelSpec, x: float, y: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """Second-order joint tail approximation.

    Groups in the breakdown:

    ``cross_G``  ``mu_G sum_{i,j} sum_{l != j} E[Theta_l 1{theta_i X_i > x, Theta_j Y_j in (y, y+1]}]``
    ``cross_F``  ``mu_F sum_{i,j} sum_{l != i} E[theta_l 1{theta_i X_i in (x, x+1], Theta_j Y_j > y}]``
    ``dep_G``    ``r (mu_G2 - mu_G) sum_{i != j} E[Theta_j 1{theta_j X_j > x, Theta_i Y_i in (y, y+1]}]``
    ``dep_F``    ``r (mu_F2 - mu_F) sum_{i != j} E[theta_j 1{theta_i X_i in (x, x+1], Theta_j Y_j > y}]``

    with ``i != j`` ranging over ``1..min(n, m)``.
    """
    _check_positive(x, y)
    pair, F, G, r = ms.pair, ms.pair.F, ms.pair.G, ms.pair.r
    n, m, k = ms.n, ms.m, min(ms.n, ms.m)
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _joint_first_order(ms, x, y, E, acc)
    for g in ("cross_G", "cross_F", "dep_G", "dep_F"):
        acc.touch(g)

    for i in range(n):
        for j in range(m):
            if i == j:
                y_strip = lambda c, d: pair.joint_rect(x / c, y / d, (y + 1) / d)
                x_strip = lambda c, d: pair.joint_rect_x(x / c, (x + 1) / c, y / d)
            else:
                y_strip = lambda c, d: F.tail(x / c) * G.local_mass(y / d, 1 / d)
                x_strip = lambda c, d: F.local_mass(x / c, 1 / c) * G.tail(y / d)
            for l in range(m):
                if l != j:
                    val = E(lambda c, d, e: e * y_strip(c, d), [("theta", i), ("Theta", j), ("Theta", l)])
                    acc.add("cross_G", val, G.mean())
            for l in range(n):
                if l != i:
                    val = E(lambda c, d, e: e * x_strip(c, d), [("theta", i), ("Theta", j), ("theta", l)])
                    acc.add("cross_F", val, F.mean())

    cg = r * (G.mean_of_square_dist() - G.mean())
    cf = r * (F.mean_of_square_dist() - F.mean())
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            val = E(lambda c, d, e: d * F.tail(x / c) * G.local_mass(y / e, 1 / e),
                    [("theta", j), ("Theta", j), ("Theta", i)])
            acc.add("dep_G", val, cg)
            val = E(lambda c, d, e: c * F.local_mass(x / e, 1 / e) * G.tail(y / d),
                    [("theta", j), ("Theta", j), ("theta", i)])
            acc.add("dep_F", val, cf)
    return acc.finish("first_order", "second")


def _require_pareto(*margs):
    for mg in margs:
        if mg.family != "pareto":
            raise UnsupportedFamilyError(f"density form needs Pareto marginals, got {mg.family}")
        if not mg.tail_index > 2:
            raise UnsupportedFamilyError(f"density form needs tail index > 2, got {mg.tail_index}")


def joint_asy2_rv(ms: ModelSpec, x: float, y: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """Joint second-order approximation with local masses replaced by ``E[w**alpha] f(x)``.

    Needs Pareto marginals with tail indices ``alpha, beta > 2``.  Groups:
    ``cross`` (the ``Lambda`` sums), ``dep_strip`` (same-index FGM excess)
    and ``dep_square`` (``mu_U2 - mu_U`` terms).
    """
    _check_positive(x, y)
    pair, F, G, r = ms.pair, ms.pair.F, ms.pair.G, ms.pair.r
    _require_pareto(F, G)
    a, b = F.tail_index, G.tail_index
    fx, gy = float(F.rv_density(x)), float(G.rv_density(y))
    n, m, k = ms.n, ms.m, min(ms.n, ms.m)
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _joint_first_order(ms, x, y, E, acc)
    for g in ("cross", "dep_strip", "dep_square"):
        acc.touch(g)

    for i in range(n):
        for j in range(m):
            for l in range(m):
                if l != j:
                    val = E(lambda c, d, e: e * d**b * F.tail(x / c), [("theta", i), ("Theta", j), ("Theta", l)])
                    acc.add("cross", val, G.mean() * gy)
            for l in range(n):
                if l != i:
                    val = E(lambda c, d, e: e * c**a * G.tail(y / d), [("theta", i), ("Theta", j), ("theta", l)])
                    acc.add("cross", val, F.mean() * fx)

    cg = G.mean_of_square_dist() - G.mean()
    cf = F.mean_of_square_dist() - F.mean()
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            # E[Theta_i Theta_j^beta 1{theta_j X_j > x}] and E[theta_j theta_i^alpha 1{Theta_i Y_i > y}]
            val = E(lambda c, d, e: e * d**b * F.tail(x / c), [("theta", j), ("Theta", j), ("Theta", i)])
            acc.add("dep_strip", val, r * G.mean() * gy)
            val = E(lambda c, d, e: e * c**a * G.tail(y / d), [("theta", i), ("Theta", i), ("theta", j)])
            acc.add("dep_strip", val, r * F.mean() * fx)
            # E[Theta_i Theta_j^beta 1{theta_i X_i > x}] and E[theta_j theta_i^alpha 1{Theta_j Y_j > y}]
            val = E(lambda c, d, e: d * e**b * F.tail(x / c), [("theta", i), ("Theta", i), ("Theta", j)])
            acc.add("dep_square", val, r * cg * gy)
            val = E(lambda c, d, e: e * c**a * G.tail(y / d), [("theta", i), ("Theta", j), ("theta", j)])
            acc.add("dep_square", val, r * cf * fx)
    return acc.finish("first_order", "second")


# -- sum tail ----------------------------------------------------------------

def _sum_first_order(ms, z, E, acc):
    F, G = ms.pair.F, ms.pair.G
    for i in range(ms.n):
        acc.add("first_order", E(lambda c: F.tail(z / c), [("theta", i)]))
    for j in range(ms.m):
        acc.add("first_order", E(lambda d: G.tail(z / d), [("Theta", j)]))


def sum_asy1(ms: ModelSpec, z: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """``sum_i P(theta_i X_i > z) + sum_j P(Theta_j Y_j > z)``."""
    _check_positive(z)
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _sum_first_order(ms, z, E, acc)
    return acc.finish("first_order", "first")


LOCAL_RATIO_BAND = (0.1, 10.0)


def sum_asy2(ms: ModelSpec, z: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """Second-order sum tail approximation.

    Groups: ``within_F`` (``mu_F sum_{i != l} E[theta_i 1{theta_l X_l in (z, z+1]}]``),
    ``within_G``, ``cross`` (``mu_F E[theta_i 1{Theta_j Y_j in .}] + mu_G E[Theta_j 1{theta_i X_i in .}]``
    over all ``i, j``) and ``dep`` (``r``-weighted same-index terms).

    Warns when ``F(z, z+1] / G(z, z+1]`` leaves ``[0.1, 10]``: the expansion
    assumes the two local masses are of the same order.
    """
    _check_positive(z)
    F, G, r = ms.pair.F, ms.pair.G, ms.pair.r
    ratio = float(F.local_mass(z, 1.0)) / float(G.local_mass(z, 1.0))
    lo, hi = LOCAL_RATIO_BAND
    if not lo <= ratio <= hi:
        warnings.warn(
            f"local-mass ratio F(z,z+1]/G(z,z+1] = {ratio:.3g} at z={z} is outside [{lo}, {hi}]; "
            "the sum expansion assumes comparable local masses",
            RuntimeWarning,
            stacklevel=2,
        )
    n, m = ms.n, ms.m
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _sum_first_order(ms, z, E, acc)
    for g in ("within_F", "within_G", "cross", "dep"):
        acc.touch(g)
    lmF = lambda c: F.local_mass(z / c, 1 / c)
    lmG = lambda d: G.local_mass(z / d, 1 / d)
    for i in range(n):
        for l in range(n):
            if i != l:
                acc.add("within_F", E(lambda c, e: c * lmF(e), [("theta", i), ("theta", l)]), F.mean())
    for j in range(m):
        for l in range(m):
            if j != l:
                acc.add("within_G", E(lambda d, e: d * lmG(e), [("Theta", j), ("Theta", l)]), G.mean())
    for i in range(n):
        for j in range(m):
            acc.add("cross", E(lambda c, d: c * lmG(d), [("theta", i), ("Theta", j)]), F.mean())
            acc.add("cross", E(lambda c, d: d * lmF(c), [("theta", i), ("Theta", j)]), G.mean())
    cf = r * (F.mean_of_square_dist() - F.mean())
    cg = r * (G.mean_of_square_dist() - G.mean())
    for i in range(min(n, m)):
        acc.add("dep", E(lambda c, d: c * lmG(d), [("theta", i), ("Theta", i)]), cf)
        acc.add("dep", E(lambda c, d: d * lmF(c), [("theta", i), ("Theta", i)]), cg)
    return acc.finish("first_order", "second")


def sum_asy2_rv(ms: ModelSpec, z: float, method=None, n_mc=DEFAULT_N_MC, seed=0) -> AsymptoticEstimate:
    """Sum second-order approximation in density form; Pareto marginals with one shared index ``alpha > 2``."""
    _check_positive(z)
    F, G, r = ms.pair.F, ms.pair.G, ms.pair.r
    _require_pareto(F, G)
    a = F.tail_index
    if G.tail_index != a:
        raise UnsupportedFamilyError(f"density sum form needs equal tail indices, got {a} and {G.tail_index}")
    fz, gz = float(F.rv_density(z)), float(G.rv_density(z))
    n, m = ms.n, ms.m
    E = _integrator(ms.weights, method, n_mc, seed)
    acc = _Groups()
    _sum_first_order(ms, z, E, acc)
    for g in ("within_F", "within_G", "cross", "dep"):
        acc.touch(g)
    for i in range(n):
        for l in range(n):
            if i != l:
                acc.add("within_F", E(lambda c, e: c * e**a, [("theta", i), ("theta", l)]), F.mean() * fz)
    for j in range(m):
        for l in range(m):
            if j != l:
                acc.add("within_G", E(lambda d, e: d * e**a, [("Theta", j), ("Theta", l)]), G.mean() * gz)
    for i in range(n):
        for j in range(m):
            acc.add("cross", E(lambda c, d: c * d**a, [("theta", i), ("Theta", j)]), F.mean() * gz)
            acc.add("cross", E(lambda c, d: c**a * d, [("theta", i), ("Theta", j)]), G.mean() * fz)
    cf = F.mean_of_square_dist() - F.mean()
    cg = G.mean_of_square_dist() - G.mean()
    for i in range(min(n, m)):
        acc.add("dep", E(lambda c, d: c * d**a, [("theta", i), ("Theta", i)]), r * cf * gz)
        acc.add("dep", E(lambda c, d: c**a * d, [("theta", i), ("Theta", i)]), r * cg * fz)
    return acc.finish("first_order", "second")


# -- discounted-loss risk model ----------------------------------------------

@dataclass(frozen=True)
class RiskConfig:
    """Two business lines over ``n`` periods with discount factors ``R_k ~ U[a1, b1]``, ``Rt_k ~ U[a2, b2]``."""

    pair: FgmPair
    n: int
    a1: float
    b1: float
    a2: float
    b2: float

    def model_spec(self) -> ModelSpec:
        return ModelSpec(self.pair, DiscountProduct(self.n, self.n, self.a1, self.b1, self.a2, self.b2))

    def to_dict(self) -> dict:
        return {"pair": self.pair.to_dict(), "n": self.n,
                "a1": self.a1, "b1": self.b1, "a2": self.a2, "b2": self.b2}

    @classmethod
    def from_dict(cls, d: dict) -> "RiskConfig":
        return cls(FgmPair.from_dict(d["pair"]), int(d["n"]),
                   float(d["a1"]), float(d["b1"]), float(d["a2"]), float(d["b2"]))


def risk_joint_asy2(cfg: RiskConfig, x: float, y: float, **kw) -> AsymptoticEstimate:
    """Both lines' discounted losses over the horizon exceed their surpluses ``x`` and ``y``."""
    return joint_asy2(cfg.model_spec(), x, y, **kw)


def risk_sum_asy2(cfg: RiskConfig, x: float, y: float, **kw) -> AsymptoticEstimate:
    """Total discounted loss exceeds the total surplus ``x + y``."""
    return sum_asy2(cfg.model_spec(), x + y, **kw)

"""Bounded positive random weights, independent of the primary losses.

Three laws are provided:

``IidUniform``
    every coordinate independent, ``theta_i ~ U[a1, b1]``, ``Theta_j ~ U[a2, b2]``.
``Comonotone``
    one uniform drives every coordinate (maximal dependence).
``DiscountProduct``
    ``theta_i = R_1 ... R_i`` and ``Theta_j = Rt_1 ... Rt_j`` with
    ``R_k ~ U[a1, b1]`` and ``Rt_k ~ U[a2, b2]`` all independent; bounds are
    kept per index because they grow geometrically.

Further laws plug in by subclassing :class:`WeightModel` and implementing
``n_uniforms`` and ``transform``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng as _rng
from .distributions import ConfigurationError


class UnsupportedVariantError(ValueError):
    pass


@dataclass(frozen=True)
class WeightBox:
    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        for lo, hi in ((self.a1, self.b1), (self.a2, self.b2)):
            if not lo > 0:
                raise ConfigurationError(f"weight lower bounds must be > 0, got {lo}")
            if hi < lo:
                raise ConfigurationError(f"weight upper bound {hi} below lower bound {lo}")


@dataclass(frozen=True)
class WeightSample:
    theta: np.ndarray  # (n,) or (N, n)
    big_theta: np.ndarray  # (m,) or (N, m)


@dataclass(frozen=True)
class WeightModel:
    n: int
    m: int
    a1: float = 1.0
    b1: float = 1.0
    a2: float = 1.0
    b2: float = 1.0

    kind = "abstract"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigurationError(f"n and m must be >= 1, got n={self.n}, m={self.m}")
        WeightBox(self.a1, self.b1, self.a2, self.b2)

    @property
    def box(self) -> WeightBox:
        lo_t, hi_t, lo_T, hi_T = self.bounds()
        return WeightBox(float(lo_t.min()), float(hi_t.max()), float(lo_T.min()), float(hi_T.max()))

    def bounds(self):
        """Per-index bounds ``(lo_theta, hi_theta, lo_Theta, hi_Theta)``."""
        return (
            np.full(self.n, self.a1),
            np.full(self.n, self.b1),
            np.full(self.m, self.a2),
            np.full(self.m, self.b2),
        )

    @property
    def n_uniforms(self) -> int:
        raise NotImplementedError

    def transform(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map a ``(N, n_uniforms)`` block of uniforms to ``(theta, Theta)``."""
        raise NotImplementedError

    def sample(self, gen: np.random.Generator, size: int | None = None) -> WeightSample:
        U = gen.random((1 if size is None else size, self.n_uniforms))
        t, T = self.transform(U)
        if size is None:
            t, T = t[0], T[0]
        return WeightSample(t, T)

    def mean_theta(self) -> np.ndarray:
        raise NotImplementedError

    def mean_big_theta(self) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "m": self.m,
                "a1": self.a1, "b1": self.b1, "a2": self.a2, "b2": self.b2}

    @staticmethod
    def from_dict(d: dict) -> "WeightModel":
        d = dict(d)
        kind = d.pop("kind", None)
        try:
            cls = _KINDS[kind]
        except KeyError:
            raise ConfigurationError(f"unknown weight model kind {kind!r}; expected one of {sorted(_KINDS)}") from None
        return cls(**{k: (int(v) if k in ("n", "m") else float(v)) for k, v in d.items()})


@dataclass(frozen=True)
class IidUniform(WeightModel):
    kind = "iid_uniform"

    @property
    def n_uniforms(self) -> int:
        return self.n + self.m

    def transform(self, U):
        t = self.a1 + (self.b1 - self.a1) * U[:, : self.n]
        T = self.a2 + (self.b2 - self.a2) * U[:, self.n : self.n + self.m]
        return t, T

    def mean_theta(self):
        return np.full(self.n, 0.5 * (self.a1 + self.b1))

    def mean_big_theta(self):
        return np.full(self.m, 0.5 * (self.a2 + self.b2))


@dataclass(frozen=True)
class Comonotone(WeightModel):
    kind = "comonotone"

    @property
    def n_uniforms(self) -> int:
        return 1

    def transform(self, U):
        u = U[:, :1]
        t = np.repeat(self.a1 + (self.b1 - self.a1) * u, self.n, axis=1)
        T = np.repeat(self.a2 + (self.b2 - self.a2) * u, self.m, axis=1)
        return t, T

    def mean_theta(self):
        return np.full(self.n, 0.5 * (self.a1 + self.b1))

    def mean_big_theta(self):
        return np.full(self.m, 0.5 * (self.a2 + self.b2))


@dataclass(frozen=True)
class DiscountProduct(WeightModel):
    kind = "discount_product"

    @property
    def n_uniforms(self) -> int:
        return self.n + self.m

    def transform(self, U):
        R = self.a1 + (self.b1 - self.a1) * U[:, : self.n]
        Rt = self.a2 + (self.b2 - self.a2) * U[:, self.n : self.n + self.m]
        return np.cumprod(R, axis=1), np.cumprod(Rt, axis=1)

    def bounds(self):
        i = np.arange(1, self.n + 1)
        j = np.arange(1, self.m + 1)
        return self.a1**i, self.b1**i, self.a2**j, self.b2**j

    def mean_theta(self):
        return (0.5 * (self.a1 + self.b1)) ** np.arange(1, self.n + 1)

    def mean_big_theta(self):
        return (0.5 * (self.a2 + self.b2)) ** np.arange(1, self.m + 1)


_KINDS = {c.kind: c for c in (IidUniform, Comonotone, DiscountProduct)}


def sample_weights(wm: WeightModel, gen: np.random.Generator) -> WeightSample:
    return wm.sample(gen)


@dataclass(frozen=True)
class Expectation:
    value: float
    stderr: float


def _chunk_moments(wm, functional, seed, chunk, size):
    gen = _rng.generator(seed, _rng.TAG_WEIGHTS, 0, chunk)
    t, T = wm.transform(gen.random((size, wm.n_uniforms)))
    vals = np.asarray(functional(WeightSample(t, T)), dtype=float)
    mean = vals.mean()
    return size, mean, float(((vals - mean) ** 2).sum())


def weight_expectation(
    wm: WeightModel,
    functional: Callable[[WeightSample], np.ndarray],
    n_mc: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    chunk_size: int = 1 << 16,
) -> Expectation:
    """Plain Monte Carlo mean of ``functional`` over weight draws.

    ``functional`` receives a batched :class:`WeightSample` (arrays of shape
    ``(N, n)`` and ``(N, m)``) and returns ``N`` values.  Chunks are merged
    in index order, so the result does not depend on ``workers``.
    """
    if n_mc < 10_000:
        raise ValueError(f"n_mc must be >= 1e4, got {n_mc}")
    sizes = _rng.chunk_sizes(n_mc, chunk_size)
    jobs = [(wm, functional, seed, c, s) for c, s in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _chunk_moments(*a), jobs))
    else:
        parts = [_chunk_moments(*a) for a in jobs]
    # Chan et al. pairwise merge of (count, mean, M2)
    n, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = n + nb
        delta = mb - mean
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * n * nb / tot
        n = tot
    var = m2 / (n - 1)
    return Expectation(float(mean), math.sqrt(var / n))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def weight_expectation_quadrature(
    wm: WeightModel,
    integrand: Callable[..., np.ndarray],
    dims: list[tuple[str, int]],
) -> float:
    """Tensor Gauss-Legendre expectation over the coordinates in ``dims``.

    ``dims`` names the coordinates the integrand reads, e.g.
    ``[("theta", 0), ("Theta", 1)]`` (0-based).  The integrand is called with
    one array per entry of ``dims``.  Only :class:`IidUniform` is supported.
    """
    if type(wm) is not IidUniform:
        raise UnsupportedVariantError(f"quadrature needs i.i.d. uniform weights, not {wm.kind}")
    uniq = list(dict.fromkeys(dims))
    if len(uniq) > 3:
        raise ValueError("quadrature supports at most 3 active coordinates")
    axes, wts = [], []
    for name, idx in uniq:
        if name == "theta":
            if not 0 <= idx < wm.n:
                raise IndexError(f"theta index {idx} out of range")
            lo, hi = wm.a1, wm.b1
        elif name == "Theta":
            if not 0 <= idx < wm.m:
                raise IndexError(f"Theta index {idx} out of range")
            lo, hi = wm.a2, wm.b2
        else:
            raise ValueError(f"unknown coordinate {name!r}")
        axes.append(0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo))
        # weights of the uniform law: GL weights sum to 2
        wts.append(0.5 * _GL_WEIGHTS)
    grids = np.meshgrid(*axes, indexing="ij")
    W = np.ones_like(grids[0]) if grids else np.ones(())
    for k, w in enumerate(wts):
        shape = [1] * len(wts)
        shape[k] = -1
        W = W * w.reshape(shape)
    pos = {d: k for k, d in enumerate(uniq)}
    args = [grids[pos[d]] for d in dims]
    vals = np.broadcast_to(np.asarray(integrand(*args), dtype=float), W.shape)
    return float((W * vals).sum())

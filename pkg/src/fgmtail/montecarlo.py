"""Seeded, chunk-parallel crude Monte Carlo for joint and sum tails.

Each replicate is split into fixed-size chunks; chunk ``c`` of replicate
``k`` draws from its own Philox stream keyed by ``(seed, k, c)``.  Workers
return integer counts, merged by exact integer addition, so a result never
depends on the number of threads.

Besides the direct estimators ``Sim`` this module evaluates the
indicator-sum estimators of ``Asy1``/``Asy2`` used to build the published
tables (:func:`estimate_asy_paper_joint`, :func:`estimate_asy_paper_sum`),
transcribed with their printed coefficients.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel_py
from . import rng as _rng
from .asymptotics import ModelSpec
from .distributions import ConfigurationError
from .weights import IidUniform

try:
    from . import _kernel as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

_BACKENDS = {"python": _kernel_py.count_chunk}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled.count_chunk

_backend = "compiled" if _compiled is not None else "python"

_FAMILY_CODES = {"pareto": _kernel_py.FAM_PARETO, "weibull": _kernel_py.FAM_WEIBULL,
                 "lognormal": _kernel_py.FAM_LOGNORMAL}


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Select the counting kernel, ``"compiled"`` or ``"python"``."""
    global _backend
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _backend = name


@dataclass(frozen=True)
class McSettings:
    n_samples: int = 1_000_000
    n_reps: int = 10
    seed: int = 0
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if self.n_samples < 1000:
            raise ConfigurationError(f"n_samples must be >= 1000, got {self.n_samples}")
        if self.n_reps < 1:
            raise ConfigurationError(f"n_reps must be >= 1, got {self.n_reps}")
        if self.chunk_size < 1:
            raise ConfigurationError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.seed <= _rng.MASK64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {"n_samples": self.n_samples, "n_reps": self.n_reps,
                "seed": self.seed, "chunk_size": self.chunk_size}

    @classmethod
    def from_dict(cls, d: dict) -> "McSettings":
        return cls(**{k: int(v) for k, v in d.items()})


@dataclass(frozen=True)
class McEstimate:
    """Across-replicate mean and standard error.

    With a single replicate the standard error comes from batch means over
    chunks (``nan`` if there is only one chunk).
    """

    mean: float
    stderr: float
    per_rep: tuple = field(default=())


def _marginal_code(mg):
    p = mg.params
    if mg.family == "pareto":
        return _FAMILY_CODES["pareto"], np.array([p["alpha"], p["k"]], dtype=float)
    if mg.family == "weibull":
        return _FAMILY_CODES["weibull"], np.array([p["beta"], 0.0], dtype=float)
    return _FAMILY_CODES["lognormal"], np.array([p["mu"], p["sigma"]], dtype=float)


def _chunk_counts(ms: ModelSpec, mode, t1, t2, seed, rep, chunk, size, count):
    n, m = ms.n, ms.m
    gen = _rng.generator(seed, _rng.TAG_SIMULATION, rep, chunk)
    U = gen.random((size, max(n, m), 2))
    W = gen.random((size, ms.weights.n_uniforms))
    theta, Theta = ms.weights.transform(W)
    famF, pF = _marginal_code(ms.pair.F)
    famG, pG = _marginal_code(ms.pair.G)
    wx, wy = _kernel_py.weighted_primaries(U, theta, Theta, famF, pF, famG, pG, ms.pair.r)
    return count(wx, wy, mode, t1, t2)


def run_counts(ms: ModelSpec, mode: int, t1, t2, s: McSettings, threads: int = 1) -> np.ndarray:
    """Raw event counts, shape ``(n_reps, n_chunks, n_thresholds, n_counts)``."""
    t1 = np.ascontiguousarray(t1, dtype=float)
    t2 = np.ascontiguousarray(t2, dtype=float)
    sizes = _rng.chunk_sizes(s.n_samples, s.chunk_size)
    jobs = [(k, c, sz) for k in range(s.n_reps) for c, sz in enumerate(sizes)]
    count = _BACKENDS[_backend]
    run = lambda j: _chunk_counts(ms, mode, t1, t2, s.seed, j[0], j[1], j[2], count)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    out = np.zeros((s.n_reps, len(sizes), len(t1), _kernel_py.N_COUNTS[mode]), dtype=np.int64)
    for (k, c, _), part in zip(jobs, parts):
        out[k, c] = part
    return out


def _estimate(counts: np.ndarray, sizes, combine) -> McEstimate:
    """``combine`` maps a count vector and a sample size to an estimate (linear in counts)."""
    reps = counts.sum(axis=1)
    N = int(sum(sizes))
    per_rep = np.array([combine(reps[k], N) for k in range(reps.shape[0])])
    mean = float(np.mean(per_rep))
    if len(per_rep) > 1:
        stderr = float(np.std(per_rep, ddof=1) / math.sqrt(len(per_rep)))
    elif counts.shape[1] > 1:
        # batch means over chunks, weighted by chunk size
        v = np.array([combine(counts[0, c], sz) for c, sz in enumerate(sizes)])
        w = np.asarray(sizes, dtype=float)
        sigma2 = float((w * (v - mean) ** 2).sum() / (len(v) - 1))
        stderr = math.sqrt(sigma2 / N)
    else:
        stderr = math.nan
    return McEstimate(mean, stderr, tuple(float(x) for x in per_rep))


def _col(j):
    return lambda c, N: c[j] / N


@dataclass(frozen=True)
class JointGrid:
    sim: list
    asy1_paper: list
    asy2_paper: list  # empty unless the model has the tabulated shape


@dataclass(frozen=True)
class SumGrid:
    sim: list
    asy1_paper: list
    asy2_paper: list


def _paper_shape(ms: ModelSpec) -> bool:
    return ms.n == 2 and ms.m == 2 and type(ms.weights) is IidUniform


def _require_paper_shape(ms: ModelSpec):
    if not _paper_shape(ms):
        raise ConfigurationError(
            "the indicator estimators are defined for n = m = 2 with i.i.d. uniform weights; "
            f"got n={ms.n}, m={ms.m}, weights={ms.weights.kind}"
        )


def _joint_asy2_combiner(ms: ModelSpec):
    F, G, r = ms.pair.F, ms.pair.G, ms.pair.r
    wm = ms.weights
    Et, ET = 0.5 * (wm.a1 + wm.b1), 0.5 * (wm.a2 + wm.b2)
    muF, muF2, muG, muG2 = F.mean(), F.mean_of_square_dist(), G.mean(), G.mean_of_square_dist()
    ca_all = ET * (r * (muG2 - muG) + muG)
    ca_diag = -r * ET * (muG2 - 2 * muG)
    cb_all = Et * (r * (muF2 - muF) + muF)
    cb_diag = -r * Et * (muF2 - 2 * muF)

    def combine(c, N):
        return (c[1] + ca_all * c[2] + ca_diag * c[3] + cb_all * c[4] + cb_diag * c[5]) / N

    return combine


def _sum_asy2_combiner(ms: ModelSpec):
    F, G, r = ms.pair.F, ms.pair.G, ms.pair.r
    wm = ms.weights
    Et, ET = 0.5 * (wm.a1 + wm.b1), 0.5 * (wm.a2 + wm.b2)
    muF, muF2, muG, muG2 = F.mean(), F.mean_of_square_dist(), G.mean(), G.mean_of_square_dist()
    both = Et * muF + ET * muG
    # the double sum over (i, j) of 1{X-strip} + 1{Y-strip} counts each strip twice when n = m = 2
    cx = 2 * both + r * ET * (muG2 - muG) - Et * muF
    cy = 2 * both + r * Et * (muF2 - muF) - ET * muG

    def combine(c, N):
        return (c[1] + cx * c[2] + cy * c[3]) / N

    return combine


def simulate_joint_grid(ms: ModelSpec, points, s: McSettings, threads: int = 1) -> JointGrid:
    """Sim and indicator estimators at every ``(x, y)`` in ``points`` from one set of draws."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    counts = run_counts(ms, _kernel_py.MODE_JOINT, pts[:, 0], pts[:, 1], s, threads)
    sizes = _rng.chunk_sizes(s.n_samples, s.chunk_size)
    sim = [_estimate(counts[:, :, t], sizes, _col(0)) for t in range(len(pts))]
    asy1 = [_estimate(counts[:, :, t], sizes, _col(1)) for t in range(len(pts))]
    asy2 = []
    if _paper_shape(ms):
        comb = _joint_asy2_combiner(ms)
        asy2 = [_estimate(counts[:, :, t], sizes, comb) for t in range(len(pts))]
    return JointGrid(sim, asy1, asy2)


def simulate_sum_grid(ms: ModelSpec, zs, s: McSettings, threads: int = 1) -> SumGrid:
    zs = np.asarray(zs, dtype=float).reshape(-1)
    counts = run_counts(ms, _kernel_py.MODE_SUM, zs, zs, s, threads)
    sizes = _rng.chunk_sizes(s.n_samples, s.chunk_size)
    sim = [_estimate(counts[:, :, t], sizes, _col(0)) for t in range(len(zs))]
    asy1 = [_estimate(counts[:, :, t], sizes, _col(1)) for t in range(len(zs))]
    asy2 = []
    if _paper_shape(ms):
        comb = _sum_asy2_combiner(ms)
        asy2 = [_estimate(counts[:, :, t], sizes, comb) for t in range(len(zs))]
    return SumGrid(sim, asy1, asy2)


def simulate_joint_tail(ms: ModelSpec, x: float, y: float, s: McSettings, threads: int = 1) -> McEstimate:
    """Crude estimate of ``P(S > x, T > y)``."""
    return simulate_joint_grid(ms, [(x, y)], s, threads).sim[0]


def simulate_sum_tail(ms: ModelSpec, z: float, s: McSettings, threads: int = 1) -> McEstimate:
    """Crude estimate of ``P(S + T > z)``."""
    return simulate_sum_grid(ms, [z], s, threads).sim[0]


def estimate_asy_paper_joint(ms: ModelSpec, x: float, y: float, s: McSettings, threads: int = 1):
    """Indicator-sum estimators ``(Asy1, Asy2)`` of the joint tail for ``n = m = 2``.

    ``Asy2`` adds
    ``E[Theta](r(mu_G2 - mu_G) + mu_G) sum_{i,j} 1{theta_i X_i > x, Theta_j Y_j in (y, y+1]}
    - r E[Theta](mu_G2 - 2 mu_G) sum_i 1{theta_i X_i > x, Theta_i Y_i in (y, y+1]}``
    and the mirror-image ``theta``/``F`` terms, averaged over the sample.
    """
    _require_paper_shape(ms)
    g = simulate_joint_grid(ms, [(x, y)], s, threads)
    return g.asy1_paper[0], g.asy2_paper[0]


def estimate_asy_paper_sum(ms: ModelSpec, z: float, s: McSettings, threads: int = 1):
    """Indicator-sum estimators ``(Asy1, Asy2)`` of the sum tail for ``n = m = 2``.

    ``Asy1`` counts the weighted primaries above ``z``, so it tends to 4 as
    ``z -> 0``: it estimates the asymptotic formula, not a probability.
    """
    _require_paper_shape(ms)
    g = simulate_sum_grid(ms, [z], s, threads)
    return g.asy1_paper[0], g.asy2_paper[0]

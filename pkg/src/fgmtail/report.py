"""Experiment configs, table runs, diagnostics and CSV/Markdown output.

Config files are JSON.  Schema (all keys required unless marked optional)::

    {
      "mode": "joint" | "sum" | "risk-joint" | "risk-sum" | "diag",
      "pair": {"r": 0.6,
               "F": {"family": "pareto", "alpha": 2.01, "k": 1.0},
               "G": {"family": "pareto", "alpha": 2.01, "k": 1.0}},
      "weights": {"kind": "iid_uniform" | "comonotone" | "discount_product",
                  "n": 2, "m": 2, "a1": 1, "b1": 2, "a2": 1, "b2": 2},
      "grid": [10, 20] | [[20, 25], [30, 35]],
      "mc": {"n_samples": 10000000, "n_reps": 10, "seed": 0, "chunk_size": 65536},
      "format": "csv" | "markdown",            (optional, default csv)
      "out": "path/or/null",                   (optional)
      "paper_estimators": true,                (optional; extra columns)
      "method": null | "quadrature" | "mc",    (optional; weight expectations)
      "n_mc": 1000000,                         (optional)
      "note": "free text"                      (optional)
    }

``grid`` holds ``z`` values in ``sum`` mode and ``[x, y]`` pairs otherwise
(``risk-sum`` uses ``z = x + y``; ``diag`` reads it as the ``x`` grid of the
second-order ratio).
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace

from scipy import stats

from . import asymptotics as asy
from . import montecarlo as mc
from . import rng as _rng
from .distributions import ConfigurationError, Marginal, NumericUnderflowError, s2_diagnostic
from .fgm import FgmPair, kendall_tau
from .weights import IidUniform, WeightModel

MODES = ("joint", "sum", "risk-joint", "risk-sum", "diag")
FORMATS = ("csv", "markdown")

TABLE1_NOTE = (
    "Weight intervals for this table are not given with the published results; "
    "[a1, b1] = [a2, b2] = [1, 2] is an assumption."
)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    pair: FgmPair
    weights: WeightModel
    grid: tuple
    mc: mc.McSettings = field(default_factory=mc.McSettings)
    format: str = "csv"
    out: str | None = None
    paper_estimators: bool = False
    method: str | None = None
    n_mc: int = asy.DEFAULT_N_MC
    note: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format: expected one of {FORMATS}, got {self.format!r}")
        if self.method not in (None, "quadrature", "mc"):
            raise ConfigurationError(f"method: expected null, 'quadrature' or 'mc', got {self.method!r}")
        if len(self.grid) == 0:
            raise ConfigurationError("grid: must be nonempty")
        for g in self.grid:
            vals = g if isinstance(g, tuple) else (g,)
            if self.mode in ("joint", "risk-joint", "risk-sum") and len(vals) != 2:
                raise ConfigurationError(f"grid: {self.mode} mode needs [x, y] pairs, got {g!r}")
            if self.mode in ("sum", "diag") and len(vals) != 1:
                raise ConfigurationError(f"grid: {self.mode} mode needs scalar thresholds, got {g!r}")
            if not all(v > 0 for v in vals):
                raise ConfigurationError(f"grid: thresholds must be positive, got {g!r}")
        if self.mode.startswith("risk") and self.weights.kind != "discount_product":
            raise ConfigurationError("weights: risk modes need kind 'discount_product'")
        if self.paper_estimators and self.mode in ("joint", "sum"):
            if not (self.weights.n == 2 and self.weights.m == 2 and type(self.weights) is IidUniform):
                raise ConfigurationError("paper_estimators: needs n = m = 2 with iid_uniform weights")

    @property
    def model(self) -> asy.ModelSpec:
        return asy.ModelSpec(self.pair, self.weights)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pair": self.pair.to_dict(),
            "weights": self.weights.to_dict(),
            "grid": [list(g) if isinstance(g, tuple) else g for g in self.grid],
            "mc": self.mc.to_dict(),
            "format": self.format,
            "out": self.out,
            "paper_estimators": self.paper_estimators,
            "method": self.method,
            "n_mc": self.n_mc,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        missing = [k for k in ("mode", "pair", "weights", "grid") if k not in d]
        if missing:
            raise ConfigurationError(f"missing config field(s): {', '.join(missing)}")
        unknown = set(d) - {"mode", "pair", "weights", "grid", "mc", "format", "out",
                            "paper_estimators", "method", "n_mc", "note"}
        if unknown:
            raise ConfigurationError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        try:
            pair = FgmPair.from_dict(d["pair"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"pair: {e}") from e
        try:
            weights = WeightModel.from_dict(d["weights"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"weights: {e}") from e
        grid = tuple(tuple(float(v) for v in g) if isinstance(g, (list, tuple)) else float(g) for g in d["grid"])
        try:
            settings = mc.McSettings.from_dict(d.get("mc", {}))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"mc: {e}") from e
        return cls(
            mode=d["mode"], pair=pair, weights=weights, grid=grid, mc=settings,
            format=d.get("format", "csv"), out=d.get("out"),
            paper_estimators=bool(d.get("paper_estimators", False)),
            method=d.get("method"), n_mc=int(d.get("n_mc", asy.DEFAULT_N_MC)),
            note=d.get("note", ""),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config is not valid JSON: {e}") from e
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())


# -- presets -----------------------------------------------------------------

TABLE1_GRID = ((20.0, 25.0), (25.0, 30.0), (30.0, 35.0), (35.0, 40.0),
               (40.0, 45.0), (45.0, 50.0), (50.0, 55.0), (55.0, 60.0))
TABLE2_GRID = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0)


def preset(name: str) -> ExperimentConfig:
    """Built-in configurations for the two published tables (N = 1e7, 10 replicates)."""
    settings = mc.McSettings(n_samples=10_000_000, n_reps=10, seed=20240101)
    if name == "table1":
        pair = FgmPair(0.5, Marginal.pareto(2.01, 2.0), Marginal.pareto(2.2, 4.0))
        return ExperimentConfig("joint", pair, IidUniform(2, 2, 1.0, 2.0, 1.0, 2.0), TABLE1_GRID,
                                settings, paper_estimators=True, note=TABLE1_NOTE)
    if name == "table2":
        F = Marginal.pareto(2.01, 1.0)
        return ExperimentConfig("sum", FgmPair(0.6, F, F), IidUniform(2, 2, 1.0, 2.0, 1.0, 2.0), TABLE2_GRID,
                                settings, paper_estimators=True)
    raise ConfigurationError(f"unknown preset {name!r}; expected 'table1' or 'table2'")


# -- experiment rows -----------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    threshold: tuple  # (z,) or (x, y)
    sim: float
    sim_stderr: float
    asy1: float
    asy2: float
    extras: tuple = ()  # ((column, value), ...)

    @property
    def ratio1(self) -> float:
        return self.asy1 / self.sim if self.sim > 0 else math.nan

    @property
    def ratio2(self) -> float:
        return self.asy2 / self.sim if self.sim > 0 else math.nan


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[TableRow]:
    """Sim and asymptotic values at every grid point, in grid order."""
    if cfg.mode == "diag":
        raise ConfigurationError("mode: diag configs go through run_diagnostics")
    ms = cfg.model
    kw = {"method": cfg.method, "n_mc": cfg.n_mc, "seed": cfg.mc.seed}
    rows = []
    if cfg.mode == "sum":
        g = mc.simulate_sum_grid(ms, cfg.grid, cfg.mc, threads)
        for t, z in enumerate(cfg.grid):
            a1, a2 = asy.sum_asy1(ms, z, **kw), asy.sum_asy2(ms, z, **kw)
            extras = ()
            if cfg.paper_estimators:
                extras = (("asy1_paper", g.asy1_paper[t].mean), ("asy2_paper", g.asy2_paper[t].mean))
            rows.append(TableRow((z,), g.sim[t].mean, g.sim[t].stderr, a1.value, a2.value, extras))
        return rows
    if cfg.mode == "risk-sum":
        zs = [x + y for x, y in cfg.grid]
        g = mc.simulate_sum_grid(ms, zs, cfg.mc, threads)
        risk = asy.RiskConfig(cfg.pair, ms.n, ms.weights.a1, ms.weights.b1, ms.weights.a2, ms.weights.b2)
        for t, (x, y) in enumerate(cfg.grid):
            a1 = asy.sum_asy1(ms, x + y, **kw)
            a2 = asy.risk_sum_asy2(risk, x, y, **kw)
            rows.append(TableRow((x, y), g.sim[t].mean, g.sim[t].stderr, a1.value, a2.value))
        return rows
    g = mc.simulate_joint_grid(ms, cfg.grid, cfg.mc, threads)
    for t, (x, y) in enumerate(cfg.grid):
        a1, a2 = asy.joint_asy1(ms, x, y, **kw), asy.joint_asy2(ms, x, y, **kw)
        extras = ()
        if cfg.paper_estimators and cfg.mode == "joint":
            extras = (("asy1_paper", g.asy1_paper[t].mean), ("asy2_paper", g.asy2_paper[t].mean))
        rows.append(TableRow((x, y), g.sim[t].mean, g.sim[t].stderr, a1.value, a2.value, extras))
    return rows


# -- formatting and emission ---------------------------------------------------

def fmt6(v: float) -> str:
    """Fixed-point decimal with 6 significant digits: 3.888e-2 -> ``0.0388800``."""
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if v == 0:
        return "0.00000"
    e = int(f"{v:.5e}".split("e")[1])
    return f"{v:.{max(5 - e, 0)}f}"


def _csv_header(rows) -> list[str]:
    lead = ["threshold"] if len(rows[0].threshold) == 1 else ["x", "y"]
    tail = [k for k, _ in rows[0].extras]
    return lead + ["sim", "sim_stderr", "asy1", "asy2", "ratio1", "ratio2"] + tail


def render_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_csv_header(rows))
    for r in rows:
        vals = list(r.threshold) + [r.sim, r.sim_stderr, r.asy1, r.asy2, r.ratio1, r.ratio2]
        vals += [v for _, v in r.extras]
        w.writerow([fmt6(v) for v in vals])
    return buf.getvalue()


def _sci(v: float) -> str:
    return f"{v:.3e}" if math.isfinite(v) else "nan"


def render_markdown(rows, note: str = "") -> str:
    joint = len(rows[0].threshold) == 2
    head = ["(x, y)" if joint else "z", "Sim", "Asy1", "Asy2", "Asy1/Sim", "Asy2/Sim"]
    lines = []
    if note:
        lines += [f"> **Note.** {note}", ""]
    lines.append("| " + " | ".join(head) + " |")
    lines.append("|" + "|".join(["---"] * len(head)) + "|")
    for r in rows:
        th = f"({r.threshold[0]:g}, {r.threshold[1]:g})" if joint else f"{r.threshold[0]:g}"
        cells = [th, _sci(r.sim), _sci(r.asy1), _sci(r.asy2), f"{r.ratio1:.4f}", f"{r.ratio2:.4f}"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render(rows, fmt: str, note: str = "") -> str:
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        return render_csv(rows)
    if fmt == "markdown":
        return render_markdown(rows, note)
    raise ConfigurationError(f"format: expected one of {FORMATS}, got {fmt!r}")


def emit(rows, fmt: str, path, note: str = "") -> None:
    """Write rows as UTF-8 text with LF newlines."""
    text = render(rows, fmt, note)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write report to {os.fspath(path)!r}: {e.strerror}") from e


def parse_csv(text: str) -> list[dict]:
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


# -- diagnostics -----------------------------------------------------------------

DIAG_GRID = (50.0, 100.0, 200.0, 400.0)
TAU_LEVELS = (-1.0, -0.5, 0.0, 0.5, 0.9)


def copula_sample(pair: FgmPair, n: int, seed: int, stream: int = 0):
    """``n`` draws of ``(X, Y)`` from the diagnostic stream."""
    gen = _rng.generator(seed, _rng.TAG_DIAGNOSTIC, 0, stream)
    U = gen.random((n, 2))
    return pair.sample_pair(U[:, 0], U[:, 1])


@dataclass(frozen=True)
class CopulaCheck:
    r: float
    n_ks: int
    ks_x: float
    ks_y: float
    ks_bound: float
    n_tau: int
    tau: float
    tau_expected: float

    @property
    def ks_ok(self) -> bool:
        return self.ks_x < self.ks_bound and self.ks_y < self.ks_bound

    @property
    def tau_ok(self) -> bool:
        return abs(self.tau - self.tau_expected) < 0.01


def copula_check(pair: FgmPair, seed: int = 0, n_ks: int = 100_000, n_tau: int = 1_000_000) -> CopulaCheck:
    """KS distance of both sampled marginals and empirical Kendall's tau versus ``2r/9``."""
    X, Y = copula_sample(pair, n_ks, seed, 0)
    ks_x = stats.kstest(X, pair.F.cdf).statistic
    ks_y = stats.kstest(Y, pair.G.cdf).statistic
    X, Y = copula_sample(pair, n_tau, seed, 1)
    tau = stats.kendalltau(X, Y).statistic
    return CopulaCheck(pair.r, n_ks, float(ks_x), float(ks_y), 1.95 / math.sqrt(n_ks),
                       n_tau, float(tau), kendall_tau(pair.r))


@dataclass(frozen=True)
class ExpansionCheck:
    x: float
    expansion: float
    first_order: float
    sim: mc.McEstimate

    @property
    def rel_error(self) -> float:
        return abs(self.expansion / self.sim.mean - 1.0)


def pair_expansion_check(pair: FgmPair, x: float, s: mc.McSettings, c: float = 1.0, d: float = 1.0,
                 threads: int = 1) -> ExpansionCheck:
    """Pairwise expansion of ``P(cX + dY > x)`` against crude Monte Carlo."""
    est = pair.pair_sum_tail_expansion(c, d, x)
    ms = asy.ModelSpec(pair, IidUniform(1, 1, c, c, d, d))
    sim = mc.simulate_sum_tail(ms, x, s, threads)
    return ExpansionCheck(x, est.value, est.first_order, sim)


def s2_ratio_grid(m: Marginal, xs) -> list[tuple[float, float]]:
    out = []
    for x in xs:
        try:
            out.append((float(x), s2_diagnostic(m, x)))
        except NumericUnderflowError:
            out.append((float(x), math.nan))
    return out


def run_diagnostics(cfg: ExperimentConfig, threads: int = 1, tau_levels=TAU_LEVELS) -> str:
    """Markdown report: second-order ratios, pairwise expansion check and copula sampler checks."""
    xs = [float(g) for g in cfg.grid]
    lines = ["# Diagnostics", "", "## Second-order subexponential ratio", "",
             "`(P(X1 + X2 > x) - 2 P(X > x)) / (2 mu F(x, x+1])`, which tends to 1.", ""]
    lines.append("| marginal | " + " | ".join(f"x={x:g}" for x in xs) + " |")
    lines.append("|" + "|".join(["---"] * (len(xs) + 1)) + "|")
    margs = [("F", cfg.pair.F)] + ([("G", cfg.pair.G)] if cfg.pair.G != cfg.pair.F else [])
    for label, m in margs:
        desc = ", ".join(f"{k}={v:g}" for k, v in m.params.items())
        vals = " | ".join(f"{v:.5f}" for _, v in s2_ratio_grid(m, xs))
        lines.append(f"| {label}: {m.family}({desc}) | {vals} |")

    x0 = 50.0
    chk = pair_expansion_check(cfg.pair, x0, cfg.mc, threads=threads)
    lines += ["", "## Pairwise sum expansion", "",
              f"P(X + Y > {x0:g}) with r = {cfg.pair.r:g}, c = d = 1.", "",
              "| quantity | value |", "|---|---|",
              f"| first order | {chk.first_order:.6e} |",
              f"| second order | {chk.expansion:.6e} |",
              f"| Monte Carlo ({cfg.mc.n_samples} x {cfg.mc.n_reps}) | {chk.sim.mean:.6e} +- {chk.sim.stderr:.2e} |",
              f"| relative error | {chk.rel_error:.4f} |"]

    lines += ["", "## Copula sampler", "",
              "| r | KS(X) | KS(Y) | KS bound | tau | 2r/9 |", "|---|---|---|---|---|---|"]
    for r in tau_levels:
        cc = copula_check(replace(cfg.pair, r=r), seed=cfg.mc.seed)
        lines.append(f"| {r:g} | {cc.ks_x:.5f} | {cc.ks_y:.5f} | {cc.ks_bound:.5f} | {cc.tau:.5f} | {cc.tau_expected:.5f} |")
    return "\n".join(lines) + "\n"


def default_diag_config() -> ExperimentConfig:
    F = Marginal.pareto(2.01, 1.0)
    return ExperimentConfig("diag", FgmPair(0.6, F, F), IidUniform(1, 1), DIAG_GRID,
                            mc.McSettings(n_samples=10_000_000, n_reps=10, seed=0))

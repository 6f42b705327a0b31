"""Compiled vs numpy counting kernel.

Times ``count_chunk`` alone on the two published configurations and the
end-to-end ``run_counts`` (uniforms, weights, quantiles and counting), and
checks that both backends return identical counts.

    python benchmarks/bench_kernel.py [--samples 2000000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from fgmtail import _kernel_py, montecarlo as mc, rng
from fgmtail.report import preset


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _chunk_inputs(cfg, size):
    ms = cfg.model
    gen = rng.generator(1, rng.TAG_SIMULATION, 0, 0)
    U = gen.random((size, max(ms.n, ms.m), 2))
    theta, Theta = ms.weights.transform(gen.random((size, ms.weights.n_uniforms)))
    famF, pF = mc._marginal_code(ms.pair.F)
    famG, pG = mc._marginal_code(ms.pair.G)
    return _kernel_py.weighted_primaries(U, theta, Theta, famF, pF, famG, pG, ms.pair.r)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--samples", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = mc.available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; only the numpy backend is available")
    print(f"| config | stage | {' | '.join(backends)} | speedup |")
    print("|---|---|" + "---|" * len(backends) + "---|")
    for name in ("table1", "table2"):
        cfg = preset(name)
        mode = mc._kernel_py.MODE_JOINT if cfg.mode == "joint" else mc._kernel_py.MODE_SUM
        grid = np.asarray(cfg.grid, dtype=float).reshape(len(cfg.grid), -1)
        t1, t2 = grid[:, 0], grid[:, -1]
        wx, wy = _chunk_inputs(cfg, 1 << 16)
        times, counts = {}, {}
        for b in backends:
            fn = mc._BACKENDS[b]
            times[b], counts[b] = _best(lambda: fn(wx, wy, mode, t1, t2), args.repeat)
        _row(name, "count_chunk (65536)", backends, times)
        s = mc.McSettings(n_samples=args.samples, n_reps=1, seed=3)
        full = {}
        for b in backends:
            mc.set_backend(b)
            times[b], full[b] = _best(lambda: mc.run_counts(cfg.model, mode, t1, t2, s), args.repeat)
        _row(name, f"run_counts ({args.samples})", backends, times)
        if len(backends) == 2:
            same = np.array_equal(counts["compiled"], counts["python"]) and np.array_equal(
                full["compiled"], full["python"])
            print(f"| {name} | identical counts | {same} | | |")


def _row(name, stage, backends, times):
    cells = " | ".join(f"{times[b] * 1e3:.1f} ms" for b in backends)
    speed = times["python"] / times["compiled"] if "compiled" in times else 1.0
    print(f"| {name} | {stage} | {cells} | {speed:.2f}x |")


if __name__ == "__main__":
    main()

"""Command-line entry point ``fgmtail``.

Examples::

    fgmtail preset table2 --out table2.csv
    fgmtail preset table1 --format markdown --samples 1000000 --reps 4
    fgmtail preset table2 --dump-config > t2.json
    fgmtail sum --config t2.json --threads 4
    fgmtail diag --samples 1000000

``--threads`` changes wall time only; output bytes depend on the config and
seed alone.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from . import montecarlo as mc
from .distributions import ConfigurationError
from .report import ExperimentConfig, default_diag_config, preset, render, run_diagnostics, run_experiment


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--samples", type=int, help="samples per replicate (overrides config)")
    p.add_argument("--reps", type=int, help="number of replicates (overrides config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "markdown"), help="output format (overrides config)")
    p.add_argument("--backend", choices=("compiled", "python"), help="Monte Carlo counting kernel")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fgmtail",
        description="Tail approximations and Monte Carlo checks for randomly weighted sums of FGM-dependent pairs.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("joint", "joint tail P(S > x, T > y) over an (x, y) grid"),
                        ("sum", "sum tail P(S + T > z) over a z grid")):
        _common(sub.add_parser(name, help=help_))
    p = sub.add_parser("risk", help="discounted two-line risk model (discount_product weights)")
    p.add_argument("--event", choices=("joint", "sum"), help="ruin event (overrides the config mode)")
    _common(p)
    _common(sub.add_parser("diag", help="second-order ratio, pairwise expansion and copula checks"))
    p = sub.add_parser("preset", help="reproduce a published table")
    p.add_argument("name", choices=("table1", "table2"))
    p.add_argument("--dump-config", action="store_true", help="print the preset config as JSON and exit")
    _common(p)
    return ap


def _load(args) -> ExperimentConfig:
    if args.command == "preset":
        cfg = preset(args.name)
    elif args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.command == "diag":
        cfg = default_diag_config()
    else:
        raise ConfigurationError(f"'{args.command}' needs --config")

    if args.command in ("joint", "sum", "diag") and cfg.mode != args.command:
        raise ConfigurationError(f"mode: config has {cfg.mode!r} but the subcommand is '{args.command}'")
    if args.command == "risk":
        mode = f"risk-{args.event}" if args.event else cfg.mode
        if not mode.startswith("risk"):
            raise ConfigurationError(f"mode: risk needs a risk-joint or risk-sum config, got {cfg.mode!r}")
        cfg = replace(cfg, mode=mode)

    s = cfg.mc
    s = mc.McSettings(
        n_samples=args.samples if args.samples is not None else s.n_samples,
        n_reps=args.reps if args.reps is not None else s.n_reps,
        seed=args.seed if args.seed is not None else s.seed,
        chunk_size=s.chunk_size,
    )
    return replace(cfg, mc=s, format=args.format or cfg.format, out=args.out or cfg.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if getattr(args, "dump_config", False):
            sys.stdout.write(cfg.dumps())
            return 0
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        if args.backend:
            mc.set_backend(args.backend)
        if cfg.mode == "diag":
            text = run_diagnostics(cfg, threads=args.threads)
        else:
            rows = run_experiment(cfg, threads=args.threads)
            text = render(rows, cfg.format, cfg.note)
            if cfg.note and cfg.format == "csv":
                print(f"note: {cfg.note}", file=sys.stderr)
    except (ConfigurationError, ValueError) as e:
        print(f"fgmtail: error: {e}", file=sys.stderr)
        return 2
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as e:
            print(f"fgmtail: error: cannot write {cfg.out!r}: {e.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

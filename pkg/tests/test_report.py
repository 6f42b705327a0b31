import json
import re
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fgmtail import cli
from fgmtail.distributions import ConfigurationError, Marginal
from fgmtail.fgm import FgmPair
from fgmtail.montecarlo import McSettings
from fgmtail.report import (
    TABLE1_NOTE,
    ExperimentConfig,
    TableRow,
    copula_check,
    default_diag_config,
    emit,
    fmt6,
    parse_csv,
    preset,
    render,
    render_markdown,
    run_diagnostics,
    run_experiment,
    s2_ratio_grid,
)
from fgmtail.weights import DiscountProduct, IidUniform

SMALL = McSettings(20_000, 3, 7, 8192)


def small(name):
    return replace(preset(name), mc=SMALL, grid=preset(name).grid[:3])


def test_fmt6():
    assert fmt6(3.888e-2) == "0.0388800"
    assert fmt6(0.93831234) == "0.938312"
    assert fmt6(1.0) == "1.00000"
    assert fmt6(12.5) == "12.5000"
    assert fmt6(7.34e-6) == "0.00000734000"
    assert fmt6(0.0) == "0.00000"
    assert fmt6(math.nan) == "nan"
    assert fmt6(123456789.0) == "123456789"


@given(st.floats(1e-12, 1e6))
def test_fmt6_keeps_six_significant_digits(v):
    assert float(fmt6(v)) == pytest.approx(v, rel=5.01e-6)


def test_csv_round_trip(tmp_path):
    row = TableRow((10.0,), 0.0388801, 1.2e-5, 0.0262, 0.0365, (("asy1_paper", 0.026),))
    path = tmp_path / "r.csv"
    emit([row], "csv", path)
    text = path.read_bytes().decode("utf-8")
    assert text.endswith("\n") and "\r" not in text
    assert text.splitlines()[0] == "threshold,sim,sim_stderr,asy1,asy2,ratio1,ratio2,asy1_paper"
    back = parse_csv(text)[0]
    assert back["threshold"] == 10.0 and back["sim"] == 0.0388801
    assert back["ratio1"] == pytest.approx(row.ratio1, rel=1e-5)


def test_joint_csv_header():
    row = TableRow((20.0, 25.0), 3e-4, 1e-6, 2e-4, 2.9e-4)
    assert render([row], "csv").splitlines()[0] == "x,y,sim,sim_stderr,asy1,asy2,ratio1,ratio2"


def test_markdown_layout():
    rows = [TableRow((z,), 0.01, 1e-5, 0.007, 0.0095) for z in (10.0, 20.0)]
    md = render_markdown(rows)
    table = [ln for ln in md.splitlines() if ln.startswith("|")]
    assert len(table) == 4
    assert all(len(ln.strip("|").split("|")) == 6 for ln in table)
    assert "> **Note.**" in render_markdown(rows, note="x")


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        render([], "csv")
    with pytest.raises(OSError, match="cannot write"):
        emit([TableRow((1.0,), 1, 0, 1, 1)], "csv", tmp_path / "missing" / "out.csv")


def test_ratios_are_quotients():
    r = TableRow((1.0,), 0.04, 1e-5, 0.03, 0.038)
    assert r.ratio1 == 0.03 / 0.04 and r.ratio2 == 0.038 / 0.04
    assert math.isnan(TableRow((1.0,), 0.0, 0.0, 0.03, 0.04).ratio1)


@pytest.mark.parametrize("name", ["table1", "table2"])
def test_preset_round_trip(tmp_path, name):
    cfg = preset(name)
    path = tmp_path / "c.json"
    cfg.save(path)
    assert ExperimentConfig.load(path) == cfg
    assert len(cfg.grid) == 8 and cfg.mc.n_samples == 10_000_000 and cfg.mc.n_reps == 10
    assert cfg.weights == IidUniform(2, 2, 1.0, 2.0, 1.0, 2.0)
    assert (cfg.note == TABLE1_NOTE) == (name == "table1")


def test_config_validation_messages():
    d = preset("table2").to_dict()
    with pytest.raises(ConfigurationError, match="grid"):
        ExperimentConfig.from_dict({**d, "grid": []})
    with pytest.raises(ConfigurationError, match="grid"):
        ExperimentConfig.from_dict({**d, "grid": [10, -1]})
    with pytest.raises(ConfigurationError, match="mode"):
        ExperimentConfig.from_dict({**d, "mode": "both"})
    with pytest.raises(ConfigurationError, match="unknown config field"):
        ExperimentConfig.from_dict({**d, "colour": 1})
    with pytest.raises(ConfigurationError, match="missing"):
        ExperimentConfig.from_dict({k: v for k, v in d.items() if k != "pair"})
    with pytest.raises(ConfigurationError, match="weights"):
        ExperimentConfig.from_dict({**d, "mode": "risk-sum", "grid": [[1, 2]]})
    with pytest.raises(ConfigurationError, match="JSON"):
        ExperimentConfig.loads("{mode: sum")


def test_run_experiment_rows(table2_model):
    cfg = small("table2")
    rows = run_experiment(cfg)
    assert [r.threshold for r in rows] == [(10.0,), (20.0,), (30.0,)]
    assert [k for k, _ in rows[0].extras] == ["asy1_paper", "asy2_paper"]
    assert all(r.sim_stderr >= 0 and r.asy2 > r.asy1 for r in rows)
    assert run_experiment(cfg, threads=3) == rows


def test_run_experiment_risk_modes():
    pair = FgmPair(0.6, Marginal.pareto(2.01, 1.0), Marginal.pareto(2.01, 1.0))
    for mode in ("risk-joint", "risk-sum"):
        cfg = ExperimentConfig(mode, pair, DiscountProduct(2, 2, 1, 2, 1, 2), ((10.0, 15.0),), SMALL, n_mc=20_000)
        (row,) = run_experiment(cfg)
        assert row.threshold == (10.0, 15.0) and row.sim > 0


def test_diagnostics_report():
    cfg = replace(default_diag_config(), mc=McSettings(50_000, 2, 1))
    md = run_diagnostics(cfg, tau_levels=(0.0, 0.9))
    for heading in ("## Second-order", "## Pairwise", "## Copula"):
        assert heading in md
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


def test_s2_grid_trends_to_one():
    vals = [v for _, v in s2_ratio_grid(Marginal.pareto(2.01, 1.0), (50, 100, 200, 400))]
    assert all(a > b > 1 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("r,target", [(0.0, 0.0), (0.9, 0.2)])
def test_copula_tau(r, target):
    m = Marginal.pareto(2.01, 1.0)
    c = copula_check(FgmPair(r, m, m), seed=4)
    assert c.ks_ok and c.tau_ok and c.tau_expected == pytest.approx(target, abs=1e-15)


# -- command line ---------------------------------------------------------------

def test_cli_preset_and_config(tmp_path, capsys):
    assert cli.main(["preset", "table2", "--dump-config"]) == 0
    d = json.loads(capsys.readouterr().out)
    d["grid"] = [20, 40]
    cfg_path = tmp_path / "t2.json"
    cfg_path.write_text(json.dumps(d))
    out = tmp_path / "o.csv"
    args = ["sum", "--config", str(cfg_path), "--samples", "20000", "--reps", "2", "--out", str(out)]
    assert cli.main(args) == 0
    rows = parse_csv(out.read_text())
    assert [r["threshold"] for r in rows] == [20.0, 40.0]
    assert cli.main(args + ["--threads", "2", "--backend", "python", "--out", str(tmp_path / "p.csv")]) == 0
    assert (tmp_path / "p.csv").read_bytes() == out.read_bytes()


def test_cli_markdown_to_stdout(capsys):
    assert cli.main(["preset", "table1", "--samples", "5000", "--reps", "2", "--format", "markdown"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("> **Note.**") and len(re.findall(r"^\| \(\d", out, re.M)) == 8


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["joint"]) == 2
    assert "needs --config" in capsys.readouterr().err
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({**preset("table2").to_dict(), "grid": []}))
    out = tmp_path / "never.csv"
    assert cli.main(["sum", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert cli.main(["joint", "--config", str(bad)]) == 2
    assert cli.main(["preset", "table2", "--samples", "2000", "--reps", "1",
                     "--out", str(tmp_path / "no" / "x.csv")]) == 1

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from soler2d import cli
from soler2d.clifford import GAMMA, GammaRep
from soler2d.config import RunConfig
from soler2d.errors import BlowUpError, ConfigError, SupportViolation

SMALL = ["--grid.n", "64", "--grid.L", "16", "--sim.dt", "0.0625", "--sim.t_end", "16", "--data.epsilon", "0.5"]
SCHEMAS = {
    "energy.csv": ["s", "E_D", "E_plus", "identity_residual", "bound_slack"],
    "decay.csv": ["t", "sup_abs", "weighted_sup", "improved_weighted_sup"],
    "scatter.csv": ["t", "err_high", "err_low", "err_low_times_sqrt_t"],
    "ghost.csv": ["t", "integrand", "cumulative"],
}


def run(tmp_path, *extra, name="out"):
    out = tmp_path / name
    code = cli.main(["run", *SMALL, "--output.dir", str(out), *extra])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# --- verify-algebra -------------------------------------------------------------------

def test_verify_algebra_passes(capsys):
    assert cli.main(["verify-algebra", "--samples", "1000"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 10 and "FAIL" not in out


def test_verify_algebra_names_mutated_gamma(capsys):
    g2 = GAMMA.g2.copy()
    g2[0, 1] *= -1
    args = cli.build_parser().parse_args(["verify-algebra", "--samples", "200"])
    assert cli.cmd_verify_algebra(args, gammas=GammaRep(GAMMA.g0, GAMMA.g1, g2)) == 1
    out = capsys.readouterr().out
    assert "FAIL  clifford_relations" in out and "failing checks: clifford_relations" in out


def test_verify_algebra_is_seed_deterministic(capsys):
    cli.main(["verify-algebra", "--seed", "7", "--samples", "300"])
    first = capsys.readouterr().out
    cli.main(["verify-algebra", "--seed", "7", "--samples", "300"])
    assert capsys.readouterr().out == first


# --- run and report ---------------------------------------------------------------------

def test_run_writes_all_artifacts_with_schemas(tmp_path, capsys):
    code, out = run(tmp_path)
    assert code == 0
    for name, header in SCHEMAS.items():
        got, rows = read_csv(out / name)
        assert got == header and rows
        for row in rows:
            assert len(row) == len(header)
            vals = [float(v) for v in row if v != ""]
            assert all(np.isfinite(vals))
    _, decay = read_csv(out / "decay.csv")
    assert all(row[3] == "" for row in decay)  # massive run: no improved monitor
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trivial_run"] is False
    assert summary["decay"]["sup_exponent"] is not None
    assert summary["scattering"]["exponent_high"] is not None
    assert all(summary["checks"].values())
    manifest = json.loads((out / "snapshots" / "manifest.json").read_text())
    assert len(manifest["records"]) == 29
    assert json.loads(capsys.readouterr().out)["charge_drift"] < 1e-12


def test_run_is_bit_deterministic(tmp_path):
    _, a = run(tmp_path, name="a")
    _, b = run(tmp_path, name="b")
    for name in SCHEMAS:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    for rec in json.loads((a / "snapshots" / "manifest.json").read_text())["records"]:
        assert (a / "snapshots" / rec["file"]).read_bytes() == (b / "snapshots" / rec["file"]).read_bytes()


def test_zero_epsilon_is_trivial(tmp_path):
    code, out = run(tmp_path, "--data.epsilon", "0")
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["trivial_run"] is True
    for name in SCHEMAS:
        _, rows = read_csv(out / name)
        cols = {"energy.csv": [1, 2, 3], "decay.csv": [1, 2], "scatter.csv": [1, 2, 3], "ghost.csv": [1, 2]}[name]
        assert all(float(row[c]) == 0.0 for row in rows for c in cols)


def test_linear_only_scatters_exactly(tmp_path):
    code, out = run(tmp_path, "--linear_only", "true")
    assert code == 0
    _, rows = read_csv(out / "scatter.csv")
    assert max(float(r[1]) for r in rows) <= 1e-11


def test_massless_companion_run(tmp_path):
    code, out = run(tmp_path, "--model.mass", "0", "--companion", "true")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["companion"]["relation_residual_max"] <= 1e-3
    _, decay = read_csv(out / "decay.csv")
    assert all(row[3] != "" for row in decay)


def test_report_reproduces_run(tmp_path, capsys):
    _, out = run(tmp_path)
    before = {name: (out / name).read_bytes() for name in SCHEMAS}
    capsys.readouterr()
    assert cli.main(["report", str(out)]) == 0
    for name in SCHEMAS:
        assert (out / name).read_bytes() == before[name]
    assert cli.main(["report", str(tmp_path / "nowhere")]) == 2


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "c.txt"
    conf.write_text("model.mass = 0.25\n# comment\ndata.epsilon = 0.1\n")
    code, out = run(tmp_path, "--config", str(conf), "--model.mass", "0.5")
    assert code == 0
    saved = RunConfig().updated(dict(l.split(" = ") for l in (out / "config.txt").read_text().splitlines()))
    assert saved.model_mass == 0.5 and saved.data_epsilon == 0.5  # SMALL sets epsilon after the file


@pytest.mark.parametrize("extra", [["--model.mass", "2"], ["--sim.dt", "1"], ["--companion", "true"],
                                   ["--grid.n", "100"]])
def test_config_errors_exit_2_before_compute(tmp_path, capsys, extra):
    code, out = run(tmp_path, *extra)
    assert code == 2
    assert "configuration error" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("exc", [BlowUpError("boom"), SupportViolation("leak")])
def test_runtime_aborts_exit_3(tmp_path, monkeypatch, exc):
    def explode(*args, **kwargs):
        raise exc
    monkeypatch.setattr(cli, "evolve_to", explode)
    assert run(tmp_path)[0] == 3


# --- sweeps -----------------------------------------------------------------------------

def sweep_base(tmp_path, **extra):
    pairs = {"grid.n": "64", "grid.L": "16", "sim.dt": "0.0625", "sim.t_end": "16",
             "output.dir": str(tmp_path / "sweep")}
    pairs.update(extra)
    return RunConfig().updated(pairs).validate()


def test_epsilon_sweep_scales_linearly(tmp_path):
    rep = cli.execute_sweep("epsilon", ["0.0125", "0.025", "0.05"], sweep_base(tmp_path), workers=1)
    assert not rep["failures"] and len(rep["members"]) == 3
    for s in rep["scaling"]:
        assert s["sup_ratio"] == pytest.approx(s["value_ratio"], rel=0.02)
    header, rows = read_csv(tmp_path / "sweep" / "sweep.csv")
    assert header == ["param", "value", "direction", "t", "sup_abs", "weighted_sup"] and len(rows) == 3 * 29


def test_mass_sweep_runs_both_directions(tmp_path):
    rep = cli.execute_sweep("mass", ["0", "1"], sweep_base(tmp_path), workers=1)
    assert len(rep["members"]) == 4
    assert {m["direction"] for m in rep["members"]} == {"1.0, 0.0", cli.DIAGONAL}
    assert rep["max_uniformity_ratio"] == max(m["uniformity_ratio"] for m in rep["members"])


def test_sweep_parallel_matches_serial(tmp_path):
    base = sweep_base(tmp_path)
    serial = cli.execute_sweep("epsilon", ["0.025", "0.05"], base, workers=1)
    parallel = cli.execute_sweep("epsilon", ["0.025", "0.05"], base, workers=2)
    assert serial == parallel


def test_sweep_validation():
    base = RunConfig()
    with pytest.raises(ConfigError):
        cli.sweep_members("mass", [], base)
    with pytest.raises(ConfigError):
        cli.sweep_members("mass", ["1.5"], base)
    with pytest.raises(ConfigError):
        cli.sweep_members("dt", ["0.1"], base)


def test_sweep_member_failure_gives_partial_report(tmp_path, capsys, monkeypatch):
    real = cli.run_member

    def flaky(pairs):
        if pairs["data.epsilon"] == "0.05":
            return {"config": pairs, "error": "BlowUpError: injected"}
        return real(pairs)
    monkeypatch.setattr(cli, "run_member", flaky)
    args = ["sweep", "--param", "epsilon", "--values", "0.025, 0.05", "--grid.n", "64", "--grid.L", "16",
            "--sim.dt", "0.0625", "--sim.t_end", "16", "--output.dir", str(tmp_path / "s")]
    assert cli.main(args) == 1
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["members"]) == 1 and rep["failures"][0]["error"] == "BlowUpError: injected"
    assert cli.main(["sweep", "--param", "epsilon", "--values", " , ", "--output.dir", str(tmp_path)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "soler2d", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("verify-algebra", "run", "sweep", "report"):
        assert cmd in res.stdout

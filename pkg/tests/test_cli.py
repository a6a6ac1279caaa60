from __future__ import annotations

import csv
import json

import pytest

from rlwpinn.cli import apply_overrides, main, read_config
from rlwpinn.exceptions import ConfigError

TINY = ["--override", "model.hidden_layers=1", "--override", "model.width=6",
        "--override", "training.n_interior=50", "--override", "training.n_initial=20",
        "--override", "training.n_boundary=20", "--override", "training.n_conservation_grid=101",
        "--override", "output.nx=41", "--override", "output.nt=5",
        "--override", "output.n_analysis=201"]


def run(tmp_path, name, *extra, epochs=0, iters=0):
    out = tmp_path / name
    code = main(["run", "--scenario", "single-soliton", "--out", str(out), *TINY,
                 "--override", f"training.adam_epochs={epochs}",
                 "--override", f"training.lbfgs_iters={iters}", *extra])
    return code, out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_missing_kind_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\nwidth = 4\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "scenario.kind" in capsys.readouterr().err


def test_bad_values_are_config_errors(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[scenario]\nkind = single-soliton\n[bogus]\nx = 1\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    assert main(["run", "--scenario", "single-soliton", "--out", str(tmp_path / "o"),
                 "--override", "model.width=abc"]) == 2
    assert main(["run", "--scenario", "single-soliton", "--out", str(tmp_path / "o"),
                 "--override", "training.nonsense=1"]) == 2


def test_overrides():
    sections = {"scenario": {"kind": "two-soliton"}}
    merged = apply_overrides(sections, ["scenario.t_final=5", "model.width=3"])
    assert sections == {"scenario": {"kind": "two-soliton"}}
    assert merged == {"scenario": {"kind": "two-soliton", "t_final": "5"},
                        "model": {"width": "3"}}
    with pytest.raises(ConfigError):
        apply_overrides(sections, ["width=3"])


def test_zero_epoch_run_writes_everything(tmp_path):
    code, out = run(tmp_path, "a")
    assert code == 0
    for name in ("field.csv", "invariants.csv", "peaks.csv", "history.csv", "metrics.json",
                 "checkpoint.json", "manifest.json"):
        assert (out / name).is_file(), name
    history = rows(out / "history.csv")
    assert len(history) == 1 and history[0][:3] == ["epoch", "phase", "window"]
    field = rows(out / "field.csv")
    assert field[0] == ["x", "t", "u"] and len(field) == 1 + 41 * 5
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["status"] == "ok"
    assert {"l2_rel", "linf_rel", "conservation_drift_pct"} <= set(metrics)


def test_seeded_runs_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "a", "--seed", "42", epochs=3, iters=2)
    _, b = run(tmp_path, "b", "--seed", "42", epochs=3, iters=2)
    for name in ("metrics.json", "history.csv", "checkpoint.json", "field.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    _, c = run(tmp_path, "c", "--seed", "7", epochs=3, iters=2)
    assert (a / "checkpoint.json").read_bytes() != (c / "checkpoint.json").read_bytes()


def test_history_rows_match_training(tmp_path):
    _, out = run(tmp_path, "a", epochs=4, iters=0)
    history = rows(out / "history.csv")
    assert len(history) == 1 + 4
    assert [r[1] for r in history[1:]] == ["adam"] * 4


def test_eval_and_region_errors(tmp_path):
    _, out = run(tmp_path, "a")
    cp = str(out / "checkpoint.json")
    ev = tmp_path / "ev"
    assert main(["eval", cp, "--out", str(ev), "--nx", "21", "--nt", "3",
                 "--n-analysis", "201"]) == 0
    metrics = json.loads((ev / "metrics.json").read_text())
    assert {"l2_rel", "linf_rel"} <= set(metrics)
    assert len(rows(ev / "field.csv")) == 1 + 21 * 3
    assert main(["eval", cp, "--out", str(tmp_path / "bad"), "--t-max", "25"]) == 4


def test_eval_bad_checkpoint(tmp_path):
    path = tmp_path / "cp.json"
    path.write_text("{\"format_version\": 1")
    assert main(["eval", str(path), "--out", str(tmp_path / "ev")]) == 2


def test_compare_with_itself_is_zero(tmp_path):
    _, out = run(tmp_path, "a")
    cp = str(out / "checkpoint.json")
    cmp_dir = tmp_path / "cmp"
    assert main(["compare", cp, cp, "--out", str(cmp_dir), "--nx", "21", "--nt", "3"]) == 0
    errors = rows(cmp_dir / "errors.csv")
    assert float(errors[1][errors[0].index("l2_rel")]) == 0.0
    diff = rows(cmp_dir / "diff_0_1.csv")
    assert all(float(r[-1]) == 0.0 for r in diff[1:])


def test_compare_disjoint_regions(tmp_path):
    _, out = run(tmp_path, "a")
    far = tmp_path / "far.csv"
    far.write_text("x,t,u\n" + "".join(f"{x},{t},0.0\n" for t in (0, 1) for x in (500, 600)))
    code = main(["compare", str(out / "checkpoint.json"), str(far),
                 "--out", str(tmp_path / "cmp")])
    assert code == 4


def test_abort_exit_code(tmp_path):
    code, out = run(tmp_path, "a", "--override", "training.lr=1e200", epochs=3)
    assert code == 3
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["status"] == "aborted"
    assert (out / "history.csv").is_file()


def test_oracle_command(tmp_path):
    out = tmp_path / "o"
    code = main(["oracle", "--scenario", "single-soliton", "--out", str(out),
                 "--override", "scenario.t_final=1", "--override", "oracle.dx=0.5",
                 "--override", "oracle.dt=0.1", "--override", "output.nx=21",
                 "--override", "output.nt=3",
                 "--override", "output.n_analysis=201"])
    assert code == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["l2_rel"] < 1e-2

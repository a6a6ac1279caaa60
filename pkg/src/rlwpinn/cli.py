"""Command-line runner: train, evaluate, compare and solve the FD reference.

Config files are INI-style (``configparser``) with the sections::

    [scenario]   kind = single-soliton | two-soliton | undular-bore
                 epsilon, mu, x_min, x_max, t_final, d, x0,
                 amplitudes, centers (comma lists), u0, xc, slope
    [model]      hidden_layers, width
    [training]   variant, strategy, seed, any TrainConfig field
    [output]     nx, nt (evaluation grid), n_analysis (invariant/peak grid),
                 reference = auto | exact | oracle | none
    [oracle]     dx, dt

Every key can be overridden with ``--override section.key=value``.  Without a
config file, ``--scenario`` alone selects the published setup.

Exit codes: 0 success, 2 config error, 3 training aborted, 4 region error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import metrics, physics
from .config import STRATEGIES, VARIANTS, TrainConfig, default_config
from .exceptions import CheckpointError, ConfigError, RegionError, UsageError
from .fields import GridField, Region, SolutionField, StitchedField
from .reference import FdConfig, default_fd_config, fd_solve
from .train import (HISTORY_COLUMNS, Checkpoint, TrainResult, checkpoint_load, checkpoint_save,
                    train)

log = logging.getLogger("rlwpinn")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_REGION = 0, 2, 3, 4
METRICS_SCHEMA = "rlwpinn.metrics/1"
WORKERS_ENV = "RLWPINN_WORKERS"

SECTIONS = ("scenario", "model", "training", "output", "oracle")
OUTPUT_DEFAULTS = {"nx": 501, "nt": 101, "n_analysis": 2001, "reference": "auto"}
REFERENCES = ("auto", "exact", "oracle", "none")


# --- configuration ---------------------------------------------------------

def _coerce(section: str, key: str, raw: str, template):
    where = f"{section}.{key}"
    raw = raw.strip()
    try:
        if isinstance(template, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(template, int):
            return int(raw)
        if isinstance(template, float):
            return float(raw)
        if isinstance(template, tuple):
            return tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        kind = type(template).__name__
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from None
    return raw


def read_config(path) -> dict[str, dict[str, str]]:
    """Sections of an INI file as plain dicts; unknown sections are an error."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    out = {}
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"{path}: unknown section [{name}]; expected one of {SECTIONS}")
        out[name] = dict(parser[name])
    return out


def apply_overrides(sections: dict, overrides) -> dict:
    sections = {k: dict(v) for k, v in sections.items()}
    for item in overrides or ():
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        if section not in SECTIONS:
            raise ConfigError(f"override {item!r}: unknown section {section!r}")
        sections.setdefault(section, {})[name] = value
    return sections


def _scenario_from(sections) -> physics.ScenarioConfig:
    raw = dict(sections.get("scenario", {}))
    kind = raw.pop("kind", None)
    if kind is None:
        raise ConfigError("missing required key scenario.kind (or pass --scenario)")
    kind = kind.strip()
    if kind not in physics.SCENARIO_KINDS:
        raise ConfigError(f"scenario.kind: unknown kind {kind!r}; "
                          f"expected one of {physics.SCENARIO_KINDS}")
    base = physics.make_scenario(kind)
    rlw = base.rlw
    changes = {}
    for key, value in raw.items():
        if key in ("epsilon", "mu"):
            rlw = dataclasses.replace(rlw, **{key: _coerce("scenario", key, value, 1.0)})
        elif key in ("kind", "rlw") or not hasattr(base, key):
            raise ConfigError(f"scenario.{key}: unknown key")
        else:
            changes[key] = _coerce("scenario", key, value, getattr(base, key))
    try:
        return base.replace(rlw=rlw, **changes)
    except ValueError as exc:
        raise ConfigError(f"[scenario]: {exc}") from exc


def build_train_config(sections) -> TrainConfig:
    scenario = _scenario_from(sections)
    training = dict(sections.get("training", {}))
    variant = training.pop("variant", "adaptive").strip()
    if variant not in VARIANTS:
        raise ConfigError(f"training.variant: {variant!r} not in {VARIANTS}")
    strategy = training.pop("strategy", "").strip() or None
    if strategy is not None and strategy not in STRATEGIES:
        raise ConfigError(f"training.strategy: {strategy!r} not in {STRATEGIES}")
    model = sections.get("model", {})
    overrides = {}
    for key in model:
        if key not in ("hidden_layers", "width"):
            raise ConfigError(f"model.{key}: unknown key")
        overrides[key] = _coerce("model", key, model[key], 1)
    try:
        base = default_config(scenario.kind, variant, scenario=scenario, strategy=strategy,
                              **overrides)
    except ValueError as exc:
        raise ConfigError(f"[training]: {exc}") from exc
    changes = {}
    for key, value in training.items():
        if key in ("scenario", "model") or not hasattr(base, key):
            raise ConfigError(f"training.{key}: unknown key")
        changes[key] = _coerce("training", key, value, getattr(base, key))
    try:
        return base.replace(**changes)
    except ValueError as exc:
        raise ConfigError(f"[training]: {exc}") from exc


def build_fd_config(sections, scenario=None) -> FdConfig:
    scenario = scenario or _scenario_from(sections)
    raw = sections.get("oracle", {})
    kw = {}
    for key, value in raw.items():
        if key not in ("dx", "dt"):
            raise ConfigError(f"oracle.{key}: unknown key")
        kw[key] = _coerce("oracle", key, value, 1.0)
    try:
        return default_fd_config(scenario, **kw)
    except ValueError as exc:
        raise ConfigError(f"[oracle]: {exc}") from exc


def output_options(sections) -> dict:
    out = dict(OUTPUT_DEFAULTS)
    for key, value in sections.get("output", {}).items():
        if key not in OUTPUT_DEFAULTS:
            raise ConfigError(f"output.{key}: unknown key")
        out[key] = _coerce("output", key, value, OUTPUT_DEFAULTS[key])
    if out["reference"] not in REFERENCES:
        raise ConfigError(f"output.reference: {out['reference']!r} not in {REFERENCES}")
    for key in ("nx", "nt"):
        if out[key] < 1:
            raise ConfigError(f"output.{key} must be >= 1")
    if out["n_analysis"] < 3:
        raise ConfigError("output.n_analysis must be >= 3")
    return out


def _sections_from_args(args) -> dict:
    sections = read_config(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "scenario", None):
        sections.setdefault("scenario", {})["kind"] = args.scenario
    training = sections.setdefault("training", {})
    if getattr(args, "variant", None):
        training["variant"] = args.variant
    if getattr(args, "strategy", None):
        training["strategy"] = args.strategy
    if getattr(args, "seed", None) is not None:
        training["seed"] = str(args.seed)
    return apply_overrides(sections, getattr(args, "override", None))


# --- output writers --------------------------------------------------------

def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _clean(v):
    """JSON-safe value: non-finite floats become null."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def eval_grid(region: Region, nx: int, nt: int):
    x = np.linspace(region.x_min, region.x_max, nx)
    t = np.linspace(region.t_min, region.t_max, nt)
    return x, t


def analysis_grid(field: SolutionField, region: Region, n: int):
    if isinstance(field, GridField) and field.region.x_min == region.x_min \
            and field.region.x_max == region.x_max:
        return field.x
    return np.linspace(region.x_min, region.x_max, n)


def write_field(out: Path, field: SolutionField, x, t):
    X, T = np.meshgrid(x, t)
    u = field(X.ravel(), T.ravel())
    _write_csv(out / "field.csv", ("x", "t", "u"), zip(X.ravel(), T.ravel(), u))
    return u.reshape(T.shape)


def invariant_series(field: SolutionField, grid, times, rlw) -> np.ndarray:
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    rows = []
    for t in times:
        u, ux = field.profile(grid, t)
        rows.append(physics.invariants(u, ux, h, rlw).as_array())
    return np.array(rows)


def peak_rows(field: SolutionField, grid, times, scenario):
    min_amp = (metrics.BORE_MIN_AMPLITUDE if scenario.kind == physics.UNDULAR_BORE
               else metrics.SOLITON_MIN_AMPLITUDE)
    rows = []
    for t in times:
        u, _ = field.profile(grid, t)
        for rank, p in enumerate(metrics.find_peaks(u, grid, min_amp), start=1):
            rows.append((float(t), rank, p.position, p.amplitude))
    return rows


def analyse(out: Path, field: SolutionField, scenario, opts, region: Region | None = None,
            reference: SolutionField | None = None, reference_name: str | None = None) -> dict:
    """Write field, invariants and peaks CSVs; return the metric entries."""
    region = region or field.region
    x, t = eval_grid(region, opts["nx"], opts["nt"])
    u = write_field(out, field, x, t)
    grid = analysis_grid(field, region, opts["n_analysis"])
    inv = invariant_series(field, grid, t, scenario.rlw)
    _write_csv(out / "invariants.csv", ("t", "I1", "I2", "I3"),
               ([ti, *row] for ti, row in zip(t, inv)))
    peaks = peak_rows(field, grid, t, scenario)
    _write_csv(out / "peaks.csv", ("t", "rank", "position", "amplitude"), peaks)

    res = {"region": dataclasses.asdict(region), "grid": {"nx": len(x), "nt": len(t)}}
    if len(t) > 1 and np.all(inv[0] != 0):
        drift = np.abs(inv - inv[0]) / np.abs(inv[0]) * 100.0
        res["conservation_drift_pct"] = dict(zip(("I1", "I2", "I3"), drift[-1]))
        res["max_conservation_drift_pct"] = dict(zip(("I1", "I2", "I3"), drift.max(axis=0)))
    res["invariants_initial"] = dict(zip(("I1", "I2", "I3"), inv[0]))
    res["invariants_final"] = dict(zip(("I1", "I2", "I3"), inv[-1]))
    final = [p for p in peaks if p[0] == float(t[-1])]
    res["final_peaks"] = [{"rank": r, "position": pos, "amplitude": a} for _, r, pos, a in final]
    res["leading_amplitude"] = {
        _fmt(ti): metrics.leading_amplitude(field.profile(grid, ti)[0], grid,
                                            metrics.BORE_MIN_AMPLITUDE)
        for ti in _checkpoint_times(region)} if scenario.kind == physics.UNDULAR_BORE else None
    if reference is not None:
        X, T = np.meshgrid(x, t)
        ref = reference(X.ravel(), T.ravel())
        res["reference"] = reference_name
        res["l2_rel"], res["linf_rel"] = metrics.error_norms(u.ravel(), ref)
    return res


def _checkpoint_times(region: Region):
    """Multiples of 50 inside the region, used for bore growth tables."""
    start = np.ceil(region.t_min / 50.0) * 50.0
    return np.arange(start, region.t_max + 1e-9, 50.0)


class ExactField(SolutionField):
    def __init__(self, scenario):
        self.scenario = scenario
        self.region = Region(scenario.x_min, scenario.x_max, 0.0, scenario.t_final)

    def _eval(self, x, t):
        return physics.exact_single_soliton(x, t, self.scenario)


def resolve_reference(scenario, opts, sections):
    choice = opts["reference"]
    if choice == "auto":
        choice = "exact" if scenario.has_exact_solution else "none"
    if choice == "exact":
        if not scenario.has_exact_solution:
            raise ConfigError(f"output.reference: no exact solution for {scenario.kind}")
        return ExactField(scenario), "exact"
    if choice == "oracle":
        return fd_solve(build_fd_config(sections, scenario)), "oracle"
    return None, None


def window_continuity(field: SolutionField, grid) -> list[dict]:
    if not isinstance(field, StitchedField):
        return []
    out = []
    for i, (a, b) in enumerate(zip(field.windows[:-1], field.windows[1:])):
        t = a.region.t_max
        jump = np.max(np.abs(a(grid, np.full_like(grid, t)) - b(grid, np.full_like(grid, t))))
        out.append({"boundary": i + 1, "t": float(t), "max_jump": float(jump)})
    return out


def history_rows(history):
    for h in history:
        yield [getattr(h, c) for c in HISTORY_COLUMNS]


class Run:
    """Output directory bookkeeping and the manifest."""

    def __init__(self, command: str, out_dir):
        self.command = command
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def note(self, *names):
        for n in names:
            if n not in self.files and (self.out / n).exists():
                self.files.append(n)

    def timed(self, label, fn, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.timings[label] = time.perf_counter() - t0

    def finish(self, status: int, config=None, message: str = "") -> int:
        self.timings["total"] = time.perf_counter() - self._t0
        self.note("metrics.json", "field.csv", "invariants.csv", "peaks.csv", "history.csv",
                  "checkpoint.json")
        manifest = {
            "command": self.command,
            "config": config,
            "output_dir": str(self.out),
            "files": sorted(self.files),
            "timings_s": self.timings,
            "exit_status": status,
            "message": message,
        }
        _write_json(self.out / "manifest.json", _clean(manifest))
        return status


# --- commands --------------------------------------------------------------

def cmd_run(args) -> int:
    sections = _sections_from_args(args)
    cfg = build_train_config(sections)
    opts = output_options(sections)
    run = Run("run", args.out)
    log.info("training %s (%s) on %s", cfg.scenario.kind, cfg.strategy_name, cfg.model.layer_widths)
    result: TrainResult = run.timed("train", train, cfg)
    _write_csv(run.out / "history.csv", HISTORY_COLUMNS, history_rows(result.history))
    checkpoint_save(Checkpoint.from_result(result), run.out / "checkpoint.json")
    summary = {
        "schema": METRICS_SCHEMA, "command": "run", "scenario": cfg.scenario.kind,
        "strategy": cfg.strategy_name, "seed": cfg.seed, "status": result.status,
        "windows_trained": len(result.windows), "n_history": len(result.history),
        "lbfgs_fallbacks": len(result.warnings),
    }
    if result.history:
        first, last = result.history[0], result.history[-1]
        summary["initial_loss"] = _loss_dict(first)
        summary["final_loss"] = _loss_dict(last)
        if last.standard_total > 0:
            summary["loss_reduction"] = first.standard_total / last.standard_total
    if not result.ok:
        summary["failed_window"] = result.failed_window
        summary["message"] = result.message
        _write_json(run.out / "metrics.json", _clean(summary))
        print(f"training aborted: {result.message}", file=sys.stderr)
        return run.finish(EXIT_ABORT, cfg.to_dict(), result.message)
    field = result.field
    reference, name = run.timed("reference", resolve_reference, cfg.scenario, opts, sections)
    summary.update(run.timed("analysis", analyse, run.out, field, cfg.scenario, opts,
                             reference=reference, reference_name=name))
    grid = analysis_grid(field, field.region, opts["n_analysis"])
    summary["window_continuity"] = window_continuity(field, grid)
    _write_json(run.out / "metrics.json", _clean(summary))
    return run.finish(EXIT_OK, cfg.to_dict())


def _loss_dict(h) -> dict:
    return {"l_pde": h.l_pde, "l_ic": h.l_ic, "l_bc": h.l_bc, "l_cons": h.l_cons,
            "total": h.total}


def _region_from_args(args, default: Region) -> Region:
    vals = {k: getattr(args, k) for k in ("x_min", "x_max", "t_min", "t_max")}
    return Region(**{k: default.__getattribute__(k) if v is None else v for k, v in vals.items()})


def cmd_eval(args) -> int:
    try:
        cp = checkpoint_load(args.checkpoint)
    except OSError as exc:
        raise ConfigError(f"cannot read checkpoint {args.checkpoint}: {exc.strerror}") from exc
    field = cp.field()
    region = _region_from_args(args, field.region)
    if region.x_min > region.x_max or region.t_min > region.t_max:
        raise RegionError(f"empty evaluation region {region}")
    field.region.check([region.x_min, region.x_max], [region.t_min, region.t_max])
    opts = dict(OUTPUT_DEFAULTS, nx=args.nx, nt=args.nt, n_analysis=args.n_analysis)
    run = Run("eval", args.out)
    scenario = cp.config.scenario
    reference = ExactField(scenario) if scenario.has_exact_solution else None
    summary = {"schema": METRICS_SCHEMA, "command": "eval", "scenario": scenario.kind,
               "strategy": cp.config.strategy_name, "seed": cp.seed, "status": cp.status}
    summary.update(analyse(run.out, field, scenario, opts, region, reference,
                           "exact" if reference is not None else None))
    _write_json(run.out / "metrics.json", _clean(summary))
    return run.finish(EXIT_OK, cp.config.to_dict())


def load_source(spec: str, nx: int = 501, nt: int = 101):
    """A field from ``checkpoint.json``, a ``field.csv``, ``oracle:<kind>`` or ``exact:<kind>``.

    Returns ``(field, scenario or None)``.
    """
    if spec.startswith(("oracle:", "exact:")):
        what, _, kind = spec.partition(":")
        if kind not in physics.SCENARIO_KINDS:
            raise ConfigError(f"source {spec!r}: unknown scenario {kind!r}")
        scenario = physics.make_scenario(kind)
        if what == "exact":
            if not scenario.has_exact_solution:
                raise ConfigError(f"source {spec!r}: no exact solution for {kind}")
            return ExactField(scenario), scenario
        return fd_solve(default_fd_config(scenario)), scenario
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"source {spec!r} does not exist")
    if path.suffix == ".csv":
        return _field_from_csv(path), None
    cp = checkpoint_load(path)
    return cp.field(), cp.config.scenario


def _field_from_csv(path: Path) -> GridField:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x = np.unique(data[:, 0])
        t = np.unique(data[:, 1])
        if data.shape != (x.size * t.size, 3):
            raise ValueError("points do not form a full x-t grid")
        order = np.lexsort((data[:, 0], data[:, 1]))
        return GridField(x, t, data[order, 2].reshape(t.size, x.size))
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: not a field.csv grid ({exc})") from exc


def cmd_compare(args) -> int:
    if len(args.sources) < 2:
        raise ConfigError("compare needs at least two sources")
    fields = [load_source(s) for s in args.sources]
    region = fields[0][0].region
    for f, _ in fields[1:]:
        region = region.intersect(f.region)
    scenario = next((sc for _, sc in fields if sc is not None), None)
    x, t = eval_grid(region, args.nx, args.nt)
    X, T = np.meshgrid(x, t)
    values = [f(X.ravel(), T.ravel()).reshape(T.shape) for f, _ in fields]
    run = Run("compare", args.out)
    min_amp = (metrics.BORE_MIN_AMPLITUDE if scenario and scenario.kind == physics.UNDULAR_BORE
               else metrics.SOLITON_MIN_AMPLITUDE)
    pairs, err_rows, peak_rows_ = [], [], []
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            diff = values[i] - values[j]
            name = f"diff_{i}_{j}.csv"
            _write_csv(run.out / name, ("x", "t", "diff"), zip(X.ravel(), T.ravel(), diff.ravel()))
            run.note(name)
            for k, tk in enumerate(t):
                l2, linf = _safe_norms(values[i][k], values[j][k])
                err_rows.append((f"{i}-{j}", float(tk), l2, linf, float(np.max(np.abs(diff[k])))))
                pa = metrics.find_peaks(values[i][k], x, min_amp)
                pb = metrics.find_peaks(values[j][k], x, min_amp)
                for r, (a, b) in enumerate(zip(pa, pb), start=1):
                    peak_rows_.append((f"{i}-{j}", float(tk), r, a.position, a.amplitude,
                                       b.position, b.amplitude, a.position - b.position,
                                       a.amplitude - b.amplitude))
            l2, linf = _safe_norms(values[i], values[j])
            pairs.append({"a": args.sources[i], "b": args.sources[j],
                          "max_abs_diff": float(np.max(np.abs(diff))), "l2_rel": l2,
                          "linf_rel": linf})
    _write_csv(run.out / "errors.csv", ("pair", "t", "l2_rel", "linf_rel", "max_abs_diff"),
               err_rows)
    _write_csv(run.out / "peaks_diff.csv",
               ("pair", "t", "rank", "position_a", "amplitude_a", "position_b", "amplitude_b",
                "d_position", "d_amplitude"), peak_rows_)
    run.note("errors.csv", "peaks_diff.csv")
    _write_json(run.out / "metrics.json", _clean({
        "schema": METRICS_SCHEMA, "command": "compare", "sources": list(args.sources),
        "region": dataclasses.asdict(region), "pairs": pairs}))
    return run.finish(EXIT_OK, {"sources": list(args.sources)})


def _safe_norms(a, b):
    try:
        return metrics.error_norms(a, b)
    except UsageError:
        return float("nan"), float("nan")


def cmd_oracle(args) -> int:
    sections = _sections_from_args(args)
    scenario = _scenario_from(sections)
    fd_cfg = build_fd_config(sections, scenario)
    opts = output_options(sections)
    run = Run("oracle", args.out)
    field = run.timed("solve", fd_solve, fd_cfg)
    reference = ExactField(scenario) if scenario.has_exact_solution else None
    summary = {"schema": METRICS_SCHEMA, "command": "oracle", "scenario": scenario.kind,
               "dx": fd_cfg.dx, "dt": fd_cfg.dt, "status": "ok"}
    summary.update(analyse(run.out, field, scenario, opts, reference=reference,
                           reference_name="exact" if reference is not None else None))
    _write_json(run.out / "metrics.json", _clean(summary))
    config = {"scenario": scenario.to_dict(), "dx": fd_cfg.dx, "dt": fd_cfg.dt}
    return run.finish(EXIT_OK, config)


# --- entry point -----------------------------------------------------------

def _add_config_args(p, seed=True):
    p.add_argument("--scenario", choices=physics.SCENARIO_KINDS)
    p.add_argument("--config", help="INI config file")
    p.add_argument("--override", action="append", metavar="SECTION.KEY=VALUE", default=[],
                   help="override one config value; repeatable")
    p.add_argument("--out", required=True, help="output directory")
    if seed:
        p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--strategy", choices=STRATEGIES)
        p.add_argument("--seed", type=int)


def _add_grid_args(p):
    p.add_argument("--nx", type=int, default=OUTPUT_DEFAULTS["nx"])
    p.add_argument("--nt", type=int, default=OUTPUT_DEFAULTS["nt"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlwpinn",
                                     description="PINN solver for the RLW equation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train a PINN and write all result files")
    _add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a grid")
    p.add_argument("checkpoint")
    p.add_argument("--out", required=True)
    _add_grid_args(p)
    p.add_argument("--n-analysis", type=int, default=OUTPUT_DEFAULTS["n_analysis"])
    for name in ("x-min", "x-max", "t-min", "t-max"):
        p.add_argument(f"--{name}", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="pairwise differences between solution fields")
    p.add_argument("sources", nargs="+",
                   help="checkpoint.json, field.csv, oracle:<kind> or exact:<kind>")
    p.add_argument("--out", required=True)
    _add_grid_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="finite-difference reference solution")
    _add_config_args(p, seed=False)
    p.set_defaults(func=cmd_oracle)
    return parser


def _limit_workers():
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(n, 1))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        limits = _limit_workers()
        try:
            return args.func(args)
        finally:
            if limits is not None:
                limits.restore_original_limits()
    except (ConfigError, CheckpointError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegionError as exc:
        print(f"region error: {exc}", file=sys.stderr)
        return EXIT_REGION


if __name__ == "__main__":
    sys.exit(main())

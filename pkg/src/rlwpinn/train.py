"""Collocation sampling and the training strategies.

* ``full``: one network over the whole horizon, Adam then L-BFGS.
* ``curriculum``: Adam on the adaptive loss, then L-BFGS with the
  conservation penalty switched on and a reduced initial step.
* ``causal``: one network per temporal window, trained in order; each
  window's initial condition is the previous window's prediction.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import network, physics
from .config import TrainConfig
from .exceptions import (CheckpointError, OptimizerError, PropagationError, TrainingAborted,
                         UnsupportedVersionError)
from .fields import NetworkField, Region, SolutionField, StitchedField
from .loss import CollocationSet, Evaluation, Objective, reference_invariants
from .network import MlpSpec
from .optim import AdamState, LbfgsState, adam_step, lbfgs_step

log = logging.getLogger(__name__)

# keys of the hierarchical RNG streams: seed -> purpose -> window -> class
_STREAM_INIT = 0
_STREAM_POINTS = 1
_STREAM_CONSERVATION = 2
_CLASS_INTERIOR, _CLASS_INITIAL, _CLASS_BOUNDARY = 0, 1, 2


def _rng(*keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


@dataclass(frozen=True)
class WindowPlan:
    boundaries: tuple[float, ...]

    @classmethod
    def uniform(cls, t_final: float, n: int) -> WindowPlan:
        if n < 1:
            raise ValueError("need at least one window")
        dt = t_final / n
        return cls(tuple([i * dt for i in range(n)] + [float(t_final)]))

    @property
    def n(self) -> int:
        return len(self.boundaries) - 1

    def window(self, i: int) -> tuple[float, float]:
        return self.boundaries[i], self.boundaries[i + 1]


@dataclass
class HistoryEntry:
    epoch: int
    phase: str
    window: int
    l_pde: float
    l_ic: float
    l_bc: float
    l_cons: float
    total: float
    lambda_pde: float
    lambda_ic: float
    lambda_bc: float

    @classmethod
    def from_evaluation(cls, epoch, phase, window, ev: Evaluation) -> HistoryEntry:
        b, w = ev.breakdown, ev.weights
        return cls(epoch, phase, window, b.l_pde, b.l_ic, b.l_bc, b.l_cons, ev.total,
                   *w.as_tuple())

    @property
    def standard_total(self) -> float:
        return self.l_pde + self.l_ic + self.l_bc


HISTORY_COLUMNS = tuple(HistoryEntry.__dataclass_fields__)


@dataclass
class WindowResult:
    index: int
    t_start: float
    t_end: float
    spec: MlpSpec
    params: np.ndarray

    def field(self, scenario: physics.ScenarioConfig) -> NetworkField:
        return NetworkField(self.params, self.spec,
                            Region(scenario.x_min, scenario.x_max, self.t_start, self.t_end))


@dataclass
class TrainResult:
    config: TrainConfig
    windows: list[WindowResult] = field(default_factory=list)
    history: list[HistoryEntry] = field(default_factory=list)
    status: str = "ok"
    message: str = ""
    failed_window: int | None = None
    warnings: list[str] = field(default_factory=list)
    last_good: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def field(self) -> SolutionField:
        return stitch([w.field(self.config.scenario) for w in self.windows])


def window_spec(cfg: TrainConfig, t_start: float, t_end: float) -> MlpSpec:
    sc = cfg.scenario
    if not cfg.normalize_inputs:
        return MlpSpec(cfg.model.layer_widths)
    return MlpSpec(cfg.model.layer_widths, ((sc.x_min, sc.x_max), (t_start, t_end)))


def initial_params(cfg: TrainConfig, spec: MlpSpec, window: int = 0) -> np.ndarray:
    seed = int(np.random.SeedSequence([cfg.seed, _STREAM_INIT, window]).generate_state(1)[0])
    return network.init_params(spec, seed, attach_adaptive=True)


def sample_collocation(cfg: TrainConfig, window: int = 0,
                       t_range: tuple[float, float] | None = None) -> CollocationSet:
    """Uniform interior, initial and boundary points for one window.

    Boundary points alternate evenly between the two endpoints.  Each point
    class draws from its own stream so changing one count leaves the others
    unchanged.
    """
    sc = cfg.scenario
    t0, t1 = t_range if t_range is not None else (0.0, sc.t_final)
    r_int = _rng(cfg.seed, _STREAM_POINTS, window, _CLASS_INTERIOR)
    interior = np.column_stack([r_int.uniform(sc.x_min, sc.x_max, cfg.n_interior),
                                r_int.uniform(t0, t1, cfg.n_interior)])
    initial = _rng(cfg.seed, _STREAM_POINTS, window, _CLASS_INITIAL).uniform(
        sc.x_min, sc.x_max, cfg.n_initial)
    r_bc = _rng(cfg.seed, _STREAM_POINTS, window, _CLASS_BOUNDARY)
    n_left = cfg.n_boundary // 2
    xb = np.where(np.arange(cfg.n_boundary) < n_left, sc.x_min, sc.x_max)
    boundary = np.column_stack([xb, r_bc.uniform(t0, t1, cfg.n_boundary)])
    return CollocationSet(
        interior=interior,
        initial=initial,
        boundary=boundary,
        conservation_times=np.linspace(t0, t1, cfg.n_conservation_times),
        conservation_grid=np.linspace(sc.x_min, sc.x_max, cfg.n_conservation_grid),
        t_initial=t0,
    )


class _SafeObjective:
    """Turns non-finite network values into an infinite loss for line searches."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.recent: list[tuple[np.ndarray, Evaluation]] = []

    def __call__(self, theta):
        try:
            f, g = self.objective(theta)
        except (PropagationError, FloatingPointError):
            return np.inf, np.full(np.shape(theta), np.nan)
        self.recent.append((np.array(theta, copy=True), self.objective.last))
        del self.recent[:-40]
        return f, g

    def lookup(self, theta) -> Evaluation:
        for x, ev in reversed(self.recent):
            if np.array_equal(x, theta):
                return ev
        return self.objective.evaluate(theta)


def train_stage(cfg: TrainConfig, params, objective: Objective, adam_epochs: int | None = None,
                lbfgs_iters: int | None = None, step_scale: float = 1.0, window: int = 0,
                phase_prefix: str = "", history: list | None = None,
                conservation_rng: np.random.Generator | None = None,
                warnings: list | None = None):
    """Adam epochs followed by L-BFGS iterations on ``objective``.

    Returns ``(params, history)``.  L-BFGS fallback warnings are appended to
    ``warnings`` when given.  A non-finite loss raises
    :class:`TrainingAborted` carrying the last parameters with a finite loss.
    """
    adam_epochs = cfg.adam_epochs if adam_epochs is None else adam_epochs
    lbfgs_iters = cfg.lbfgs_iters if lbfgs_iters is None else lbfgs_iters
    history = [] if history is None else history
    params = np.array(params, dtype=np.float64, copy=True)
    resample = (cfg.resample_conservation and objective.conservation_active
                and conservation_rng is not None)
    t0, t1 = objective.colloc.t_initial, float(objective.colloc.conservation_times[-1])

    state = AdamState.zeros(params.size, lr=cfg.lr)
    for epoch in range(adam_epochs):
        if resample:
            objective.set_conservation_times(np.sort(
                conservation_rng.uniform(t0, t1, cfg.n_conservation_times)))
        try:
            f, g = objective(params)
        except (PropagationError, FloatingPointError) as exc:
            raise TrainingAborted(f"Adam epoch {epoch}: {exc}", params, history) from exc
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise TrainingAborted(f"non-finite loss at Adam epoch {epoch}", params, history)
        history.append(HistoryEntry.from_evaluation(
            len(history), phase_prefix + "adam", window, objective.last))
        if cfg.log_every and epoch % cfg.log_every == 0:
            log.info("window %d adam %d: total %.3e pde %.3e ic %.3e bc %.3e cons %.3e",
                     window, epoch, f, *_parts(objective.last))
        params, state = adam_step(state, params, g)

    if lbfgs_iters:
        safe = _SafeObjective(objective)
        lstate = LbfgsState(step_scale=step_scale)
        for it in range(lbfgs_iters):
            try:
                new, lstate, info = lbfgs_step(lstate, params, safe)
            except OptimizerError as exc:
                raise TrainingAborted(f"L-BFGS iteration {it}: {exc}", params, history) from exc
            if not np.isfinite(lstate.loss):
                raise TrainingAborted(f"non-finite loss at L-BFGS iteration {it}", params, history)
            if info.accepted:
                params = new
                ev = safe.lookup(params)
                history.append(HistoryEntry.from_evaluation(
                    len(history), phase_prefix + "lbfgs", window, ev))
                if cfg.log_every and it % cfg.log_every == 0:
                    log.info("window %d lbfgs %d: total %.3e pde %.3e ic %.3e bc %.3e cons %.3e",
                             window, it, ev.total, *_parts(ev))
            if lstate.converged:
                break
        if warnings is not None:
            warnings.extend(lstate.warnings)
    return params, history


def _parts(ev: Evaluation):
    b = ev.breakdown
    return b.l_pde, b.l_ic, b.l_bc, b.l_cons


def _objective(cfg: TrainConfig, spec, colloc, lambda_cons, window):
    reference = None
    if cfg.analytic_reference and window == 0 and lambda_cons > 0:
        reference = reference_invariants(cfg.scenario, colloc.conservation_grid)
    return Objective(spec, colloc, cfg.scenario, lambda_cons=lambda_cons, reference=reference)


def _conservation_rng(cfg, window):
    return _rng(cfg.seed, _STREAM_CONSERVATION, window)


def full_train(cfg: TrainConfig) -> TrainResult:
    """Single network on the whole horizon (adaptive or conservative loss)."""
    t_end = cfg.scenario.t_final
    spec = window_spec(cfg, 0.0, t_end)
    colloc = sample_collocation(cfg, 0, (0.0, t_end))
    params = initial_params(cfg, spec, 0)
    obj = _objective(cfg, spec, colloc, cfg.effective_lambda_cons, 0)
    result = TrainResult(cfg)
    try:
        params, history = train_stage(cfg, params, obj, conservation_rng=_conservation_rng(cfg, 0),
                                      warnings=result.warnings)
    except TrainingAborted as exc:
        return _aborted(result, exc, spec, 0.0, t_end, 0)
    result.history = history
    result.windows = [WindowResult(0, 0.0, t_end, spec, params)]
    return result


def curriculum_train(cfg: TrainConfig) -> TrainResult:
    """Stage 1: Adam on the adaptive loss.  Stage 2: L-BFGS with the conservation term."""
    if cfg.strategy != "curriculum":
        raise ValueError(f"curriculum_train needs strategy 'curriculum', got {cfg.strategy!r}")
    t_end = cfg.scenario.t_final
    spec = window_spec(cfg, 0.0, t_end)
    colloc = sample_collocation(cfg, 0, (0.0, t_end))
    params = initial_params(cfg, spec, 0)
    result = TrainResult(cfg)
    history: list[HistoryEntry] = []
    try:
        stage1 = _objective(cfg, spec, colloc, 0.0, 0)
        params, history = train_stage(cfg, params, stage1, lbfgs_iters=0,
                                      phase_prefix="stage1-", history=history,
                                      warnings=result.warnings)
        stage2 = _objective(cfg, spec, colloc, cfg.lambda_cons, 0)
        params, history = train_stage(cfg, params, stage2, adam_epochs=0,
                                      step_scale=cfg.stage2_step_scale, phase_prefix="stage2-",
                                      history=history, warnings=result.warnings)
    except TrainingAborted as exc:
        return _aborted(result, exc, spec, 0.0, t_end, 0)
    result.history = history
    result.windows = [WindowResult(0, 0.0, t_end, spec, params)]
    return result


def causal_train(cfg: TrainConfig) -> TrainResult:
    """Sequential windows; returns the finished windows even when one aborts."""
    plan = WindowPlan.uniform(cfg.scenario.t_final, cfg.n_windows)
    result = TrainResult(cfg)
    lambda_cons = cfg.effective_lambda_cons
    previous: WindowResult | None = None
    for i in range(plan.n):
        t0, t1 = plan.window(i)
        spec = window_spec(cfg, t0, t1)
        colloc = sample_collocation(cfg, i, (t0, t1))
        if previous is not None:
            colloc.initial_target = network.predict(previous.params, previous.spec,
                                                    colloc.initial, t0)
        params = initial_params(cfg, spec, i)
        obj = _objective(cfg, spec, colloc, lambda_cons, i)
        try:
            params, result.history = train_stage(cfg, params, obj, window=i,
                                                 history=result.history,
                                                 conservation_rng=_conservation_rng(cfg, i),
                                                 warnings=result.warnings)
        except TrainingAborted as exc:
            return _aborted(result, exc, spec, t0, t1, i)
        previous = WindowResult(i, t0, t1, spec, params)
        result.windows.append(previous)
    return result


def _aborted(result: TrainResult, exc: TrainingAborted, spec, t0, t1, window) -> TrainResult:
    result.status = "aborted"
    result.message = str(exc)
    result.failed_window = window
    result.history = list(exc.history)
    result.last_good = np.array(exc.params, copy=True)
    log.error("training aborted in window %d: %s", window, exc)
    return result


def train(cfg: TrainConfig) -> TrainResult:
    """Dispatch on ``cfg.strategy``."""
    if cfg.strategy == "causal":
        return causal_train(cfg)
    if cfg.strategy == "curriculum":
        return curriculum_train(cfg)
    return full_train(cfg)


def stitch(windows) -> SolutionField:
    """Compose window fields: [t0, t1] -> first, (t_{i-1}, t_i] -> window i."""
    windows = list(windows)
    if len(windows) == 1:
        return windows[0]
    return StitchedField(windows)


# --- checkpoints -----------------------------------------------------------
#
# JSON document:
#   format_version  int, currently 1
#   config          TrainConfig.to_dict() (scenario and model spec included)
#   seed            int
#   status          "ok" | "aborted"; failed_window int or null
#   windows         list of {index, t_start, t_end, spec, params, lambdas}
#                   where params is a list of float.hex() strings
#   history         list of HistoryEntry dicts
#
# float.hex keeps every double bit for bit, so save -> load is lossless.

CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    config: TrainConfig
    windows: list[WindowResult]
    history: list[HistoryEntry] = field(default_factory=list)
    status: str = "ok"
    failed_window: int | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    @classmethod
    def from_result(cls, result: TrainResult) -> Checkpoint:
        return cls(result.config, list(result.windows), list(result.history),
                   result.status, result.failed_window)

    def field(self) -> SolutionField:
        if not self.windows:
            raise CheckpointError("checkpoint holds no trained windows")
        return stitch([w.field(self.config.scenario) for w in self.windows])


def _hex(a) -> list[str]:
    return [float(v).hex() for v in np.asarray(a, dtype=np.float64).ravel()]


def checkpoint_to_dict(cp: Checkpoint) -> dict:
    windows = []
    for w in cp.windows:
        sl = network.adaptive_slice(w.spec)
        windows.append({
            "index": w.index, "t_start": w.t_start.hex(), "t_end": w.t_end.hex(),
            "spec": w.spec.to_dict(), "params": _hex(w.params),
            "lambdas": [float(v) for v in w.params[sl]],
        })
    return {
        "format_version": CHECKPOINT_VERSION,
        "config": cp.config.to_dict(),
        "seed": cp.seed,
        "status": cp.status,
        "failed_window": cp.failed_window,
        "windows": windows,
        "history": [asdict(h) for h in cp.history],
    }


def checkpoint_from_dict(data) -> Checkpoint:
    if not isinstance(data, dict) or "format_version" not in data:
        raise CheckpointError("not a checkpoint document (no format_version)")
    if data["format_version"] != CHECKPOINT_VERSION:
        raise UnsupportedVersionError(
            f"checkpoint format_version {data['format_version']!r} is not supported "
            f"(expected {CHECKPOINT_VERSION})")
    try:
        cfg = TrainConfig.from_dict(data["config"])
        windows = []
        for w in data["windows"]:
            spec = MlpSpec.from_dict(w["spec"])
            params = np.array([float.fromhex(v) for v in w["params"]])
            if params.size != spec.n_params(adaptive=True):
                raise CheckpointError(f"window {w['index']}: {params.size} params, "
                                      f"spec needs {spec.n_params(adaptive=True)}")
            windows.append(WindowResult(int(w["index"]), float.fromhex(w["t_start"]),
                                        float.fromhex(w["t_end"]), spec, params))
        history = [HistoryEntry(**h) for h in data["history"]]
        return Checkpoint(cfg, windows, history, data.get("status", "ok"),
                          data.get("failed_window"))
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {type(exc).__name__}: {exc}") from exc


def checkpoint_save(cp: Checkpoint, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint_to_dict(cp), fh, indent=1)
        fh.write("\n")


def checkpoint_load(path) -> Checkpoint:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}: "
                              f"{exc.msg}") from exc
    return checkpoint_from_dict(data)

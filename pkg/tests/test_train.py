from __future__ import annotations

import json

import numpy as np
import pytest

from rlwpinn import network, physics
from rlwpinn.config import PUBLISHED_SETTINGS, default_config, default_strategy
from rlwpinn.exceptions import CheckpointError, RegionError, UnsupportedVersionError
from rlwpinn.fields import NetworkField, Region
from rlwpinn.loss import Objective
from rlwpinn.train import (
    Checkpoint, WindowPlan, causal_train, checkpoint_load, checkpoint_save, curriculum_train,
    initial_params, sample_collocation, stitch, train, train_stage, window_spec,
)

TINY = dict(hidden_layers=1, width=6, n_interior=60, n_initial=20, n_boundary=20,
            n_conservation_grid=101)


def tiny(kind=physics.SINGLE_SOLITON, variant="adaptive", **kw):
    return default_config(kind, variant, **{**TINY, **kw})


# --- configuration ------------------------------------------------------------

def test_published_defaults():
    cfg = default_config(physics.SINGLE_SOLITON)
    assert cfg.model.layer_widths == (2,) + (50,) * 8 + (1,)
    assert (cfg.n_interior, cfg.n_initial, cfg.n_boundary) == (20_000, 5_000, 5_000)
    assert (cfg.adam_epochs, cfg.lbfgs_iters, cfg.lambda_cons) == (30_000, 5_000, 1e-4)
    two = default_config(physics.TWO_SOLITON, "conservative")
    assert two.strategy_name == "curriculum-conservative"
    assert (two.adam_epochs, two.lbfgs_iters, two.lambda_cons) == (50_000, 10_000, 1e-5)
    assert two.model.layer_widths == (2,) + (100,) * 8 + (1,)
    bore = default_config(physics.UNDULAR_BORE, "adaptive")
    assert bore.strategy_name == "causal(5)"
    assert (bore.adam_epochs, bore.lbfgs_iters) == (20_000, 5_000)
    assert set(PUBLISHED_SETTINGS) == set(physics.SCENARIO_KINDS)


def test_strategy_mapping():
    assert default_strategy(physics.SINGLE_SOLITON, "conservative") == "full"
    assert default_strategy(physics.TWO_SOLITON, "adaptive") == "full"
    assert default_strategy(physics.TWO_SOLITON, "conservative") == "curriculum"
    assert default_strategy(physics.UNDULAR_BORE, "adaptive") == "causal"
    assert default_strategy(physics.UNDULAR_BORE, "conservative") == "causal"


def test_config_validation():
    with pytest.raises(ValueError):
        tiny(variant="weighted")
    with pytest.raises(ValueError):
        tiny(strategy="curriculum")  # adaptive variant
    with pytest.raises(ValueError):
        tiny(n_windows=3)  # not causal
    with pytest.raises(ValueError):
        tiny(lambda_cons=-1.0)


def test_config_roundtrip():
    cfg = tiny(physics.UNDULAR_BORE, "conservative", seed=5)
    assert type(cfg).from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


# --- sampling -------------------------------------------------------------------

def test_sampling_counts_and_domain():
    cfg = default_config(physics.SINGLE_SOLITON)
    colloc = sample_collocation(cfg)
    assert colloc.counts == (20_000, 5_000, 5_000)
    sc = cfg.scenario
    x, t = colloc.interior.T
    assert np.all((sc.x_min <= x) & (x <= sc.x_max) & (0 <= t) & (t <= sc.t_final))
    assert np.all((sc.x_min <= colloc.initial) & (colloc.initial <= sc.x_max))
    xb = colloc.boundary[:, 0]
    assert np.sum(xb == sc.x_min) == np.sum(xb == sc.x_max) == 2_500
    np.testing.assert_array_equal(colloc.conservation_times, np.linspace(0, 20, 11))
    assert colloc.conservation_grid.size == 2001


def test_sampling_deterministic_and_seeded():
    cfg = tiny()
    a, b = sample_collocation(cfg), sample_collocation(cfg)
    np.testing.assert_array_equal(a.interior, b.interior)
    np.testing.assert_array_equal(a.boundary, b.boundary)
    c = sample_collocation(cfg.replace(seed=1))
    assert not np.array_equal(a.interior, c.interior)


def test_sampling_streams_are_independent():
    cfg = tiny()
    a = sample_collocation(cfg)
    b = sample_collocation(cfg.replace(n_interior=99))
    np.testing.assert_array_equal(a.initial, b.initial)
    np.testing.assert_array_equal(a.boundary, b.boundary)


def test_window_sampling_range():
    cfg = tiny(physics.UNDULAR_BORE)
    colloc = sample_collocation(cfg, 2, (100.0, 150.0))
    assert np.all((colloc.interior[:, 1] >= 100) & (colloc.interior[:, 1] <= 150))
    assert colloc.t_initial == 100.0
    assert colloc.conservation_times[[0, -1]].tolist() == [100.0, 150.0]


# --- stages ---------------------------------------------------------------------

def _objective(cfg, lambda_cons=0.0):
    spec = window_spec(cfg, 0.0, cfg.scenario.t_final)
    return spec, Objective(spec, sample_collocation(cfg), cfg.scenario, lambda_cons)


def test_zero_budget_returns_params_unchanged():
    cfg = tiny(adam_epochs=0, lbfgs_iters=0)
    spec, obj = _objective(cfg)
    p0 = initial_params(cfg, spec)
    p, history = train_stage(cfg, p0, obj)
    np.testing.assert_array_equal(p, p0)
    assert history == []


def test_history_length_is_epochs_plus_accepted_iterations():
    cfg = tiny(adam_epochs=7, lbfgs_iters=5)
    spec, obj = _objective(cfg)
    p, history = train_stage(cfg, initial_params(cfg, spec), obj)
    phases = [h.phase for h in history]
    assert phases.count("adam") == 7
    assert 1 <= phases.count("lbfgs") <= 5
    assert len(history) == 7 + phases.count("lbfgs")
    assert [h.epoch for h in history] == list(range(len(history)))


def test_training_reduces_loss():
    cfg = tiny(adam_epochs=60, lbfgs_iters=20)
    result = train(cfg)
    assert result.ok
    assert result.history[-1].standard_total < result.history[0].standard_total


def test_full_training_deterministic():
    cfg = tiny(adam_epochs=5, lbfgs_iters=3, variant="conservative")
    a, b = train(cfg), train(cfg)
    np.testing.assert_array_equal(a.windows[0].params, b.windows[0].params)
    assert a.history == b.history


def test_curriculum_stages():
    cfg = tiny(physics.TWO_SOLITON, "conservative", adam_epochs=4, lbfgs_iters=3)
    assert cfg.strategy == "curriculum"
    result = curriculum_train(cfg)
    assert result.ok
    stage1 = [h for h in result.history if h.phase.startswith("stage1")]
    stage2 = [h for h in result.history if h.phase.startswith("stage2")]
    assert len(stage1) == 4 and all(h.l_cons == 0.0 for h in stage1)
    assert all(h.phase == "stage2-lbfgs" for h in stage2)
    assert stage2 and all(h.l_cons > 0.0 for h in stage2)


def test_curriculum_requires_its_strategy():
    with pytest.raises(ValueError):
        curriculum_train(tiny())


def test_causal_windows_and_handoff():
    cfg = tiny(physics.UNDULAR_BORE, adam_epochs=3, lbfgs_iters=0, n_windows=5)
    result = causal_train(cfg)
    assert result.ok
    assert [(w.t_start, w.t_end) for w in result.windows] == \
        [(0, 50), (50, 100), (100, 150), (150, 200), (200, 250)]
    assert {h.window for h in result.history} == set(range(5))
    # window 2's IC targets are window 1 at t = 50 on window 2's IC points
    w1, w2 = result.windows[:2]
    colloc = sample_collocation(cfg, 1, (50.0, 100.0))
    target = network.predict(w1.params, w1.spec, colloc.initial, 50.0)
    obj = Objective(w2.spec, colloc, cfg.scenario)
    colloc.initial_target = target
    obj2 = Objective(w2.spec, colloc, cfg.scenario)
    assert obj2.evaluate(w2.params).breakdown.l_ic == pytest.approx(
        np.mean((network.predict(w2.params, w2.spec, colloc.initial, 50.0) - target) ** 2))
    assert obj.colloc is colloc


def test_window_plan():
    plan = WindowPlan.uniform(250.0, 5)
    assert plan.boundaries == (0.0, 50.0, 100.0, 150.0, 200.0, 250.0)
    with pytest.raises(ValueError):
        WindowPlan.uniform(1.0, 0)


def test_abort_keeps_partial_result():
    cfg = tiny(physics.UNDULAR_BORE, adam_epochs=3, lbfgs_iters=0, n_windows=2)
    ok = causal_train(cfg)
    bad = causal_train(cfg.replace(lr=1e200))
    assert ok.ok
    assert bad.status == "aborted" and bad.failed_window is not None
    assert len(bad.windows) == bad.failed_window
    assert bad.last_good is not None and np.all(np.isfinite(bad.last_good))
    assert bad.message


# --- stitching ------------------------------------------------------------------

class Const(NetworkField):
    def __init__(self, value, t0, t1):
        self.value = value
        self.region = Region(0.0, 1.0, t0, t1)

    def _eval(self, x, t):
        return np.full(x.shape, self.value)


def test_stitch_routing():
    field = stitch([Const(1.0, 0, 10), Const(2.0, 10, 20), Const(3.0, 20, 30)])
    assert field(0.5, 10.0) == 1.0  # closed on the right
    assert field(0.5, 0.0) == 1.0
    assert field(0.5, 15.0) == 2.0
    assert field(0.5, 20.0) == 2.0
    assert field(0.5, 20.0 + 1e-6) == 3.0
    assert field(0.5, 30.0) == 3.0
    np.testing.assert_array_equal(field(np.full(3, 0.5), np.array([10.0, 10.5, 25.0])), [1, 2, 3])
    with pytest.raises(RegionError):
        field(0.5, 31.0)
    with pytest.raises(RegionError):
        field(1.5, 5.0)


def test_stitch_rejects_gaps():
    with pytest.raises(ValueError):
        stitch([Const(1.0, 0, 10), Const(2.0, 11, 20)])


# --- checkpoints ----------------------------------------------------------------

@pytest.fixture
def trained():
    return train(tiny(physics.UNDULAR_BORE, adam_epochs=2, lbfgs_iters=1, n_windows=2))


def test_checkpoint_roundtrip_bit_exact(tmp_path, trained):
    path = tmp_path / "cp.json"
    checkpoint_save(Checkpoint.from_result(trained), path)
    cp = checkpoint_load(path)
    assert cp.config == trained.config
    assert cp.history == trained.history
    for a, b in zip(cp.windows, trained.windows):
        assert a.params.tobytes() == b.params.tobytes()
        assert (a.t_start, a.t_end, a.spec) == (b.t_start, b.t_end, b.spec)
    x = np.linspace(-36, 300, 7)
    np.testing.assert_array_equal(cp.field()(x, np.full(7, 75.0)), trained.field(x, np.full(7, 75.0)))


def test_checkpoint_truncated(tmp_path, trained):
    path = tmp_path / "cp.json"
    checkpoint_save(Checkpoint.from_result(trained), path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(CheckpointError, match="line"):
        checkpoint_load(path)


def test_checkpoint_version_and_shape(tmp_path, trained):
    path = tmp_path / "cp.json"
    checkpoint_save(Checkpoint.from_result(trained), path)
    data = json.loads(path.read_text())
    data["format_version"] = 99
    path.write_text(json.dumps(data))
    with pytest.raises(UnsupportedVersionError):
        checkpoint_load(path)
    data["format_version"] = 1
    data["windows"][0]["params"] = data["windows"][0]["params"][:-1]
    path.write_text(json.dumps(data))
    with pytest.raises(CheckpointError):
        checkpoint_load(path)
    del data["windows"]
    path.write_text(json.dumps(data))
    with pytest.raises(CheckpointError):
        checkpoint_load(path)
    path.write_text("[]")
    with pytest.raises(CheckpointError):
        checkpoint_load(path)

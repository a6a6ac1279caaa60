from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rlwpinn import physics
from rlwpinn.estimator import FiniteDifferenceRLW, RLWPinn

TINY = dict(hidden_layers=1, width=5, n_interior=40, n_initial=10, n_boundary=10,
            adam_epochs=3, lbfgs_iters=1)


def test_params_and_clone():
    est = RLWPinn(width=7, seed=3)
    params = est.get_params()
    assert params["width"] == 7 and params["seed"] == 3 and params["hidden_layers"] is None
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(adam_epochs=10)
    assert est.adam_epochs == 10


def test_unset_values_take_published_defaults():
    cfg = RLWPinn("undular-bore", "conservative").make_config()
    assert cfg.strategy == "causal" and cfg.n_windows == 5
    assert cfg.model.layer_widths[1] == 100
    cfg = RLWPinn("single-soliton", scenario_params={"t_final": 5.0}, **TINY).make_config()
    assert cfg.scenario.t_final == 5.0 and cfg.adam_epochs == 3


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        RLWPinn().predict(np.zeros((1, 2)))


def test_fit_predict():
    est = RLWPinn(**TINY).fit()
    X = np.array([[0.0, 0.0], [10.0, 5.0], [-40.0, 20.0]])
    u = est.predict(X)
    assert u.shape == (3,) and np.all(np.isfinite(u))
    assert len(est.history_) >= 3 and est.n_windows_ == 1
    twin = RLWPinn(**TINY).fit()
    np.testing.assert_array_equal(twin.predict(X), u)
    assert est.checkpoint().seed == 0


def test_predict_validation():
    est = RLWPinn(**TINY).fit()
    with pytest.raises(ValueError):
        est.predict(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        est.predict(np.array([[np.nan, 0.0]]))


def test_finite_difference_estimator():
    est = FiniteDifferenceRLW(scenario_params={"t_final": 1.0}, dx=0.2, dt=0.05).fit()
    x = np.linspace(-10, 10, 21)
    X = np.column_stack([x, np.ones_like(x)])
    exact = physics.exact_single_soliton(x, 1.0, physics.single_soliton())
    np.testing.assert_allclose(est.predict(X), exact, atol=1e-3)

"""scikit-learn style wrappers around the PINN trainer and the FD solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import physics
from .config import default_config
from .exceptions import TrainingAborted
from .reference import default_fd_config, fd_solve
from .train import Checkpoint, train


def check_points(X) -> np.ndarray:
    """Validate query points: a finite float array of shape (n, 2) with columns x, t."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (x, t), got {X.shape[1]}")
    return X


class RLWPinn(RegressorMixin, BaseEstimator):
    """PINN for one RLW scenario.

    ``fit`` ignores ``X`` and ``y``: the training signal is the equation
    itself plus the scenario's initial and boundary data.  ``predict`` maps
    an (n, 2) array of (x, t) points to u.  Unset (``None``) settings take
    the published defaults for the scenario.
    """

    def __init__(self, scenario="single-soliton", variant="adaptive", strategy=None,
                 hidden_layers=None, width=None, n_interior=None, n_initial=None,
                 n_boundary=None, adam_epochs=None, lbfgs_iters=None, lambda_cons=None,
                 n_windows=None, lr=1e-3, seed=0, scenario_params=None):
        self.scenario = scenario
        self.variant = variant
        self.strategy = strategy
        self.hidden_layers = hidden_layers
        self.width = width
        self.n_interior = n_interior
        self.n_initial = n_initial
        self.n_boundary = n_boundary
        self.adam_epochs = adam_epochs
        self.lbfgs_iters = lbfgs_iters
        self.lambda_cons = lambda_cons
        self.n_windows = n_windows
        self.lr = lr
        self.seed = seed
        self.scenario_params = scenario_params

    _OPTIONAL = ("strategy", "hidden_layers", "width", "n_interior", "n_initial", "n_boundary",
                 "adam_epochs", "lbfgs_iters", "lambda_cons", "n_windows")

    def make_config(self):
        scenario = physics.make_scenario(self.scenario, **(self.scenario_params or {}))
        overrides = {k: getattr(self, k) for k in self._OPTIONAL if getattr(self, k) is not None}
        return default_config(self.scenario, self.variant, scenario=scenario, lr=self.lr,
                              seed=self.seed, **overrides)

    def fit(self, X=None, y=None):
        cfg = self.make_config()
        result = train(cfg)
        if not result.ok:
            raise TrainingAborted(result.message, result.last_good, result.history,
                                  result.windows, result.failed_window)
        self.config_ = cfg
        self.result_ = result
        self.field_ = result.field
        self.history_ = result.history
        self.n_windows_ = len(result.windows)
        return self

    def predict(self, X):
        check_is_fitted(self, "field_")
        X = check_points(X)
        return self.field_(X[:, 0], X[:, 1])

    def checkpoint(self) -> Checkpoint:
        check_is_fitted(self, "result_")
        return Checkpoint.from_result(self.result_)


class FiniteDifferenceRLW(RegressorMixin, BaseEstimator):
    """Finite-difference reference solution with the same fit/predict interface."""

    def __init__(self, scenario="single-soliton", dx=None, dt=None, scenario_params=None):
        self.scenario = scenario
        self.dx = dx
        self.dt = dt
        self.scenario_params = scenario_params

    def fit(self, X=None, y=None):
        scenario = physics.make_scenario(self.scenario, **(self.scenario_params or {}))
        overrides = {k: v for k, v in (("dx", self.dx), ("dt", self.dt)) if v is not None}
        self.fd_config_ = default_fd_config(scenario, **overrides)
        self.field_ = fd_solve(self.fd_config_)
        return self

    def predict(self, X):
        check_is_fitted(self, "field_")
        X = check_points(X)
        return self.field_(X[:, 0], X[:, 1])

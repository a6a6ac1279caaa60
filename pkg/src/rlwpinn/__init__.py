"""Physics-informed neural networks for the regularized long wave equation."""

from __future__ import annotations

from .config import TrainConfig, default_config
from .estimator import FiniteDifferenceRLW, RLWPinn
from .exceptions import (CheckpointError, ConfigError, InstabilityError, OptimizerError,
                         PropagationError, RegionError, RlwPinnError, TrainingAborted,
                         UnsupportedVersionError, UsageError)
from .network import MlpSpec
from .physics import RlwParams, ScenarioConfig, make_scenario
from .reference import FdConfig, fd_solve
from .train import Checkpoint, TrainResult, checkpoint_load, checkpoint_save, train

__version__ = "0.1.0"

__all__ = [
    "Checkpoint", "CheckpointError", "ConfigError", "FdConfig", "FiniteDifferenceRLW",
    "InstabilityError", "MlpSpec", "OptimizerError", "PropagationError", "RLWPinn",
    "RegionError", "RlwParams", "RlwPinnError", "ScenarioConfig", "TrainConfig",
    "TrainResult", "TrainingAborted", "UnsupportedVersionError", "UsageError",
    "checkpoint_load", "checkpoint_save", "default_config", "fd_solve", "make_scenario",
    "train",
]

"""Training configuration and per-scenario defaults."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from . import physics
from .network import MlpSpec
from .physics import ScenarioConfig

VARIANTS = ("adaptive", "conservative")
STRATEGIES = ("full", "curriculum", "causal")

# Table of published run settings: (hidden layers, width, N_r, N_IC, N_BC,
# Adam epochs, L-BFGS iterations, lambda_cons, windows).  Bore budgets and
# point counts are per temporal window.
PUBLISHED_SETTINGS = {
    physics.SINGLE_SOLITON: (8, 50, 20_000, 5_000, 5_000, 30_000, 5_000, 1e-4, 1),
    physics.TWO_SOLITON: (8, 100, 40_000, 10_000, 10_000, 50_000, 10_000, 1e-5, 1),
    physics.UNDULAR_BORE: (8, 100, 40_000, 10_000, 10_000, 20_000, 5_000, 1e-5, 5),
}


@dataclass(frozen=True)
class TrainConfig:
    scenario: ScenarioConfig
    model: MlpSpec
    n_interior: int
    n_initial: int
    n_boundary: int
    adam_epochs: int
    lbfgs_iters: int
    lambda_cons: float
    variant: str = "adaptive"
    strategy: str = "full"
    n_windows: int = 1
    lr: float = 1e-3
    seed: int = 0
    n_conservation_times: int = 11
    n_conservation_grid: int = 2001
    resample_conservation: bool = False
    analytic_reference: bool = False
    stage2_step_scale: float = 0.1
    normalize_inputs: bool = True
    log_every: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.strategy == "curriculum" and self.variant != "conservative":
            raise ValueError("curriculum training applies to the conservative variant only")
        if self.n_windows < 1:
            raise ValueError(f"n_windows must be >= 1, got {self.n_windows}")
        if self.strategy != "causal" and self.n_windows != 1:
            raise ValueError("n_windows > 1 requires the causal strategy")
        for name in ("n_interior", "n_initial", "n_boundary"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("adam_epochs", "lbfgs_iters"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.lambda_cons < 0:
            raise ValueError("lambda_cons must be non-negative")
        if self.n_conservation_times < 1 or self.n_conservation_grid < 2:
            raise ValueError("need >= 1 conservation time and >= 2 grid points")

    @property
    def strategy_name(self) -> str:
        """Strategy label: plain-adaptive, plain-conservative, curriculum-conservative, causal(N)."""
        if self.strategy == "causal":
            return f"causal({self.n_windows})"
        if self.strategy == "curriculum":
            return "curriculum-conservative"
        return f"plain-{self.variant}"

    @property
    def effective_lambda_cons(self) -> float:
        return self.lambda_cons if self.variant == "conservative" else 0.0

    def replace(self, **changes) -> TrainConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["scenario"] = self.scenario.to_dict()
        out["model"] = self.model.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> TrainConfig:
        data = dict(data)
        data["scenario"] = ScenarioConfig.from_dict(data["scenario"])
        data["model"] = MlpSpec.from_dict(data["model"])
        return cls(**data)


def default_strategy(kind: str, variant: str) -> str:
    """Full domain for solitons, curriculum for the conservative two-soliton run,
    causal windows for both bore variants."""
    if kind == physics.UNDULAR_BORE:
        return "causal"
    if kind == physics.TWO_SOLITON and variant == "conservative":
        return "curriculum"
    return "full"


def default_config(kind: str, variant: str = "adaptive", scenario: ScenarioConfig | None = None,
                   **overrides) -> TrainConfig:
    """Published settings for ``kind``; keyword overrides replace any field."""
    layers, width, nr, nic, nbc, adam, lbfgs, lam, windows = PUBLISHED_SETTINGS[kind]
    if scenario is None:
        scenario = physics.make_scenario(kind)
    strategy = overrides.pop("strategy", None) or default_strategy(kind, variant)
    hidden = overrides.pop("hidden_layers", layers)
    width = overrides.pop("width", width)
    kw = dict(
        scenario=scenario,
        model=MlpSpec.hidden(hidden, width),
        n_interior=nr, n_initial=nic, n_boundary=nbc,
        adam_epochs=adam, lbfgs_iters=lbfgs, lambda_cons=lam,
        variant=variant, strategy=strategy,
        n_windows=windows if strategy == "causal" else 1,
    )
    kw.update(overrides)
    return TrainConfig(**kw)

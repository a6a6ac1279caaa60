"""Standard, adaptive and conservative PINN losses.

All assembly functions accept the parameter vector either as a plain array
(returning floats) or as a tape :class:`~rlwpinn.autodiff.Var` (returning tape
variables that :func:`~rlwpinn.autodiff.backward` can differentiate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import physics
from .autodiff import StackedJet, Tape, Var, backward
from .autodiff import ops
from .exceptions import UsageError
from .network import MlpSpec, adaptive_slice, forward_stack, input_stack
from .physics import ScenarioConfig

N_CONSERVATION_TIMES = 11
N_CONSERVATION_GRID = 2001


@dataclass
class CollocationSet:
    """Training points for one scenario or one causal window.

    ``initial`` holds x locations at ``t_initial``.  ``initial_target``, when
    set, replaces the analytic initial condition (causal hand-off).
    """

    interior: np.ndarray
    initial: np.ndarray
    boundary: np.ndarray
    conservation_times: np.ndarray
    conservation_grid: np.ndarray
    t_initial: float = 0.0
    initial_target: np.ndarray | None = None

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=np.float64).reshape(-1, 2)
        self.initial = np.asarray(self.initial, dtype=np.float64).ravel()
        self.boundary = np.asarray(self.boundary, dtype=np.float64).reshape(-1, 2)
        self.conservation_times = np.asarray(self.conservation_times, dtype=np.float64).ravel()
        self.conservation_grid = np.asarray(self.conservation_grid, dtype=np.float64).ravel()
        if self.initial_target is not None:
            self.initial_target = np.asarray(self.initial_target, dtype=np.float64).ravel()
            if self.initial_target.shape != self.initial.shape:
                raise UsageError("initial_target must match the initial points")

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.interior), len(self.initial), len(self.boundary)

    def grid_spacing(self) -> float:
        g = self.conservation_grid
        return float((g[-1] - g[0]) / (g.size - 1))


@dataclass
class LossBreakdown:
    """Unweighted loss components; floats or tape variables."""

    l_pde: object
    l_ic: object
    l_bc: object
    l_cons: object = 0.0

    def as_floats(self) -> LossBreakdown:
        return LossBreakdown(*(float(_val(v)) for v in (self.l_pde, self.l_ic, self.l_bc, self.l_cons)))

    @property
    def standard_total(self):
        """Plain sum of PDE, IC and BC losses."""
        return self.l_pde + self.l_ic + self.l_bc


@dataclass
class AdaptiveWeights:
    """Trainable log-weights; the effective weight of term j is exp(-lambda_j)."""

    lambda_pde: object = 0.0
    lambda_ic: object = 0.0
    lambda_bc: object = 0.0

    @classmethod
    def from_params(cls, params, spec: MlpSpec) -> AdaptiveWeights:
        sl = adaptive_slice(spec)
        if isinstance(params, Var):
            return cls(*(params[sl.start + j] for j in range(3)))
        params = np.asarray(params)
        if params.size < sl.stop:
            raise UsageError("parameter vector has no adaptive weights attached")
        return cls(*(float(v) for v in params[sl]))

    def as_tuple(self):
        return self.lambda_pde, self.lambda_ic, self.lambda_bc


def _val(x):
    return x.value if isinstance(x, Var) else x


def _require_points(colloc: CollocationSet):
    for name, n in zip(("interior", "initial", "boundary"), colloc.counts):
        if n == 0:
            raise UsageError(f"collocation set has no {name} points")


class _Inputs:
    """Jet stacks and targets built once per collocation set."""

    def __init__(self, spec: MlpSpec, colloc: CollocationSet, scenario: ScenarioConfig):
        _require_points(colloc)
        xi, ti = colloc.interior[:, 0], colloc.interior[:, 1]
        self.interior = input_stack(spec, xi, ti, 6)
        self.initial = input_stack(spec, colloc.initial, colloc.t_initial, 1)
        if colloc.initial_target is not None:
            self.ic_target = colloc.initial_target
        else:
            self.ic_target = physics.initial_condition(colloc.initial, scenario)
        xb, tb = colloc.boundary[:, 0], colloc.boundary[:, 1]
        self.boundary = input_stack(spec, xb, tb, 1)
        self.bc_target = physics.boundary_value(xb, tb, scenario)


def _components(params, spec, inputs: _Inputs, rlw) -> LossBreakdown:
    u = StackedJet(forward_stack(params, spec, inputs.interior))
    l_pde = ops.mean(ops.square(physics.rlw_residual(u, rlw)))
    u_ic = forward_stack(params, spec, inputs.initial)[0]
    l_ic = ops.mean(ops.square(u_ic - inputs.ic_target))
    u_bc = forward_stack(params, spec, inputs.boundary)[0]
    l_bc = ops.mean(ops.square(u_bc - inputs.bc_target))
    return LossBreakdown(l_pde, l_ic, l_bc)


def component_losses(params, spec: MlpSpec, colloc: CollocationSet,
                     scenario: ScenarioConfig) -> LossBreakdown:
    """Mean squared PDE residual, IC misfit and BC misfit."""
    return _components(params, spec, _Inputs(spec, colloc, scenario), scenario.rlw)


def adaptive_total(b: LossBreakdown, w: AdaptiveWeights):
    """``sum_j (exp(-lambda_j) L_j + lambda_j) / 2`` over PDE, IC and BC."""
    total = 0.0
    for loss, lam in zip((b.l_pde, b.l_ic, b.l_bc), w.as_tuple()):
        total = total + 0.5 * ops.exp(-lam) * loss + 0.5 * lam
    return total


def conservative_total(b: LossBreakdown, w: AdaptiveWeights, l_cons, lambda_cons: float):
    if lambda_cons < 0:
        raise UsageError(f"lambda_cons must be non-negative, got {lambda_cons}")
    total = adaptive_total(b, w)
    if lambda_cons == 0:
        return total
    return total + lambda_cons * l_cons


def _invariant_series(params, spec, grid, times, rlw):
    """I1, I2, I3 at each of ``times`` from network values and jet d/dx."""
    nt, nx = times.size, grid.size
    stack = input_stack(spec, np.tile(grid, nt), np.repeat(times, nx), 2)
    out = forward_stack(params, spec, stack)
    if isinstance(out, Var):
        u = ops.reshape(out[0], (nt, nx))
        ux = ops.reshape(out[1], (nt, nx))
    else:
        u, ux = out[0].reshape(nt, nx), out[1].reshape(nt, nx)
    h = (grid[-1] - grid[0]) / (nx - 1)
    u2 = u * u
    dens = (u, u2 + rlw.mu * (ux * ux), u2 * u + 3.0 * u2)
    return [ops.trapezoid(q, h, axis=1) for q in dens]


def conservation_loss(params, spec: MlpSpec, colloc: CollocationSet, scenario: ScenarioConfig,
                      reference=None):
    """Mean squared drift of I1..I3 over the sampled times, summed over k.

    The reference values I_k(t_initial) come from the network itself unless
    ``reference`` (three numbers) is given.
    """
    times = colloc.conservation_times
    if times.size == 0:
        raise UsageError("conservation loss needs at least one sample time")
    all_times = np.concatenate([[colloc.t_initial], times])
    series = _invariant_series(params, spec, colloc.conservation_grid, all_times, scenario.rlw)
    return conservation_penalty(series, reference)


def conservation_penalty(series, reference=None):
    """``sum_k mean_i (I_k(t_i) - I_k(t_0))^2`` from three invariant series.

    Each series holds I_k at t_0 followed by the sample times.  With
    ``reference`` the three numbers replace the t_0 values.
    """
    total = 0.0
    for k, s in enumerate(series):
        ref = s[0] if reference is None else float(reference[k])
        total = total + ops.mean(ops.square(s[1:] - ref))
    return total


def reference_invariants(scenario: ScenarioConfig, grid: np.ndarray) -> np.ndarray:
    """Invariants of the analytic initial condition on ``grid``."""
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    u = physics.initial_condition(grid, scenario)
    ux = physics.initial_condition_dx(grid, scenario)
    return physics.invariants(u, ux, h, scenario.rlw).as_array()


@dataclass
class Evaluation:
    total: float
    breakdown: LossBreakdown
    weights: AdaptiveWeights
    grad: np.ndarray | None = field(default=None, repr=False)


class Objective:
    """Callable ``theta -> (loss, grad)`` for the adaptive or conservative total.

    ``theta`` is the network weights followed by the three adaptive
    log-weights.  ``lambda_cons = 0`` gives the adaptive loss.  The latest
    evaluation is kept in :attr:`last`.
    """

    def __init__(self, spec: MlpSpec, colloc: CollocationSet, scenario: ScenarioConfig,
                 lambda_cons: float = 0.0, reference=None):
        self.spec = spec
        self.colloc = colloc
        self.scenario = scenario
        self.lambda_cons = float(lambda_cons)
        self.reference = reference
        self._inputs = _Inputs(spec, colloc, scenario)
        self.last: Evaluation | None = None
        self.n_evaluations = 0

    @property
    def conservation_active(self) -> bool:
        return self.lambda_cons > 0

    def set_conservation_times(self, times):
        self.colloc.conservation_times = np.asarray(times, dtype=np.float64)

    def _assemble(self, params):
        b = _components(params, self.spec, self._inputs, self.scenario.rlw)
        w = AdaptiveWeights.from_params(params, self.spec)
        if self.conservation_active:
            b.l_cons = conservation_loss(params, self.spec, self.colloc, self.scenario,
                                         self.reference)
        total = conservative_total(b, w, b.l_cons, self.lambda_cons)
        return total, b, w

    def evaluate(self, theta) -> Evaluation:
        total, b, w = self._assemble(np.asarray(theta, dtype=np.float64))
        return Evaluation(float(total), b.as_floats(), w)

    def __call__(self, theta):
        tape = Tape()
        p = tape.params(theta)
        total, b, w = self._assemble(p)
        grad = backward(tape, total)
        tape.clear()
        self.n_evaluations += 1
        self.last = Evaluation(float(total.value), b.as_floats(),
                               AdaptiveWeights(*(float(_val(v)) for v in w.as_tuple())), grad)
        return self.last.total, grad

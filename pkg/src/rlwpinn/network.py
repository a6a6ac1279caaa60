"""Fully connected SiLU network u(x, t; theta) evaluated on Taylor jets.

Parameters live in one flat vector.  Per layer the weight block (row-major,
out x in) is followed by the bias block; when adaptive loss weights are
attached the three log-weights for PDE, IC and BC terms come last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import DT, DX, V, Jet, Var, jet_activation, jet_linear
from .autodiff import ops
from .exceptions import PropagationError, UsageError

N_ADAPTIVE = 3


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths ``[2, h, ..., h, 1]`` plus an optional fixed input scaling.

    When ``input_bounds`` is given as ``((x_lo, x_hi), (t_lo, t_hi))`` the
    inputs are mapped affinely onto [-1, 1] before the first layer.  The map
    is part of the function, so jets see the chain-rule factors.
    """

    layer_widths: tuple[int, ...]
    input_bounds: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2 or widths[0] != 2 or widths[-1] != 1:
            raise ValueError(f"layer widths must start with 2 and end with 1, got {widths}")
        if any(w <= 0 for w in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        if self.input_bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.input_bounds)
            if len(bounds) != 2 or any(not lo < hi for lo, hi in bounds):
                raise ValueError(f"input bounds must be two increasing intervals, got {bounds}")
            object.__setattr__(self, "input_bounds", bounds)

    @classmethod
    def hidden(cls, n_layers: int, width: int, input_bounds=None) -> MlpSpec:
        return cls((2,) + (width,) * n_layers + (1,), input_bounds)

    @property
    def n_weights(self) -> int:
        w = self.layer_widths
        return sum(a * b + b for a, b in zip(w[:-1], w[1:]))

    def n_params(self, adaptive: bool = False) -> int:
        return self.n_weights + (N_ADAPTIVE if adaptive else 0)

    def layer_slices(self):
        """Yield ``(weight_slice, weight_shape, bias_slice)`` per layer."""
        offset = 0
        w = self.layer_widths
        for fan_in, fan_out in zip(w[:-1], w[1:]):
            ws = slice(offset, offset + fan_in * fan_out)
            offset = ws.stop
            bs = slice(offset, offset + fan_out)
            offset = bs.stop
            yield ws, (fan_out, fan_in), bs

    def to_dict(self) -> dict:
        return {"layer_widths": list(self.layer_widths),
                "input_bounds": None if self.input_bounds is None
                else [list(b) for b in self.input_bounds]}

    @classmethod
    def from_dict(cls, data: dict) -> MlpSpec:
        bounds = data.get("input_bounds")
        return cls(tuple(data["layer_widths"]),
                   None if bounds is None else tuple(tuple(b) for b in bounds))


def init_params(spec: MlpSpec, seed: int, attach_adaptive: bool = False) -> np.ndarray:
    """Kaiming-uniform weights in ``[-sqrt(6/fan_in), sqrt(6/fan_in)]``, zero biases."""
    rng = np.random.default_rng(seed)
    params = np.zeros(spec.n_params(attach_adaptive))
    for ws, (fan_out, fan_in), _ in spec.layer_slices():
        bound = np.sqrt(6.0 / fan_in)
        params[ws] = rng.uniform(-bound, bound, size=fan_out * fan_in)
    return params


def adaptive_slice(spec: MlpSpec) -> slice:
    return slice(spec.n_weights, spec.n_weights + N_ADAPTIVE)


def input_stack(spec: MlpSpec, x, t, order: int = 6) -> np.ndarray:
    """Jet stack (order, N, 2) for points seeded as x- and t-inputs."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    x, t = np.broadcast_arrays(x, t)
    stack = np.zeros((order, x.size, 2))
    stack[V, :, 0] = x.ravel()
    stack[V, :, 1] = t.ravel()
    if order > DX:
        stack[DX, :, 0] = 1.0
    if order > DT:
        stack[DT, :, 1] = 1.0
    return _scale_inputs(spec, stack)


def _scale_inputs(spec: MlpSpec, stack: np.ndarray) -> np.ndarray:
    if spec.input_bounds is None:
        return stack
    for col, (lo, hi) in enumerate(spec.input_bounds):
        scale = 2.0 / (hi - lo)
        stack[V, :, col] = (stack[V, :, col] - lo) * scale - 1.0
        stack[1:, :, col] *= scale
    return stack


def forward_stack(params, spec: MlpSpec, stack):
    """Evaluate the network on a jet stack; returns the (K, N) output stack.

    ``params`` may be a plain array or a tape :class:`Var`; in the latter case
    every operation is recorded so gradients reach all weights.
    """
    n_hidden = len(spec.layer_widths) - 2
    h = stack
    for i, (ws, shape, bs) in enumerate(spec.layer_slices()):
        if isinstance(params, Var):
            W = ops.reshape(params[ws], shape)
            b = params[bs]
        else:
            W = params[ws].reshape(shape)
            b = params[bs]
        h = jet_linear(h, W, b)
        if i < n_hidden:
            try:
                h = jet_activation(h, "silu")
            except PropagationError as exc:
                raise PropagationError(f"non-finite activation in hidden layer {i}") from exc
    if isinstance(h, Var):
        return ops.reshape(h, h.shape[:2])
    return h[..., 0]


def forward(params, spec: MlpSpec, x: Jet, t: Jet) -> Jet:
    """Network output with all tracked partials at the seeded point(s)."""
    if not (isinstance(x, Jet) and isinstance(t, Jet)):
        raise UsageError("forward expects x and t as jets; use predict for plain arrays")
    xs, ts = x.to_stack(), t.to_stack()
    xs, ts = np.broadcast_arrays(xs, ts)
    scalar = xs.ndim == 1
    stack = np.stack([xs.reshape(6, -1), ts.reshape(6, -1)], axis=-1)
    stack = _scale_inputs(spec, stack.copy())
    out = forward_stack(np.asarray(params, dtype=np.float64), spec, stack)
    if scalar:
        return Jet.from_stack(out[:, 0])
    return Jet.from_stack(out.reshape((6,) + xs.shape[1:]))


def predict(params, spec: MlpSpec, x, t, order: int = 1) -> np.ndarray:
    """Value-only (order 1) or (value, d/dx) (order 2) evaluation on arrays."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    shape = np.broadcast_shapes(x.shape, t.shape)
    out = forward_stack(np.asarray(params, dtype=np.float64), spec, input_stack(spec, x, t, order))
    if order == 1:
        return out[0].reshape(shape)
    return out.reshape((order,) + shape)

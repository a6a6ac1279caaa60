"""Forward Taylor jets for input derivatives, reverse tape for parameter gradients."""

from . import tape as ops
from .jet import (
    COMPONENTS,
    DT,
    DX,
    DXT,
    DXX,
    DXXT,
    V,
    Jet,
    StackedJet,
    jet_activation,
    jet_apply,
    jet_linear,
    jet_seed,
    silu_derivatives,
    tanh_derivatives,
)
from .tape import Tape, Var, backward

__all__ = [
    "COMPONENTS", "DT", "DX", "DXT", "DXX", "DXXT", "V",
    "Jet", "StackedJet", "Tape", "Var", "backward", "jet_activation", "jet_apply",
    "jet_linear", "jet_seed", "ops", "silu_derivatives", "tanh_derivatives",
]

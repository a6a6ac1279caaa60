"""Truncated Taylor jets in (x, t) up to order (2, 1).

A jet carries the value and the partials indexed by the multi-indices
(0,0) (1,0) (0,1) (1,1) (2,0) (2,1).  The (1,1) cross term is never read by
the RLW residual but the product rule for (2,1) needs it.

Two representations are used.  :class:`Jet` holds named fields (scalars or
arrays) and implements the jet algebra directly.  For network evaluation the
components are stacked along a leading axis of length 1, 2 or 6 (value only,
value + d/dx, or the full set) and pushed through :func:`jet_linear` and
:func:`jet_activation`, which are single tape primitives with hand-written
vector-Jacobian products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..exceptions import PropagationError, UsageError
from . import _kernels
from .tape import Var, _tape_of, _value

V, DX, DT, DXT, DXX, DXXT = range(6)
COMPONENTS = ("v", "dx", "dt", "dxt", "dxx", "dxxt")
ALLOWED_ORDERS = (1, 2, 6)


def _sigmoid(z):
    return expit(np.asarray(z, dtype=np.float64))


def silu_derivatives(z, order: int = 3):
    """``silu`` and its first ``order`` derivatives in closed form.

    With s = sigmoid(z), silu^(n)(z) = z s^(n) + n s^(n-1) and the sigmoid
    derivatives are polynomials in s.
    """
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 0
    s = _sigmoid(np.atleast_1d(z))
    z1 = np.atleast_1d(z)
    q = s * (1.0 - s)
    out = [z1 * s]
    if order >= 1:
        out.append(s + z1 * q)
    if order >= 2:
        s2 = q * (1.0 - 2.0 * s)
        out.append(2.0 * q + z1 * s2)
    if order >= 3:
        s3 = q * (1.0 - 6.0 * q)
        out.append(3.0 * s2 + z1 * s3)
    if order >= 4:
        s4 = s2 * (1.0 - 12.0 * q)
        out.append(4.0 * s3 + z1 * s4)
    if scalar:
        out = [o[0] for o in out]
    return out


def tanh_derivatives(z, order: int = 3):
    t = np.tanh(np.asarray(z, dtype=np.float64))
    p = 1.0 - t * t
    out = [t, p, -2.0 * t * p, p * (6.0 * t * t - 2.0), 8.0 * t * p * (2.0 - 3.0 * t * t)]
    return out[:order + 1]


ACTIVATIONS = {"silu": silu_derivatives, "tanh": tanh_derivatives}


@dataclass
class Jet:
    v: object = 0.0
    dx: object = 0.0
    dt: object = 0.0
    dxt: object = 0.0
    dxx: object = 0.0
    dxxt: object = 0.0

    def components(self):
        return tuple(getattr(self, c) for c in COMPONENTS)

    def to_stack(self, order: int = 6) -> np.ndarray:
        return np.stack(np.broadcast_arrays(*(np.asarray(c, dtype=np.float64)
                                              for c in self.components()[:order])))

    @classmethod
    def from_stack(cls, stack) -> Jet:
        stack = np.asarray(stack)
        fields = {c: stack[i] for i, c in enumerate(COMPONENTS[:len(stack)])}
        return cls(**fields)

    def __add__(self, other):
        return jet_apply("add", self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return jet_apply("mul", self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return jet_apply("neg", self)

    def __sub__(self, other):
        return jet_apply("add", self, jet_apply("neg", other) if isinstance(other, Jet) else -other)


def jet_seed(kind: str, value) -> Jet:
    """Seed a jet for an input coordinate or a constant."""
    if not np.all(np.isfinite(value)):
        raise UsageError(f"jet seed value must be finite, got {value!r}")
    zero = np.zeros_like(value, dtype=np.float64) if np.ndim(value) else 0.0
    one = np.ones_like(value, dtype=np.float64) if np.ndim(value) else 1.0
    if kind == "x":
        return Jet(value, one, zero, zero, zero, zero)
    if kind == "t":
        return Jet(value, zero, one, zero, zero, zero)
    if kind == "constant":
        return Jet(value, zero, zero, zero, zero, zero)
    raise UsageError(f"seed kind must be 'x', 't' or 'constant', got {kind!r}")


def _compose(f, a: Jet) -> Jet:
    """Chain rule for a scalar function given its derivatives ``f = (f0..f3)``."""
    f0, f1, f2, f3 = f
    return Jet(
        v=f0,
        dx=f1 * a.dx,
        dt=f1 * a.dt,
        dxt=f2 * a.dx * a.dt + f1 * a.dxt,
        dxx=f2 * a.dx * a.dx + f1 * a.dxx,
        dxxt=(f3 * a.dx * a.dx * a.dt
              + f2 * (2.0 * a.dx * a.dxt + a.dxx * a.dt)
              + f1 * a.dxxt),
    )


def _product(a: Jet, b: Jet) -> Jet:
    return Jet(
        v=a.v * b.v,
        dx=a.dx * b.v + a.v * b.dx,
        dt=a.dt * b.v + a.v * b.dt,
        dxt=a.dxt * b.v + a.dx * b.dt + a.dt * b.dx + a.v * b.dxt,
        dxx=a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx,
        dxxt=(a.dxxt * b.v + a.dxx * b.dt + 2.0 * a.dxt * b.dx
              + 2.0 * a.dx * b.dxt + a.dt * b.dxx + a.v * b.dxxt),
    )


def jet_apply(op: str, a: Jet, b=None) -> Jet:
    """Apply one primitive of the jet algebra.

    ``op`` is one of ``add``, ``mul``, ``scale``, ``neg``, ``silu``, ``tanh``.
    ``b`` is a jet or a scalar for the binary operations.
    """
    if op == "add":
        if isinstance(b, Jet):
            out = Jet(*(x + y for x, y in zip(a.components(), b.components())))
        else:
            out = Jet(a.v + b, a.dx, a.dt, a.dxt, a.dxx, a.dxxt)
    elif op == "mul":
        out = _product(a, b) if isinstance(b, Jet) else jet_apply("scale", a, b)
    elif op == "scale":
        out = Jet(*(b * x for x in a.components()))
    elif op == "neg":
        out = Jet(*(-x for x in a.components()))
    elif op in ACTIVATIONS:
        out = _compose(ACTIVATIONS[op](a.v, 3), a)
    else:
        raise UsageError(f"unknown jet primitive {op!r}")
    for name, value in zip(COMPONENTS, out.components()):
        if not np.all(np.isfinite(value)):
            raise PropagationError(f"jet primitive {op!r} produced a non-finite {name}")
    return out


# ---------------------------------------------------------------------------
# stacked jets on the tape

def _check_order(k):
    if k not in ALLOWED_ORDERS:
        raise UsageError(f"jet stacks carry 1, 2 or 6 components, got {k}")


def jet_linear(J, W, b):
    """Affine layer on a jet stack: ``out[k] = J[k] @ W.T``, bias on the value only.

    ``J`` has shape (K, N, fan_in), ``W`` (fan_out, fan_in), ``b`` (fan_out,).
    Each component is a separate 2-D product so the value slice is computed
    exactly as in a value-only evaluation.
    """
    vJ, vW, vb = _value(J), _value(W), _value(b)
    K = vJ.shape[0]
    _check_order(K)
    out = np.empty((K, vJ.shape[1], vW.shape[0]))
    WT = vW.T
    for k in range(K):
        np.matmul(vJ[k], WT, out=out[k])
    out[0] += vb
    tape = _tape_of(J, W, b)
    if tape is None:
        return out
    parents = []
    if isinstance(J, Var):
        parents.append((J, lambda g: np.matmul(g, vW)))
    if isinstance(W, Var):
        fan_out, fan_in = vW.shape

        def vjp_w(g):
            return g.reshape(-1, fan_out).T @ vJ.reshape(-1, fan_in)

        parents.append((W, vjp_w))
    if isinstance(b, Var):
        parents.append((b, lambda g: g[0].sum(axis=0)))
    return Var(out, tape, parents)


def _activation_forward(f, z):
    K = z.shape[0]
    out = np.empty_like(z)
    out[V] = f[0]
    if K == 1:
        return out
    f1 = f[1]
    zx = z[DX]
    out[DX] = f1 * zx
    if K == 2:
        return out
    f2, f3 = f[2], f[3]
    zt, zxt, zxx, zxxt = z[DT], z[DXT], z[DXX], z[DXXT]
    zx2 = zx * zx
    out[DT] = f1 * zt
    out[DXT] = f2 * zx * zt + f1 * zxt
    out[DXX] = f2 * zx2 + f1 * zxx
    out[DXXT] = f3 * zx2 * zt + f2 * (2.0 * zx * zxt + zxx * zt) + f1 * zxxt
    return out


def _activation_vjp(f, z, g):
    K = z.shape[0]
    gz = np.empty_like(z)
    f1 = f[1]
    if K == 1:
        gz[V] = g[V] * f1
        return gz
    f2 = f[2]
    zx = z[DX]
    if K == 2:
        gz[V] = g[V] * f1 + g[DX] * f2 * zx
        gz[DX] = g[DX] * f1
        return gz
    f3, f4 = f[3], f[4]
    zt, zxt, zxx, zxxt = z[DT], z[DXT], z[DXX], z[DXXT]
    gv, gx, gt, gxt, gxx, gxxt = g
    zx2 = zx * zx
    gz[V] = (gv * f1 + gx * f2 * zx + gt * f2 * zt
             + gxt * (f3 * zx * zt + f2 * zxt)
             + gxx * (f3 * zx2 + f2 * zxx)
             + gxxt * (f4 * zx2 * zt + f3 * (2.0 * zx * zxt + zxx * zt) + f2 * zxxt))
    gz[DX] = (gx * f1 + gxt * f2 * zt + 2.0 * gxx * f2 * zx
              + 2.0 * gxxt * (f3 * zx * zt + f2 * zxt))
    gz[DT] = gt * f1 + gxt * f2 * zx + gxxt * (f3 * zx2 + f2 * zxx)
    gz[DXT] = gxt * f1 + 2.0 * gxxt * f2 * zx
    gz[DXX] = gxx * f1 + gxxt * f2 * zt
    gz[DXXT] = gxxt * f1
    return gz


def jet_activation(Z, name: str = "silu", fused: bool = True):
    """Elementwise activation applied to a jet stack of shape (K, ...).

    SiLU goes through fused compiled loops unless ``fused`` is False; the
    plain numpy path is kept for tanh and as an independent cross-check.
    """
    vZ = _value(Z)
    K = vZ.shape[0]
    _check_order(K)
    if name == "silu" and fused:
        s = _sigmoid(vZ[V])
        out = _kernels.silu_stack(vZ, s)
        vjp = lambda g: _kernels.silu_stack_vjp(vZ, s, g)  # noqa: E731
    else:
        need = {1: 1, 2: 2, 6: 4}[K]
        # backward needs one derivative more than forward
        f = ACTIVATIONS[name](vZ[V], need if isinstance(Z, Var) else need - 1)
        out = _activation_forward(f, vZ)
        vjp = lambda g: _activation_vjp(f, vZ, g)  # noqa: E731
    if not np.all(np.isfinite(out)):
        raise PropagationError(f"non-finite value produced by activation {name!r}")
    if not isinstance(Z, Var):
        return out
    return Var(out, Z.tape, [(Z, vjp)])


class StackedJet:
    """Named read access to the components of a jet-stacked tape variable."""

    def __init__(self, stack):
        self.stack = stack
        self.order = _value(stack).shape[0]

    def _component(self, idx):
        if idx >= self.order:
            raise UsageError(f"component {COMPONENTS[idx]} not tracked by an order-{self.order} jet")
        return self.stack[idx]

    v = property(lambda self: self._component(V))
    dx = property(lambda self: self._component(DX))
    dt = property(lambda self: self._component(DT))
    dxt = property(lambda self: self._component(DXT))
    dxx = property(lambda self: self._component(DXX))
    dxxt = property(lambda self: self._component(DXXT))

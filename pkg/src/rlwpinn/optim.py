"""Adam and L-BFGS on flat parameter vectors."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import OptimizerError

log = logging.getLogger(__name__)


def _check_finite(grads):
    bad = np.flatnonzero(~np.isfinite(grads))
    if bad.size:
        raise OptimizerError(f"non-finite gradient entry at index {bad[0]} ({grads[bad[0]]})")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int, **kwargs) -> AdamState:
        return cls(np.zeros(n), np.zeros(n), **kwargs)


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update; returns ``(new_params, state)``."""
    grads = np.asarray(grads, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    if grads.shape != params.shape or state.m.shape != params.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, "
                         f"state {state.m.shape}")
    _check_finite(grads)
    state.step_count += 1
    b1, b2 = state.beta1, state.beta2
    state.m = b1 * state.m + (1.0 - b1) * grads
    state.v = b2 * state.v + (1.0 - b2) * (grads * grads)
    m_hat = state.m / (1.0 - b1 ** state.step_count)
    v_hat = state.v / (1.0 - b2 ** state.step_count)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps), state


@dataclass
class LbfgsState:
    m_hist: int = 20
    c1: float = 1e-4
    c2: float = 0.9
    max_bisections: int = 25
    step_scale: float = 1.0
    grad_tol: float = 1e-9
    history: deque = field(default_factory=deque)
    loss: float | None = None
    grad: np.ndarray | None = None
    n_iter: int = 0
    converged: bool = False
    warnings: list = field(default_factory=list)

    def reset(self):
        self.history.clear()
        self.loss = None
        self.grad = None


@dataclass
class StepInfo:
    accepted: bool
    loss: float
    step_length: float = 0.0
    n_evals: int = 0
    fallback: bool = False


def _two_loop(grad, history):
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimiser of the cubic interpolating (a, fa, ga), (b, fb, gb), or None."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    rad = d1 * d1 - ga * gb
    if rad < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(rad)
    denom = gb - ga + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (gb + d2 - d1) / denom


def _strong_wolfe(phi, f0, g0, alpha, c1, c2, max_iter):
    """Bracketing and zoom line search.

    ``phi(alpha) -> (f, dphi, payload)``.  Returns ``(alpha, f, payload, n_evals)``
    or ``None`` when no acceptable point is found within ``max_iter`` trials.
    """
    n = 0
    a_prev, f_prev, g_prev = 0.0, f0, g0
    lo = hi = None
    best = None
    while n < max_iter:
        f, g, payload = phi(alpha)
        n += 1
        if np.isfinite(f) and f <= f0 + c1 * alpha * g0 and (best is None or f < best[1]):
            best = (alpha, f, payload)
        if not np.isfinite(f):
            lo, hi = (a_prev, f_prev, g_prev), (alpha, np.inf, np.nan)
            break
        if f > f0 + c1 * alpha * g0 or (n > 1 and f >= f_prev):
            lo, hi = (a_prev, f_prev, g_prev), (alpha, f, g)
            break
        if abs(g) <= -c2 * g0:
            return alpha, f, payload, n
        if g >= 0:
            lo, hi = (alpha, f, g), (a_prev, f_prev, g_prev)
            break
        a_prev, f_prev, g_prev = alpha, f, g
        alpha *= 2.0
    else:
        return _best(best, n)

    while n < max_iter:
        (a_lo, f_lo, g_lo), (a_hi, f_hi, g_hi) = lo, hi
        trial = None
        if np.isfinite(f_hi) and np.isfinite(g_hi):
            trial = _cubic_min(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi)
        left, right = min(a_lo, a_hi), max(a_lo, a_hi)
        width = right - left
        if trial is None or not (left + 0.1 * width <= trial <= right - 0.1 * width):
            trial = 0.5 * (a_lo + a_hi)
        f, g, payload = phi(trial)
        n += 1
        if not np.isfinite(f) or f > f0 + c1 * trial * g0 or f >= f_lo:
            hi = (trial, f if np.isfinite(f) else np.inf, g)
        else:
            if best is None or f < best[1]:
                best = (trial, f, payload)
            if abs(g) <= -c2 * g0:
                return trial, f, payload, n
            if g * (a_hi - a_lo) >= 0:
                hi = lo
            lo = (trial, f, g)
        if abs(hi[0] - lo[0]) < 1e-16 * max(1.0, abs(lo[0])):
            break
    return _best(best, n)


def _best(best, n):
    # no strong-Wolfe point; accept the best sufficient-decrease point seen
    if best is None:
        return None
    return best[0], best[1], best[2], n


def lbfgs_step(state: LbfgsState, params, loss_fn):
    """One L-BFGS iteration; returns ``(new_params, state, StepInfo)``.

    ``loss_fn(params) -> (loss, grad)`` must be deterministic for the whole
    step.  Pairs with ``s @ y <= 1e-10`` are dropped.  When the line search
    fails the step falls back to a backtracking gradient step and a warning
    is recorded.
    """
    params = np.asarray(params, dtype=np.float64)
    calls = [0]

    def counted(x):
        calls[0] += 1
        return loss_fn(x)

    if state.grad is None:
        state.loss, state.grad = counted(params)
        _check_finite(state.grad)
    f0, g0 = state.loss, state.grad
    if np.linalg.norm(g0) < state.grad_tol:
        state.converged = True
        return params, state, StepInfo(False, f0, 0.0, calls[0])

    direction = _two_loop(g0, state.history)
    slope = direction @ g0
    if not slope < 0:
        state.history.clear()
        direction = -g0
        slope = direction @ g0
    if state.history:
        alpha0 = state.step_scale
    else:
        alpha0 = state.step_scale * min(1.0, 1.0 / np.abs(g0).sum())

    def phi(alpha):
        x = params + alpha * direction
        f, g = counted(x)
        return f, (g @ direction) if np.all(np.isfinite(g)) else np.nan, (x, g)

    found = _strong_wolfe(phi, f0, slope, alpha0, state.c1, state.c2, state.max_bisections)
    fallback = False
    if found is None or not found[1] <= f0:
        found = _fallback(params, f0, g0, counted, state)
        fallback = True
        if found is None:
            state.converged = True
            return params, state, StepInfo(False, f0, 0.0, calls[0], fallback=True)
    alpha, f_new, (x_new, g_new) = found[0], found[1], found[2]
    _check_finite(g_new)
    s = x_new - params
    y = g_new - g0
    sy = s @ y
    if sy > 1e-10:
        state.history.append((s, y, 1.0 / sy))
        while len(state.history) > state.m_hist:
            state.history.popleft()
    state.loss, state.grad = f_new, g_new
    state.n_iter += 1
    if np.linalg.norm(g_new) < state.grad_tol:
        state.converged = True
    return x_new, state, StepInfo(True, f_new, alpha, calls[0], fallback)


def _fallback(params, f0, g0, loss_fn, state):
    msg = f"L-BFGS line search failed at iteration {state.n_iter}; taking a gradient step"
    log.warning(msg)
    state.warnings.append(msg)
    state.history.clear()
    gnorm = np.linalg.norm(g0)
    alpha = 1e-3 * state.step_scale / gnorm
    for _ in range(state.max_bisections):
        x = params - alpha * g0
        f, g = loss_fn(x)
        if np.isfinite(f) and f < f0:
            return alpha, f, (x, g), 0
        alpha *= 0.5
    return None


def minimize_lbfgs(loss_fn, params, max_iter: int = 100, **state_kwargs):
    """Run L-BFGS iterations until convergence or ``max_iter``."""
    state = LbfgsState(**state_kwargs)
    for _ in range(max_iter):
        params, state, info = lbfgs_step(state, params, loss_fn)
        if state.converged:
            break
    return params, state

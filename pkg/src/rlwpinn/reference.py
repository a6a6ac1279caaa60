"""Finite-difference RLW solver used as an independent reference.

Writing w = u - mu u_xx the equation becomes w_t = -(u + eps u^2 / 2)_x.  The
three-level scheme

    (I - mu D2)(u^{n+1} - u^{n-1}) / (2 dt)
        = -D1 [(1 + eps/2 u^n) (u^{n+1} + u^{n-1}) / 2]

is second order in space and time, implicit in the dispersive term and
linear in the unknown level, so every step is one tridiagonal solve.
Dirichlet values at both ends come from :func:`physics.boundary_value`.
The first step uses a Crank-Nicolson step with a few Picard sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import physics
from .exceptions import InstabilityError
from .fields import GridField
from .physics import ScenarioConfig

# blow-up threshold relative to the initial max |u|
_BLOWUP_FACTOR = 10.0
_PICARD_SWEEPS = 4


def _divides(length: float, step: float) -> bool:
    n = length / step
    return abs(n - round(n)) < 1e-8 * max(1.0, n)


@dataclass
class FdConfig:
    scenario: ScenarioConfig
    dx: float = 0.1
    dt: float = 0.01
    output_times: np.ndarray | None = None
    t_final: float | None = None

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError(f"dx and dt must be positive, got dx={self.dx}, dt={self.dt}")
        if self.t_final is None:
            self.t_final = self.scenario.t_final
        length = self.scenario.x_max - self.scenario.x_min
        if not _divides(length, self.dx):
            raise ValueError(f"dx={self.dx} does not divide the domain length {length}")
        if not _divides(self.t_final, self.dt):
            raise ValueError(f"dt={self.dt} does not divide t_final={self.t_final}")
        if self.output_times is None:
            self.output_times = np.linspace(0.0, self.t_final, 101)
        self.output_times = np.asarray(self.output_times, dtype=np.float64)
        if np.any(self.output_times < 0) or np.any(self.output_times > self.t_final + 1e-12):
            raise ValueError("output times must lie in [0, t_final]")

    @property
    def n_x(self) -> int:
        return int(round((self.scenario.x_max - self.scenario.x_min) / self.dx)) + 1

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


def default_fd_config(scenario: ScenarioConfig, **overrides) -> FdConfig:
    """Resolutions that keep each benchmark at desk scale."""
    if scenario.kind == physics.UNDULAR_BORE:
        kw = dict(dx=0.15, dt=0.05)
    else:
        kw = dict(dx=0.1, dt=0.01)
    kw.update(overrides)
    return FdConfig(scenario=scenario, **kw)


def _operator_bands(u_mid, mu, eps, dx, dt, sign):
    """Banded form of (I - mu D2) + sign * dt * D1 diag(1 + eps/2 u_mid) on interior rows."""
    n = u_mid.size
    c = 1.0 + 0.5 * eps * u_mid
    a = mu / (dx * dx)
    b = sign * dt / (2.0 * dx)
    ab = np.zeros((3, n))
    # ab[0, j] is the superdiagonal entry (j-1, j); ab[2, j] the subdiagonal (j+1, j)
    ab[1, :] = 1.0 + 2.0 * a
    ab[0, 1:] = -a + b * c[1:]
    ab[2, :-1] = -a - b * c[:-1]
    # Dirichlet rows
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    return ab


def _apply_bands(ab, u):
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out


def fd_solve(cfg: FdConfig) -> GridField:
    """Integrate the scenario to ``cfg.t_final``; returns snapshots at ``output_times``."""
    sc = cfg.scenario
    eps, mu = sc.rlw.epsilon, sc.rlw.mu
    dx, dt = cfg.dx, cfg.dt
    x = np.linspace(sc.x_min, sc.x_max, cfg.n_x)
    ends = np.array([x[0], x[-1]])

    def bc(t):
        return physics.boundary_value(ends, t, sc)

    u_prev = physics.initial_condition(x, sc)
    limit = _BLOWUP_FACTOR * max(np.max(np.abs(u_prev)), 1e-300)
    out_steps = np.rint(cfg.output_times / dt).astype(int)
    snapshots = np.empty((out_steps.size, x.size))
    snapshots[out_steps == 0] = u_prev

    # first step: Crank-Nicolson, nonlinearity at the half level via Picard sweeps
    u_next = u_prev.copy()
    for _ in range(_PICARD_SWEEPS):
        mid = 0.5 * (u_prev + u_next)
        lhs = _operator_bands(mid, mu, eps, dx, 0.5 * dt, +1.0)
        rhs = _apply_bands(_operator_bands(mid, mu, eps, dx, 0.5 * dt, -1.0), u_prev)
        rhs[[0, -1]] = bc(dt)
        u_next = solve_banded((1, 1), lhs, rhs)
    u_cur = u_next
    snapshots[out_steps == 1] = u_cur

    for n in range(1, cfg.n_steps):
        lhs = _operator_bands(u_cur, mu, eps, dx, dt, +1.0)
        rhs = _apply_bands(_operator_bands(u_cur, mu, eps, dx, dt, -1.0), u_prev)
        rhs[[0, -1]] = bc((n + 1) * dt)
        u_new = solve_banded((1, 1), lhs, rhs, check_finite=False)
        peak = np.max(np.abs(u_new))
        if not np.isfinite(peak) or peak > limit:
            raise InstabilityError(
                f"finite-difference solution blew up at step {n + 1} (t={(n + 1) * dt:g}): "
                f"max|u|={peak:g} exceeds {limit:g}", step=n + 1, time=(n + 1) * dt)
        u_prev, u_cur = u_cur, u_new
        hit = out_steps == n + 1
        if np.any(hit):
            snapshots[hit] = u_cur
    return GridField(x, cfg.output_times, snapshots)

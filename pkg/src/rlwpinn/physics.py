"""RLW equation, benchmark scenarios and conserved integrals.

The regularized long wave equation in dimensionless form is

    u_t + u_x + eps * u * u_x - mu * u_xxt = 0

and conserves mass, momentum and energy:

    I1 = int u dx,  I2 = int (u^2 + mu u_x^2) dx,  I3 = int (u^3 + 3 u^2) dx.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

SINGLE_SOLITON = "single-soliton"
TWO_SOLITON = "two-soliton"
UNDULAR_BORE = "undular-bore"
SCENARIO_KINDS = (SINGLE_SOLITON, TWO_SOLITON, UNDULAR_BORE)


@dataclass(frozen=True)
class RlwParams:
    epsilon: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.mu > 0):
            raise ValueError(
                f"epsilon and mu must be positive, got epsilon={self.epsilon}, mu={self.mu}"
            )


@dataclass(frozen=True)
class ScenarioConfig:
    """One benchmark problem: domain, horizon, RLW coefficients and IC family.

    Only the parameters belonging to ``kind`` are read; the others keep their
    defaults and are ignored.
    """

    kind: str
    rlw: RlwParams
    x_min: float
    x_max: float
    t_final: float
    # single soliton
    d: float = 0.1
    x0: float = 0.0
    # two solitons, peak of wave j is 3 * amplitudes[j]
    amplitudes: tuple[float, ...] = (5.333 / 3.0, 1.688 / 3.0)
    centers: tuple[float, ...] = (15.0, 35.0)
    # undular bore
    u0: float = 0.1
    xc: float = 0.0
    slope: float = 5.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.kind == TWO_SOLITON and len(self.amplitudes) != len(self.centers):
            raise ValueError("amplitudes and centers must have the same length")
        if self.kind == UNDULAR_BORE and not self.slope > 0:
            raise ValueError("bore slope d must be positive")

    @property
    def has_exact_solution(self) -> bool:
        return self.kind == SINGLE_SOLITON

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["amplitudes"] = list(self.amplitudes)
        out["centers"] = list(self.centers)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        data = dict(data)
        rlw = data.pop("rlw")
        if not isinstance(rlw, RlwParams):
            rlw = RlwParams(**rlw)
        for key in ("amplitudes", "centers"):
            if key in data:
                data[key] = tuple(float(v) for v in data[key])
        return cls(rlw=rlw, **data)


def single_soliton(**overrides) -> ScenarioConfig:
    base = dict(kind=SINGLE_SOLITON, rlw=RlwParams(1.0, 1.0), x_min=-40.0, x_max=60.0,
                t_final=20.0, d=0.1, x0=0.0)
    base.update(overrides)
    return ScenarioConfig(**base)


def two_soliton(**overrides) -> ScenarioConfig:
    base = dict(kind=TWO_SOLITON, rlw=RlwParams(1.0, 1.0), x_min=0.0, x_max=120.0,
                t_final=30.0)
    base.update(overrides)
    return ScenarioConfig(**base)


def undular_bore(slope: float = 5.0, **overrides) -> ScenarioConfig:
    base = dict(kind=UNDULAR_BORE, rlw=RlwParams(1.5, 1.0 / 6.0), x_min=-36.0, x_max=300.0,
                t_final=250.0, u0=0.1, xc=0.0, slope=slope)
    base.update(overrides)
    return ScenarioConfig(**base)


def make_scenario(kind: str, **overrides) -> ScenarioConfig:
    factories = {SINGLE_SOLITON: single_soliton, TWO_SOLITON: two_soliton,
                 UNDULAR_BORE: undular_bore}
    if kind not in factories:
        raise ValueError(f"unknown scenario kind {kind!r}; expected one of {SCENARIO_KINDS}")
    return factories[kind](**overrides)


def soliton_speed_and_wavenumber(amplitude: float, rlw: RlwParams) -> tuple[float, float]:
    v = 1.0 + rlw.epsilon * amplitude
    k = 0.5 * np.sqrt(rlw.epsilon * amplitude / (rlw.mu * v))
    return v, k


def _sech2(z):
    return 1.0 / np.cosh(z) ** 2


def exact_single_soliton(x, t, cfg: ScenarioConfig):
    """Closed-form travelling soliton ``3d sech^2(k (x - v t - x0))``."""
    if cfg.kind != SINGLE_SOLITON:
        raise ValueError(f"exact solution only exists for {SINGLE_SOLITON}, got {cfg.kind}")
    v, k = soliton_speed_and_wavenumber(cfg.d, cfg.rlw)
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return 3.0 * cfg.d * _sech2(k * (x - v * t - cfg.x0))


def initial_condition(x, cfg: ScenarioConfig):
    x = np.asarray(x, dtype=np.float64)
    if cfg.kind == SINGLE_SOLITON:
        return exact_single_soliton(x, 0.0, cfg)
    if cfg.kind == TWO_SOLITON:
        out = np.zeros_like(x)
        for a, xj in zip(cfg.amplitudes, cfg.centers):
            _, k = soliton_speed_and_wavenumber(a, cfg.rlw)
            out = out + 3.0 * a * _sech2(k * (x - xj))
        return out
    return 0.5 * cfg.u0 * (1.0 - np.tanh((x - cfg.xc) / cfg.slope))


def initial_condition_dx(x, cfg: ScenarioConfig):
    """Analytic x-derivative of :func:`initial_condition`."""
    x = np.asarray(x, dtype=np.float64)
    if cfg.kind == UNDULAR_BORE:
        return -0.5 * cfg.u0 / cfg.slope * _sech2((x - cfg.xc) / cfg.slope)
    if cfg.kind == SINGLE_SOLITON:
        terms = [(cfg.d, cfg.x0)]
    else:
        terms = list(zip(cfg.amplitudes, cfg.centers))
    out = np.zeros_like(x)
    for a, xj in terms:
        _, k = soliton_speed_and_wavenumber(a, cfg.rlw)
        z = k * (x - xj)
        out = out - 6.0 * a * k * _sech2(z) * np.tanh(z)
    return out


def boundary_value(x, t, cfg: ScenarioConfig):
    """Dirichlet data at the domain endpoints.

    Single soliton uses the exact solution; two solitons decay to zero at both
    ends; the bore keeps its far-field plateaus ``u0`` (left) and 0 (right).
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if cfg.kind == SINGLE_SOLITON:
        return exact_single_soliton(x, t, cfg)
    x, t = np.broadcast_arrays(x, t)
    if cfg.kind == TWO_SOLITON:
        return np.zeros(x.shape)
    mid = 0.5 * (cfg.x_min + cfg.x_max)
    return np.where(x < mid, cfg.u0, 0.0)


def rlw_residual(u, rlw: RlwParams):
    """``u_t + u_x + eps u u_x - mu u_xxt`` read from a jet.

    Works for :class:`~rlwpinn.autodiff.Jet` values and for jet-stacked tape
    variables exposing the same field names.
    """
    return u.dt + u.dx + rlw.epsilon * u.v * u.dx - rlw.mu * u.dxxt


def trapezoid(values, spacing: float, axis: int = -1):
    """Composite trapezoid rule on a uniform grid."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[axis] < 2:
        raise ValueError("trapezoid needs at least 2 samples")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    values = np.moveaxis(values, axis, -1)
    return spacing * (values[..., 1:-1].sum(axis=-1) + 0.5 * (values[..., 0] + values[..., -1]))


@dataclass(frozen=True)
class ConservedTriple:
    i1: float
    i2: float
    i3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3])


def invariant_densities(u, u_x, rlw: RlwParams):
    """Integrands of mass, momentum and energy."""
    u2 = u * u
    return u, u2 + rlw.mu * u_x * u_x, u2 * u + 3.0 * u2


def invariants(u, u_x, spacing: float, rlw: RlwParams) -> ConservedTriple:
    u = np.asarray(u, dtype=np.float64)
    u_x = np.asarray(u_x, dtype=np.float64)
    if u.shape != u_x.shape:
        raise ValueError(f"u and u_x must have the same shape, got {u.shape} and {u_x.shape}")
    dens = invariant_densities(u, u_x, rlw)
    return ConservedTriple(*(float(trapezoid(q, spacing)) for q in dens))


def soliton_invariants(d: float, rlw: RlwParams) -> ConservedTriple:
    """Closed-form invariants of one ``3d sech^2(k x)`` profile on the real line."""
    _, k = soliton_speed_and_wavenumber(d, rlw)
    mu = rlw.mu
    i1 = 6.0 * d / k
    i2 = 12.0 * d * d / k + mu * 48.0 * d * d * k / 5.0
    i3 = 144.0 * d ** 3 / (5.0 * k) + 36.0 * d * d / k
    return ConservedTriple(i1, i2, i3)


def uniform_grid(cfg: ScenarioConfig, n: int) -> tuple[np.ndarray, float]:
    grid = np.linspace(cfg.x_min, cfg.x_max, n)
    return grid, (cfg.x_max - cfg.x_min) / (n - 1)

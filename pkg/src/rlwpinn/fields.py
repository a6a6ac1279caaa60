"""Evaluable solution fields u(x, t) over a declared space-time region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network
from .exceptions import RegionError
from .network import MlpSpec

# absolute slack when checking region membership, absorbs linspace round-off
_REGION_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    t_min: float
    t_max: float

    def check(self, x, t):
        x = np.asarray(x, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        tol_x = _REGION_TOL * max(1.0, abs(self.x_min), abs(self.x_max))
        tol_t = _REGION_TOL * max(1.0, abs(self.t_min), abs(self.t_max))
        if np.any(x < self.x_min - tol_x) or np.any(x > self.x_max + tol_x):
            raise RegionError(
                f"x outside [{self.x_min}, {self.x_max}]: range [{np.min(x)}, {np.max(x)}]")
        if np.any(t < self.t_min - tol_t) or np.any(t > self.t_max + tol_t):
            raise RegionError(
                f"t outside [{self.t_min}, {self.t_max}]: range [{np.min(t)}, {np.max(t)}]")
        return x, t

    def intersect(self, other: Region) -> Region:
        out = Region(max(self.x_min, other.x_min), min(self.x_max, other.x_max),
                     max(self.t_min, other.t_min), min(self.t_max, other.t_max))
        if out.x_min > out.x_max or out.t_min > out.t_max:
            raise RegionError(f"regions {self} and {other} do not overlap")
        return out


class SolutionField:
    """Base class: subclasses implement ``_eval`` and ``_profile``."""

    region: Region

    def __call__(self, x, t):
        x, t = self.region.check(x, t)
        return self._eval(*np.broadcast_arrays(x, t))

    def profile(self, x, t: float):
        """Values and x-derivatives on the spatial grid ``x`` at time ``t``."""
        x, _ = self.region.check(x, t)
        return self._profile(x, float(t))

    def _profile(self, x, t):
        u = self._eval(x, np.full_like(x, t))
        return u, np.gradient(u, x, edge_order=2)


class NetworkField(SolutionField):
    """A trained network restricted to the region it was trained on."""

    def __init__(self, params, spec: MlpSpec, region: Region):
        self.params = np.asarray(params, dtype=np.float64)
        self.spec = spec
        self.region = region

    def _eval(self, x, t):
        return network.predict(self.params, self.spec, x, t)

    def _profile(self, x, t):
        out = network.predict(self.params, self.spec, x, np.full_like(x, t), order=2)
        return out[0], out[1]


class StitchedField(SolutionField):
    """Piecewise-in-time composition of window fields.

    Window 1 owns the closed interval [t0, t1]; window i > 1 owns (t_{i-1}, t_i].
    """

    def __init__(self, windows: list[SolutionField]):
        if not windows:
            raise ValueError("stitch needs at least one window")
        for prev, nxt in zip(windows[:-1], windows[1:]):
            if prev.region.t_max != nxt.region.t_min:
                raise ValueError(
                    f"windows not contiguous: {prev.region.t_max} != {nxt.region.t_min}")
        self.windows = list(windows)
        first, last = windows[0].region, windows[-1].region
        self.region = Region(max(w.region.x_min for w in windows),
                             min(w.region.x_max for w in windows), first.t_min, last.t_max)
        self.boundaries = np.array([w.region.t_min for w in windows] + [last.t_max])

    def window_index(self, t):
        """Index of the window that owns each time ``t``."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.boundaries[1:], t, side="left")
        return np.minimum(idx, len(self.windows) - 1)

    def _eval(self, x, t):
        out = np.empty(x.shape)
        idx = self.window_index(t)
        for i, w in enumerate(self.windows):
            mask = idx == i
            if np.any(mask):
                out[mask] = w._eval(x[mask], t[mask])
        return out

    def _profile(self, x, t):
        return self.windows[int(self.window_index(t))]._profile(x, t)


class GridField(SolutionField):
    """Snapshots on a uniform x grid, bilinear in (x, t) between nodes."""

    def __init__(self, x, times, values):
        self.x = np.asarray(x, dtype=np.float64)
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.shape != (self.times.size, self.x.size):
            raise ValueError(f"values shape {self.values.shape} != (n_times, n_x) "
                             f"= ({self.times.size}, {self.x.size})")
        self.region = Region(self.x[0], self.x[-1], self.times[0], self.times[-1])

    def snapshot(self, t: float) -> np.ndarray:
        """Profile on the native grid, linear in time between stored snapshots."""
        self.region.check(self.x[0], t)
        j, w = self._time_weights(np.asarray(t, dtype=np.float64))
        return (1.0 - w) * self._vals[j] + w * self._vals[j + 1]

    @property
    def _vals(self):
        # a single snapshot is treated as constant in time
        return self.values if self.times.size > 1 else np.vstack([self.values, self.values])

    def _time_weights(self, t):
        if self.times.size == 1:
            return np.zeros(np.shape(t), dtype=int), np.zeros(np.shape(t))
        j = np.clip(np.searchsorted(self.times, t) - 1, 0, self.times.size - 2)
        t0, t1 = self.times[j], self.times[j + 1]
        return j, (t - t0) / (t1 - t0)

    def _eval(self, x, t):
        vals = self._vals
        jt, wt = self._time_weights(t)
        jx = np.clip(np.searchsorted(self.x, x) - 1, 0, self.x.size - 2)
        wx = (x - self.x[jx]) / (self.x[jx + 1] - self.x[jx])
        a = (1 - wx) * vals[jt, jx] + wx * vals[jt, jx + 1]
        b = (1 - wx) * vals[jt + 1, jx] + wx * vals[jt + 1, jx + 1]
        return (1 - wt) * a + wt * b

    def _profile(self, x, t):
        if x.shape == self.x.shape and np.array_equal(x, self.x):
            u = self.snapshot(t)
        else:
            u = self._eval(x, np.full_like(x, t))
        return u, np.gradient(u, x, edge_order=2)

"""Error norms, conservation drift and wave-peak tracking."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import UsageError
from .physics import ConservedTriple

SOLITON_MIN_AMPLITUDE = 0.1
BORE_MIN_AMPLITUDE = 0.01


def error_norms(pred, ref) -> tuple[float, float]:
    """Relative L2 and L-infinity errors of ``pred`` against ``ref``."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    ref = np.asarray(ref, dtype=np.float64).ravel()
    if pred.shape != ref.shape:
        raise UsageError(f"pred and ref lengths differ: {pred.size} vs {ref.size}")
    ref_max = np.max(np.abs(ref)) if ref.size else 0.0
    if ref_max == 0.0:
        raise UsageError("reference is identically zero; relative norms are undefined")
    diff = pred - ref
    l2 = float(np.linalg.norm(diff) / np.linalg.norm(ref))
    linf = float(np.max(np.abs(diff)) / ref_max)
    return l2, linf


def conservation_error_pct(now: ConservedTriple, initial: ConservedTriple) -> tuple[float, float, float]:
    """Percentage drift ``|I_k(t) - I_k(0)| / |I_k(0)| * 100`` for each invariant."""
    a, b = now.as_array(), initial.as_array()
    if np.any(b == 0.0):
        raise UsageError(f"initial invariants must be non-zero, got {initial}")
    return tuple(float(v) for v in np.abs(a - b) / np.abs(b) * 100.0)


class Peak(NamedTuple):
    position: float
    amplitude: float


def find_peaks(profile, grid, min_amplitude: float = SOLITON_MIN_AMPLITUDE) -> list[Peak]:
    """Strict interior local maxima above ``min_amplitude``, leading (largest x) first.

    Each maximum is refined to the vertex of the parabola through the three
    samples around it.
    """
    u = np.asarray(profile, dtype=np.float64)
    x = np.asarray(grid, dtype=np.float64)
    if u.shape != x.shape or u.ndim != 1:
        raise UsageError("profile and grid must be 1-D arrays of equal length")
    if min_amplitude < 0:
        raise UsageError("min_amplitude must be non-negative")
    if u.size < 3:
        return []
    h = x[1] - x[0]
    mid = u[1:-1]
    idx = np.nonzero((mid > u[:-2]) & (mid > u[2:]) & (mid > min_amplitude))[0] + 1
    y0, y1, y2 = u[idx - 1], u[idx], u[idx + 1]
    curv = y0 - 2.0 * y1 + y2  # strictly negative at a strict maximum
    offset = 0.5 * (y0 - y2) / curv
    pos = x[idx] + offset * h
    amp = y1 - 0.25 * (y0 - y2) * offset
    order = np.argsort(-pos, kind="stable")
    return [Peak(float(pos[i]), float(amp[i])) for i in order]


def leading_amplitude(profile, grid, min_amplitude: float = BORE_MIN_AMPLITUDE) -> float:
    """Amplitude of the leading wave, or the profile maximum when no strict peak exists.

    The fallback covers the monotone bore profile at t = 0, whose leading
    "wave" is just the plateau level.
    """
    peaks = find_peaks(profile, grid, min_amplitude)
    if peaks:
        return peaks[0].amplitude
    return float(np.max(profile))

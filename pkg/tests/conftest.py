from __future__ import annotations

import numpy as np
import pytest

from rlwpinn import network
from rlwpinn.network import MlpSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_net():
    spec = MlpSpec.hidden(2, 8)
    return spec, network.init_params(spec, seed=3, attach_adaptive=True)


def fd_partials(f, x, t, h=1e-3):
    """Fourth-order central differences of a scalar field f(x, t)."""
    def d1(g, z, h):
        return (-g(z + 2 * h) + 8 * g(z + h) - 8 * g(z - h) + g(z - 2 * h)) / (12 * h)

    def d2(g, z, h):
        return (-g(z + 2 * h) + 16 * g(z + h) - 30 * g(z) + 16 * g(z - h) - g(z - 2 * h)) / (12 * h * h)

    dx = d1(lambda s: f(s, t), x, h)
    dt = d1(lambda s: f(x, s), t, h)
    dxx = d2(lambda s: f(s, t), x, h)
    dxt = d1(lambda s: d1(lambda r: f(r, s), x, h), t, h)
    dxxt = d1(lambda s: d2(lambda r: f(r, s), x, h), t, h)
    return {"dx": dx, "dt": dt, "dxx": dxx, "dxt": dxt, "dxxt": dxxt}


# --- acceptance reporting -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []
N_CRITERIA = 13


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    lines = {int(s.split()[1].rstrip(":")): s for s in ACCEPTANCE_LINES}
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(lines.get(
            n, f"criterion {n}: SKIP  desk-scale training, run with RLWPINN_SLOW=1"))

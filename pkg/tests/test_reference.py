from __future__ import annotations

import numpy as np
import pytest

from rlwpinn import physics
from rlwpinn.exceptions import InstabilityError, RegionError
from rlwpinn.fields import GridField
from rlwpinn.reference import FdConfig, default_fd_config, fd_solve


def test_config_validation():
    sc = physics.single_soliton()
    with pytest.raises(ValueError):
        FdConfig(sc, dx=0.3)  # 100 / 0.3 is not an integer
    with pytest.raises(ValueError):
        FdConfig(sc, dt=0.03)
    with pytest.raises(ValueError):
        FdConfig(sc, dx=-0.1)
    with pytest.raises(ValueError):
        FdConfig(sc, output_times=[0.0, 25.0])


def test_bore_defaults():
    cfg = default_fd_config(physics.undular_bore())
    assert (cfg.dx, cfg.dt) == (0.15, 0.05)
    assert cfg.n_x == 2241


def test_short_soliton_run_is_accurate():
    sc = physics.single_soliton(t_final=2.0)
    field = fd_solve(FdConfig(sc, dx=0.1, dt=0.01, output_times=[0.0, 1.0, 2.0]))
    x = field.x
    for t in (0.0, 1.0, 2.0):
        err = np.max(np.abs(field.snapshot(t) - physics.exact_single_soliton(x, t, sc)))
        assert err < 2e-5


def test_grid_field_region_and_interpolation():
    x = np.linspace(0, 1, 11)
    t = np.array([0.0, 1.0])
    field = GridField(x, t, np.vstack([x, x + 1.0]))
    assert field(0.55, 0.5) == pytest.approx(1.05)
    with pytest.raises(RegionError):
        field(1.5, 0.5)
    with pytest.raises(RegionError):
        field(0.5, 1.5)
    u, ux = field.profile(x, 0.25)
    np.testing.assert_allclose(ux, 1.0)


def test_instability_reported():
    # a huge time step with a steep profile and a tiny dispersion blows up
    sc = physics.undular_bore(slope=0.05, rlw=physics.RlwParams(50.0, 1e-4), t_final=50.0)
    with pytest.raises(InstabilityError) as info:
        fd_solve(FdConfig(sc, dx=0.6, dt=5.0))
    assert info.value.step >= 1

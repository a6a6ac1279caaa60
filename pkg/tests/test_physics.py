from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from rlwpinn import physics
from rlwpinn.autodiff import Jet

XS, TS = sp.symbols("x t")


def sympy_soliton(cfg):
    d, eps, mu = cfg.d, cfg.rlw.epsilon, cfg.rlw.mu
    v = 1 + eps * sp.Rational(str(d))
    k = sp.sqrt(eps * sp.Rational(str(d)) / (mu * v)) / 2
    return 3 * sp.Rational(str(d)) * sp.sech(k * (XS - v * TS - cfg.x0)) ** 2


def soliton_jet(cfg, x0, t0):
    expr = sympy_soliton(cfg)
    at = {XS: x0, TS: t0}
    parts = [expr, sp.diff(expr, XS), sp.diff(expr, TS), sp.diff(expr, XS, TS),
             sp.diff(expr, XS, 2), sp.diff(expr, XS, 2, TS)]
    return Jet(*(float(p.evalf(40, subs=at)) for p in parts))


def test_rlw_params_validation():
    with pytest.raises(ValueError):
        physics.RlwParams(0.0, 1.0)
    with pytest.raises(ValueError):
        physics.RlwParams(1.0, -1.0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        physics.single_soliton(x_min=5.0, x_max=1.0)
    with pytest.raises(ValueError):
        physics.single_soliton(t_final=0.0)
    with pytest.raises(ValueError):
        physics.make_scenario("three-soliton")


def test_scenario_defaults():
    s = physics.single_soliton()
    assert (s.rlw.epsilon, s.rlw.mu, s.d, s.x_min, s.x_max, s.t_final) == (1, 1, 0.1, -40, 60, 20)
    b = physics.undular_bore()
    assert (b.rlw.epsilon, b.rlw.mu, b.u0, b.slope, b.x_min, b.x_max, b.t_final) == \
        (1.5, 1 / 6, 0.1, 5.0, -36, 300, 250)
    assert physics.undular_bore(slope=2.0).slope == 2.0


def test_scenario_roundtrip():
    s = physics.two_soliton(centers=(10.0, 30.0))
    assert physics.ScenarioConfig.from_dict(s.to_dict()) == s


def test_residual_of_zero_and_constant():
    rlw = physics.RlwParams()
    assert physics.rlw_residual(Jet(), rlw) == 0.0
    assert physics.rlw_residual(Jet(v=0.42), rlw) == 0.0


def test_residual_of_exact_soliton_at_reference_point():
    cfg = physics.single_soliton()
    assert abs(physics.rlw_residual(soliton_jet(cfg, 3.7, 5.0), cfg.rlw)) < 1e-10


def test_residual_of_exact_soliton_other_parameters():
    cfg = physics.single_soliton(rlw=physics.RlwParams(1.5, 0.5), d=0.3, x0=2.0)
    rng = np.random.default_rng(3)
    for x0, t0 in zip(rng.uniform(-20, 20, 5), rng.uniform(0, 10, 5)):
        assert abs(physics.rlw_residual(soliton_jet(cfg, x0, t0), cfg.rlw)) < 1e-10


def test_exact_soliton_values():
    cfg = physics.single_soliton()
    v, k = physics.soliton_speed_and_wavenumber(cfg.d, cfg.rlw)
    assert v == pytest.approx(1.1)
    assert k == pytest.approx(0.150756, rel=1e-5)
    assert physics.exact_single_soliton(0.0, 0.0, cfg) == pytest.approx(0.3)
    assert physics.exact_single_soliton(v * 20, 20.0, cfg) == pytest.approx(0.3)
    assert physics.exact_single_soliton(50.0, 0.0, cfg) < 1e-5


@settings(max_examples=30, deadline=None)
@given(st.floats(-40, 60), st.floats(0, 20), st.floats(-5, 5))
def test_travelling_wave_identity(x, t, s):
    cfg = physics.single_soliton()
    v, _ = physics.soliton_speed_and_wavenumber(cfg.d, cfg.rlw)
    a = physics.exact_single_soliton(x, t, cfg)
    b = physics.exact_single_soliton(x + v * s, t + s, cfg)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-15)


def test_initial_conditions():
    two = physics.two_soliton()
    assert physics.initial_condition(15.0, two) == pytest.approx(5.333, abs=1e-3)
    bore = physics.undular_bore()
    assert physics.initial_condition(0.0, bore) == pytest.approx(0.05)
    assert physics.initial_condition(-1e3, bore) == pytest.approx(0.1)
    assert physics.initial_condition(1e3, bore) == pytest.approx(0.0)
    single = physics.single_soliton()
    x = np.linspace(-40, 60, 11)
    np.testing.assert_array_equal(physics.initial_condition(x, single),
                                  physics.exact_single_soliton(x, 0.0, single))


@pytest.mark.parametrize("cfg", [physics.single_soliton(), physics.two_soliton(),
                                 physics.undular_bore(), physics.undular_bore(slope=2.0)])
def test_initial_condition_derivative(cfg):
    x = np.linspace(cfg.x_min + 1, cfg.x_max - 1, 301)
    h = 1e-5
    fd = (physics.initial_condition(x + h, cfg) - physics.initial_condition(x - h, cfg)) / (2 * h)
    np.testing.assert_allclose(physics.initial_condition_dx(x, cfg), fd, atol=1e-8)


def test_boundary_values():
    single = physics.single_soliton()
    assert abs(physics.boundary_value(-40.0, 0.0, single)) < 1e-4
    bore = physics.undular_bore()
    assert physics.boundary_value(bore.x_min, 123.0, bore) == 0.1
    assert physics.boundary_value(bore.x_max, 123.0, bore) == 0.0
    two = physics.two_soliton()
    assert abs(physics.boundary_value(120.0, 0.0, two)) < 1e-6
    assert abs(physics.initial_condition(120.0, two)) < 1e-6


def test_trapezoid_exactness():
    assert physics.trapezoid(np.full(7, 2.5), 0.5) == pytest.approx(2.5 * 3.0)
    for n in (2, 5, 33):
        x = np.linspace(0, 1, n)
        assert physics.trapezoid(x, 1 / (n - 1)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        physics.trapezoid(np.array([1.0]), 0.1)


def test_invariants_zero_and_mismatch():
    assert physics.invariants(np.zeros(5), np.zeros(5), 0.1, physics.RlwParams()).as_array().tolist() \
        == [0, 0, 0]
    with pytest.raises(ValueError):
        physics.invariants(np.zeros(5), np.zeros(4), 0.1, physics.RlwParams())


def soliton_invariants_on_grid(cfg, t, n=4001):
    x, h = physics.uniform_grid(cfg, n)
    v, k = physics.soliton_speed_and_wavenumber(cfg.d, cfg.rlw)
    z = k * (x - v * t - cfg.x0)
    u = physics.exact_single_soliton(x, t, cfg)
    ux = -2.0 * k * u * np.tanh(z)
    return physics.invariants(u, ux, h, cfg.rlw)


# The closed forms are whole-line integrals.  On [-40, 60] the sech^2 tails
# beyond the ends carry about 6e-6 of the mass, so the tight checks use a
# domain wide enough for the tails to vanish in double precision.
WIDE = dict(x_min=-150.0, x_max=150.0)


def test_soliton_invariants_closed_form():
    cfg = physics.single_soliton(**WIDE)
    got = soliton_invariants_on_grid(cfg, 0.0).as_array()
    want = physics.soliton_invariants(cfg.d, cfg.rlw).as_array()
    np.testing.assert_allclose(got, want, rtol=1e-6)
    np.testing.assert_allclose(got, [3.980, 0.810, 2.579], atol=1e-3)


def test_soliton_invariants_on_benchmark_domain():
    cfg = physics.single_soliton()
    got = soliton_invariants_on_grid(cfg, 0.0).as_array()
    want = physics.soliton_invariants(cfg.d, cfg.rlw).as_array()
    np.testing.assert_allclose(got, want, rtol=1e-5)
    np.testing.assert_allclose(got, [3.980, 0.810, 2.579], atol=1e-3)


def test_soliton_invariants_time_independent():
    cfg = physics.single_soliton(**WIDE)
    i0 = soliton_invariants_on_grid(cfg, 0.0).as_array()
    for t in (5.0, 10.0, 15.0, 20.0):
        it = soliton_invariants_on_grid(cfg, t).as_array()
        assert np.max(np.abs(it - i0) / np.abs(i0)) < 1e-8


def test_two_soliton_initial_invariants():
    cfg = physics.two_soliton()
    x, h = physics.uniform_grid(cfg, 4001)
    inv = physics.invariants(physics.initial_condition(x, cfg),
                             physics.initial_condition_dx(x, cfg), h, cfg.rlw).as_array()
    np.testing.assert_allclose(inv, [37.92, 120.52, 744.08], rtol=5e-3)

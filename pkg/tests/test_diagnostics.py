import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfsim.diagnostics import (OriginLimit, growth_bound_report, intersection_count,
                                 monotonicity_report, origin_limit_classify, sign_changes)
from selfsim.exponents import derived_constants
from selfsim.integrator import IntegrationOptions, integrate, series_start
from selfsim.ode_core import (EquationKind, Frame, Trajectory, TrajectoryMeta,
                              analytic_trajectory, scale_steady, transform_trajectory)

FWD, STEADY = EquationKind.FORWARD, EquationKind.STEADY
P3_5 = derived_constants(3, 5)


def forward(n, p, a, r_end=10.0, eps=1e-4):
    prm = derived_constants(n, p)
    return integrate(FWD, Frame.PHYSICAL_W, prm, series_start(FWD, prm, a, eps=eps),
                     IntegrationOptions(r_end=r_end))


def test_sine_crossings():
    x = np.arange(0, 10.0001, 0.01)
    rep = sign_changes(np.sin(x), x)
    assert rep.count == 3
    assert np.allclose(rep.locations, [np.pi, 2 * np.pi, 3 * np.pi], atol=0.01)


def test_constant_has_no_crossings():
    rep = sign_changes(np.full(10, 2.0))
    assert rep.count == 0 and not rep.degenerate


def test_zero_is_degenerate():
    prm = derived_constants(11, 7)
    rep = sign_changes(np.full(50, prm.L) - prm.L)
    assert rep.count == 0 and rep.degenerate
    # r^alpha U_* carries rounding noise; the dead band is relative to L then
    t = analytic_trajectory(prm, np.geomspace(0.1, 10, 50), frame=Frame.SCALED_V)
    rep = sign_changes(t.value - prm.L, scale=prm.L)
    assert rep.count == 0 and rep.degenerate


def test_touch_is_not_a_crossing():
    x = np.linspace(-1, 1, 201)
    assert sign_changes(x ** 2, x).count == 0
    assert sign_changes(x ** 3, x).count == 1


@settings(max_examples=50)
@given(st.lists(st.floats(min_value=-10, max_value=10).filter(lambda v: abs(v) > 1e-3),
                min_size=2, max_size=40))
def test_reflection_doubles_count(vals):
    y = np.array(vals)
    doubled = np.concatenate([y, y[::-1]])
    assert sign_changes(doubled).count == 2 * sign_changes(y).count


def _steady(n, p):
    prm = derived_constants(n, p)
    start = series_start(STEADY, prm, 1.0)
    opts = IntegrationOptions(r_end=np.exp(9.5), rel_tol=1e-11, abs_tol=1e-13)
    return transform_trajectory(integrate(STEADY, Frame.PHYSICAL_W, prm, start, opts),
                                Frame.SCALED_V)


def test_intersections_below_and_above_JL():
    lo = _steady(11, 3)
    hi = _steady(15, 3)
    assert intersection_count(lo, scale_steady(lo, 2.0), (-8, 8)).count >= 1
    assert intersection_count(hi, scale_steady(hi, 2.0), (-8, 8)).count == 0


def test_intersection_symmetric_and_self():
    t = _steady(11, 3)
    u = scale_steady(t, 3.0)
    assert intersection_count(t, u, (-6, 6)).count == intersection_count(u, t, (-6, 6)).count
    own = intersection_count(t, t, (-6, 6))
    assert own.count == 0 and own.degenerate


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_monotonicity_of_profiles(a):
    assert monotonicity_report(forward(3, 5, a)).passed


def test_monotonicity_detects_increase():
    r = np.linspace(0.1, 1, 20)
    t = Trajectory(r, r, np.ones_like(r), TrajectoryMeta(FWD, Frame.PHYSICAL_W, P3_5))
    assert not monotonicity_report(t).passed


def test_growth_bound_of_u_star():
    for prm in (P3_5, derived_constants(11, 7)):
        t = analytic_trajectory(prm, np.geomspace(1e-4, 1, 400), FWD)
        rep = growth_bound_report(t)
        a, L = prm.alpha, prm.L
        expected = (L, a * L, a * (a + 1) * L)
        assert rep.sup == pytest.approx(expected, rel=1e-8)


def test_growth_bound_example_values():
    rep = growth_bound_report(analytic_trajectory(P3_5, np.geomspace(1e-4, 1, 400), FWD))
    assert np.round(rep.sup, 4).tolist() == [0.7071, 0.3536, 0.5303]


def test_growth_bound_of_bounded_profile():
    t = forward(3, 5, 1.0, r_end=2.0)
    rep = growth_bound_report(t)
    assert rep.sup[0] <= 1.0
    assert np.isfinite(rep.slope_over_r)


def test_origin_limits():
    prm = derived_constants(11, 7)
    r = np.geomspace(1e-7, 1, 400)
    us = origin_limit_classify(analytic_trajectory(prm, r, FWD, Frame.SCALED_V))
    assert us.tag is OriginLimit.TENDS_TO_L and us.max_rv < 1e-12
    bounded = origin_limit_classify(forward(11, 7, 1.0, r_end=1.0, eps=1e-7))
    assert bounded.tag is OriginLimit.TENDS_TO_ZERO and bounded.max_rv < 0.01 * prm.L


def test_origin_limit_needs_depth():
    shallow = forward(11, 7, 1.0, r_end=1.0, eps=1e-3)
    rep = origin_limit_classify(shallow)
    assert rep.tag is OriginLimit.UNDETERMINED and "depth" in rep.reason

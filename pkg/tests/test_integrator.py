import numpy as np
import pytest

from selfsim.exponents import derived_constants, indicial_roots
from selfsim.integrator import (ComplexRootError, IntegrationOptions, energy_ledger, integrate,
                                pohozaev_check, series_coefficients, series_start,
                                singular_start, spiral_start)
from selfsim.ode_core import (EquationKind, Frame, ProfileState, Trajectory, TrajectoryMeta,
                              b_fn, transform_state, transform_trajectory)

FWD, BWD, STEADY = EquationKind.FORWARD, EquationKind.BACKWARD, EquationKind.STEADY


def forward_profile(n, p, a, r_end=20.0, eps=1e-4, **kw):
    prm = derived_constants(n, p)
    opts = IntegrationOptions(r_end=r_end, **kw)
    return integrate(FWD, Frame.PHYSICAL_W, prm, series_start(FWD, prm, a, eps=eps), opts)


def test_options_validation():
    with pytest.raises(ValueError):
        IntegrationOptions(rel_tol=0.5)
    with pytest.raises(ValueError):
        IntegrationOptions(abs_tol=1e-16)
    h = IntegrationOptions().halved()
    assert h.rel_tol == 5e-11 and h.abs_tol == 5e-13


def test_kappa_stays_constant():
    prm = derived_constants(11, 2)
    start = ProfileState(1e-3, prm.kappa, 0.0, Frame.PHYSICAL_W, BWD, prm)
    t = integrate(BWD, Frame.PHYSICAL_W, prm, start, IntegrationOptions(r_end=20))
    assert t.meta.termination == "span_end"
    assert np.max(np.abs(t.value - prm.kappa)) < 1e-8


def test_singular_equilibrium_stays():
    prm = derived_constants(11, 7)
    start = ProfileState(1e-3, prm.L, 0.0, Frame.SCALED_V, STEADY, prm)
    t = integrate(STEADY, Frame.SCALED_V, prm, start, IntegrationOptions(r_end=100))
    assert np.max(np.abs(t.value - prm.L)) < 1e-8


def test_forward_profile_is_nonincreasing():
    t = forward_profile(3, 5, 1.0)
    assert np.max(t.slope) <= 1e-12 * t.value[0]


def test_series_coefficients():
    assert series_coefficients(FWD, derived_constants(3, 5), 1.0)[0] == pytest.approx(-5 / 24)
    assert series_coefficients(STEADY, derived_constants(3, 3), 1.0)[0] == pytest.approx(-1 / 6)
    prm = derived_constants(11, 2)
    assert series_coefficients(BWD, prm, prm.kappa) == (0.0, 0.0)


def test_series_start_matches_integration():
    # integrate from eps/2 to eps and compare with the series at eps
    prm = derived_constants(3, 5)
    s_full = series_start(FWD, prm, 1.0, eps=1e-2, rel_tol=1e-10)
    s_half = series_start(FWD, prm, 1.0, eps=s_full.coord / 2, rel_tol=1e-10)
    assert s_half.coord == s_full.coord / 2
    t = integrate(FWD, Frame.PHYSICAL_W, prm, s_half,
                  IntegrationOptions(r_end=s_full.coord, rel_tol=1e-12, abs_tol=1e-13))
    assert t.value[-1] == pytest.approx(s_full.value, rel=1e-12)
    assert t.slope[-1] == pytest.approx(s_full.slope, rel=1e-9)


def test_singular_start_modes():
    prm = derived_constants(11, 7)
    s0 = singular_start(prm, 0.0)
    assert (s0.value, s0.slope) == (prm.L, 0.0)
    s = singular_start(prm, 1e-3, root_index=1, eps=1e-2)
    assert s.slope == pytest.approx(-0.4, rel=1e-12)
    assert s.value - prm.L == pytest.approx(1e-3, rel=1e-9)


def test_spiral_start_for_complex_roots():
    prm = derived_constants(11, 3)
    with pytest.raises(ComplexRootError):
        singular_start(prm, 1e-3)
    s = spiral_start(prm, 1e-3, eps=1e-2)
    assert abs(s.value - prm.L) == pytest.approx(1e-3, rel=1e-12)
    # other phases keep the envelope A on the mode A (r/eps)^lam cos(omega log(r/eps) + phase)
    mu = indicial_roots(11, 3)[0]
    for phase in (1.0, 2.5):
        s = spiral_start(prm, 1e-3, phase, eps=1e-2)
        u = s.value - prm.L
        sin_part = (mu.real * u - 1e-2 * s.slope) / abs(mu.imag)
        assert np.hypot(u, sin_part) == pytest.approx(1e-3, rel=1e-10)


@pytest.mark.parametrize("delta", [1e-3, -1e-3, 1e-4])
def test_inward_outward_consistency(delta):
    # the mode decays like r^-4 outward; over one decade it stays far above
    # rounding of v ~ L, so the return trip is well conditioned
    prm = derived_constants(11, 7)
    start = singular_start(prm, delta, eps=1e-2, kind=STEADY)
    opts = IntegrationOptions(r_end=0.1, rel_tol=1e-12, abs_tol=1e-13, value_floor=None)
    out = integrate(STEADY, Frame.SCALED_V, prm, start, opts)
    back = integrate(STEADY, Frame.SCALED_V, prm, out.state(len(out) - 1),
                     IntegrationOptions(r_end=1e-2, rel_tol=1e-12, abs_tol=1e-13, value_floor=None))
    assert back.meta.termination == "span_end"
    assert back.value[-1] == pytest.approx(start.value, rel=1e-6)
    assert back.slope[-1] == pytest.approx(start.slope, rel=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_tolerance_halving(a):
    base = IntegrationOptions(r_end=20.0)
    t1 = forward_profile(3, 5, a, r_end=20.0)
    t2 = forward_profile(3, 5, a, r_end=20.0, rel_tol=base.rel_tol / 2, abs_tol=base.abs_tol / 2)
    assert abs(t1.value[-1] - t2.value[-1]) < 10 * base.rel_tol * max(1.0, abs(t1.value[-1]))


def test_event_localization():
    prm = derived_constants(3, 2)
    opts = IntegrationOptions(r_end=50)
    t = integrate(FWD, Frame.PHYSICAL_W, prm, series_start(FWD, prm, 10.0), opts)
    assert t.meta.termination == "value_floor"
    r0 = t.meta.event_coord
    w0, _ = t.evaluate(np.array([r0]))
    assert abs(w0[0]) < opts.abs_tol
    assert t.radius[-1] == pytest.approx(r0, rel=1e-14)


def test_ceiling_event():
    prm = derived_constants(3, 2)
    opts = IntegrationOptions(r_end=50, value_ceiling=0.5)
    t = integrate(FWD, Frame.PHYSICAL_W, prm, series_start(FWD, prm, 0.3), opts)
    assert t.meta.termination == "span_end"
    start = ProfileState(1.0, 0.4, 1.0, Frame.PHYSICAL_W, FWD, prm)
    t = integrate(FWD, Frame.PHYSICAL_W, prm, start, opts)
    assert t.meta.termination == "value_ceiling"


def test_step_budget():
    t = forward_profile(3, 5, 1.0, max_steps=3)
    assert t.meta.termination == "max_steps"


# --- energy ledger ---------------------------------------------------------

def test_ledger_on_equilibrium():
    prm = derived_constants(3, 5)
    r = np.geomspace(1e-2, 10, 50)
    meta = TrajectoryMeta(FWD, Frame.NORMALIZED_H, prm)
    led = energy_ledger(Trajectory(r, np.ones_like(r), np.zeros_like(r), meta))
    assert np.all(led.c == b_fn(prm, 1.0))
    assert np.all(led.I == 0) and led.residual == 0


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_forward_ledger(a):
    t = transform_trajectory(forward_profile(3, 5, a), Frame.NORMALIZED_H)
    led = energy_ledger(t)
    assert led.relative_residual < 1e-6
    assert led.monotonicity_violation("c") == 0.0


def test_forward_ledger_above_sobolev():
    # beta > 0: c alone is still nonincreasing for the forward kind
    t = transform_trajectory(forward_profile(11, 5, 1.0, r_end=10), Frame.NORMALIZED_H)
    led = energy_ledger(t)
    assert led.beta > 0
    assert led.relative_residual < 1e-6
    assert led.monotonicity_violation("c") == 0.0


def test_backward_ledger_at_sobolev():
    prm = derived_constants(3, 5)
    start = series_start(BWD, prm, 0.9)
    t = integrate(BWD, Frame.PHYSICAL_W, prm, start, IntegrationOptions(r_end=3.0))
    led = energy_ledger(transform_trajectory(t, Frame.NORMALIZED_H))
    assert led.beta == 0
    assert led.relative_residual < 1e-6
    assert led.monotonicity_violation("c") == 0.0


def test_ledger_needs_normalized_frame():
    with pytest.raises(ValueError):
        energy_ledger(forward_profile(3, 5, 1.0, r_end=2))


# --- Pohozaev --------------------------------------------------------------

def test_pohozaev_on_equilibrium():
    prm = derived_constants(11, 5)
    r = np.geomspace(1e-3, 2, 50)
    meta = TrajectoryMeta(FWD, Frame.SCALED_V, prm)
    res = pohozaev_check(Trajectory(r, np.full_like(r, prm.L), np.zeros_like(r), meta), 1e-3, 1)
    assert res.residual == 0.0


def test_pohozaev_forward():
    t = transform_trajectory(forward_profile(11, 5, 1.0, r_end=2.0), Frame.SCALED_V)
    res = pohozaev_check(t, 1e-3, 1.0)
    assert res.relative_residual < 1e-6
    Js = [pohozaev_check(t, 1e-3, R).int_v_prime_sq_r for R in (0.25, 0.5, 1.0, 2.0)]
    assert all(x <= y for x, y in zip(Js, Js[1:]))
    deeper = [pohozaev_check(t, rho, 1.0).int_v_prime_sq_r for rho in (1e-3, 5e-4, 2.5e-4)]
    assert deeper[-1] - deeper[0] <= 1e-2 * deeper[-1]


def test_transform_keeps_start_state():
    prm = derived_constants(3, 5)
    s = series_start(FWD, prm, 1.0)
    v = transform_state(s, Frame.SCALED_V)
    assert v.value == pytest.approx(s.coord ** 0.5 * s.value)

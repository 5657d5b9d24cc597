import math

import pytest
from hypothesis import given, settings, strategies as st

from selfsim.exponents import (UNBOUNDED, LUndefinedError, RegimeTag, classify_regime,
                               comparison_roots, derived_constants, exponent_table,
                               indicial_constant, indicial_discriminant, indicial_roots)

P_GRID = [round(1.1 + 0.1 * k, 10) for k in range(90)]  # 1.1 .. 10.0
dims = st.integers(min_value=3, max_value=15)
powers = st.sampled_from(P_GRID)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# --- examples -------------------------------------------------------------

def test_table_n3():
    t = exponent_table(3)
    assert t.p_F == pytest.approx(5 / 3, rel=1e-15)
    assert t.p_sg == 3.0 and t.p_S == 5.0
    assert t.p_JL == UNBOUNDED and t.p_L == UNBOUNDED


def test_table_n3_dual_exponent():
    # closed form evaluated independently
    assert exponent_table(3).p_JL_star == pytest.approx(1 + 4 / (-1 + 2 * math.sqrt(2)), rel=1e-14)


def test_table_n11():
    t = exponent_table(11)
    assert t.p_S == pytest.approx(13 / 9, rel=1e-15)
    assert t.p_JL == pytest.approx(1 + 4 / (7 - 2 * math.sqrt(10)), rel=1e-14)
    assert t.p_L == 7.0
    assert t.p_JL < t.p_L


def test_unbounded_compares_totally():
    t = exponent_table(5)
    assert t.p_JL > 1e300 and not t.p_JL < 1e300
    assert math.isinf(t.p_JL)


@pytest.mark.parametrize("n", [0, -1, -0.5])
def test_table_rejects_nonpositive_n(n):
    with pytest.raises(ValueError):
        exponent_table(n)


def test_table_real_n():
    t = exponent_table(3.5)
    assert t.p_sg == pytest.approx(3.5 / 1.5)


def test_constants_n3_p5():
    c = derived_constants(3, 5)
    assert c.alpha == 0.5 and c.beta == 0.0 and c.gamma == 0.25
    assert c.L == pytest.approx(0.25 ** 0.25, rel=1e-15)


def test_constants_n11_p7():
    c = derived_constants(11, 7)
    assert c.alpha == pytest.approx(1 / 3)
    assert c.beta == pytest.approx(25 / 3)
    assert c.gamma * 6 == pytest.approx(52 / 3)
    assert c.L == pytest.approx((26 / 9) ** (1 / 6), rel=1e-14)


def test_kappa_p3_is_dimension_free():
    for n in (1, 3, 11):
        assert derived_constants(n, 3).kappa == pytest.approx(2 ** -0.5, rel=1e-15)


def test_L_undefined_below_sg():
    c = derived_constants(3, 2)
    assert not c.has_L
    with pytest.raises(LUndefinedError):
        c.L


@pytest.mark.parametrize("n,p,tag", [
    (11, 13 / 9, RegimeTag.SOBOLEV_CRITICAL),
    (11, 5, RegimeTag.SOBOLEV_TO_JL),
    (11, 8, RegimeTag.ABOVE_LEPIN),
    (3, 1.5, RegimeTag.SUB_FUJITA),
])
def test_regimes(n, p, tag):
    assert classify_regime(n, p).tag is tag


def test_indicial_roots_n11_p7():
    r1, r2 = indicial_roots(11, 7)
    assert abs(r1 + 4) < 1e-10 and abs(r2 + 13 / 3) < 1e-10


def test_indicial_roots_complex_n11_p3():
    r1, r2 = indicial_roots(11, 3)
    assert isinstance(r1, complex)
    assert r1.real == pytest.approx(-3.5) and r1 == r2.conjugate()
    assert indicial_discriminant(11, 3) == pytest.approx(49 - 64)


def test_discriminant_zero_is_pJL():
    from scipy.optimize import brentq
    p = brentq(lambda q: indicial_discriminant(11, q), 5, 7.5, xtol=1e-14)
    assert abs(p - exponent_table(11).p_JL) < 1e-6


def test_comparison_roots_limits():
    n, p = 7, 3
    a1p, a1m, a2p, a2m = comparison_roots(n, p, 0.0)
    alpha = derived_constants(n, p).alpha
    assert a1p == a1m == pytest.approx(alpha)
    assert a2p == a2m == pytest.approx(alpha + 2 - n)


def test_comparison_roots_example():
    a1p = comparison_roots(3, 5, 0.01)[0]
    assert a1p == pytest.approx(0.5 - 0.5 * (1 - math.sqrt(0.96)), rel=1e-14)
    assert round(a1p, 6) == 0.489898


def test_comparison_roots_eps_range():
    with pytest.raises(ValueError):
        comparison_roots(3, 5, 0.25)
    with pytest.raises(ValueError):
        comparison_roots(3, 5, -1e-3)


# --- properties -----------------------------------------------------------

@given(dims, powers)
def test_beta_identity(n, p):
    c = derived_constants(n, p)
    assert abs(c.beta - (n - 2 - 2 * c.alpha)) <= 1e-12 * max(n - 2, 2 * c.alpha)


@given(dims, powers)
def test_gamma_is_L_power(n, p):
    c = derived_constants(n, p)
    if c.has_L:
        assert rel(c.gamma, c.L ** (p - 1)) <= 1e-12


@given(dims, powers)
def test_indicial_constant_term(n, p):
    c = derived_constants(n, p)
    if c.has_L:
        assert abs(indicial_constant(n, p) - (p - 1) * c.gamma) <= 1e-12 * 2 * (n - 2)


@settings(max_examples=28)
@given(st.integers(min_value=3, max_value=30))
def test_ordering(n):
    t = exponent_table(n)
    assert t.p_F < t.p_sg < t.p_S < t.p_JL
    assert t.p_sg < t.p_JL_star < t.p_S
    if n > 10:
        assert t.p_JL < t.p_L


def _grid_above_sg(n):
    t = exponent_table(n)
    return t, [p for p in P_GRID if p > t.p_sg * (1 + 1e-9)]


def test_indicial_roots_structure_as_stated():
    # literal statement: real negative iff p >= p_JL, complex with
    # real part -beta/2 < 0 iff p_sg < p < p_JL
    bad = []
    for n in (11, 12, 13, 15):
        t, grid = _grid_above_sg(n)
        for p in grid:
            roots = indicial_roots(n, p)
            if p >= t.p_JL:
                ok = all(not isinstance(r, complex) and r < 0 for r in roots)
            else:
                ok = isinstance(roots[0], complex) and roots[0].real < 0
            if not ok:
                bad.append((n, p, roots))
    assert not bad, f"{len(bad)} grid points violate the statement, first: {bad[0]}"


@pytest.mark.parametrize("n", [11, 12, 13, 15])
def test_indicial_roots_structure_by_beta_sign(n):
    # beta > 0 iff p > p_S: roots sit in the left half-plane only above p_S
    t, grid = _grid_above_sg(n)
    for p in grid:
        beta = derived_constants(n, p).beta
        roots = indicial_roots(n, p)
        assert sum(complex(r) for r in roots).real == pytest.approx(-beta, abs=1e-9)
        if p >= t.p_JL:
            assert all(not isinstance(r, complex) and r < 0 for r in roots)
        elif p > t.p_S:
            assert isinstance(roots[0], complex) and roots[0].real < 0
            assert roots[0].real == pytest.approx(-beta / 2)
        else:
            assert all(complex(r).real >= -1e-12 for r in roots)

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qhode import (NoPositiveRoot, NotExpandedFarEnough, domination_margin, expand, majorant,
                   majorant_coeffs, majorant_constants, radius_lower_bound, solve_balances)
from qhode.majorant import closed_form_phi, taylor_bound

from conftest import BUNDLED, bundled, expanded

pos = st.floats(0.1, 5.0)


def smallest_root(A, B, C, n):
    r = np.roots([(n * A * B) ** 2, -2 * n * A * B * (1 + 2 * n * B * C), 1])
    return min(x.real for x in r if x.real > 0)


def test_radius_example():
    assert radius_lower_bound(1, 2, 3, 1) == pytest.approx(0.019259301592, rel=1e-10)
    assert majorant_coeffs(1, 2, 3, 1, 4) == pytest.approx([0, 1, 12, 312, 10128])


@settings(max_examples=50, deadline=None)
@given(pos, pos, pos, st.integers(1, 6))
def test_radius_is_smallest_root(A, B, C, n):
    assert radius_lower_bound(A, B, C, n) == pytest.approx(smallest_root(A, B, C, n), rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(pos, pos, pos, st.integers(1, 6))
def test_beta2(A, B, C, n):
    beta = majorant_coeffs(A, B, C, n, 2)
    assert beta[1] == A
    assert beta[2] == pytest.approx(C * n ** 2 * B ** 2 * A ** 2, rel=1e-12)


@pytest.mark.parametrize("A, B, C, n", [(1, 2, 3, 1), (1.5, 0.7, 2.2, 3), (2, 1, 5, 6)])
def test_beta_matches_closed_form_taylor(A, B, C, n):
    z = sympy.symbols("z")
    A_, B_, C_ = (sympy.nsimplify(x) for x in (A, B, C))
    disc = 1 - 2 * n * A_ * B_ * (1 + 2 * n * B_ * C_) * z + (n * A_ * B_ * z) ** 2
    phi = (1 + n * A_ * B_ * z - sympy.sqrt(disc)) / (2 * n * B_ * (1 + n * B_ * C_))
    ser = sympy.series(phi, z, 0, 16).removeO()
    beta = majorant_coeffs(A, B, C, n, 15)
    for k in range(1, 16):
        ref = float(ser.coeff(z, k))
        assert beta[k] == pytest.approx(ref, rel=1e-10)
    zz = 0.3 * radius_lower_bound(A, B, C, n)
    assert closed_form_phi(A, B, C, n, zz).real == pytest.approx(
        sum(b * zz ** k for k, b in enumerate(majorant_coeffs(A, B, C, n, 60))), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(pos, pos, pos, st.integers(1, 4), st.floats(1.01, 2.0))
def test_monotone_in_constants(A, B, C, n, f):
    base = np.array(majorant_coeffs(A, B, C, n, 12))
    for bigger in ((A * f, B, C), (A, B * f, C), (A, B, C * f)):
        assert np.all(np.array(majorant_coeffs(*bigger, n, 12)) >= base * (1 - 1e-12))
        assert radius_lower_bound(*bigger, n) < radius_lower_bound(A, B, C, n)


@settings(max_examples=20, deadline=None)
@given(pos, pos, pos, st.integers(1, 4))
def test_series_converges_inside_radius(A, B, C, n):
    r = radius_lower_bound(A, B, C, n)
    beta = np.array(majorant_coeffs(A, B, C, n, 40))
    terms = beta[1:] * (r / 2) ** np.arange(1, 41)
    # geometric decay at half the radius: ratio tends to 1/2 (up to a k^-3/2 factor)
    assert terms[-1] / terms[-2] == pytest.approx(0.5, abs=0.05)


def test_bad_constants():
    with pytest.raises(NoPositiveRoot):
        radius_lower_bound(0, 1, 1, 1)


def test_taylor_bound_riccati():
    """f(w) = w^2 at c0 = -1: f(c0 + x) = 1 - 2x + x^2, so B = max(2, 1) = 2."""
    assert taylor_bound(bundled("riccati"), np.array([-1.0])) == 2.0


def test_constants_need_resonances():
    spec = bundled("weierstrass")
    (b,) = solve_balances(spec, (2, 3))
    with pytest.warns(UserWarning):
        sol = expand(spec, (2, 3), b, 4)
    with pytest.raises(NotExpandedFarEnough):
        majorant_constants(sol)


@pytest.mark.parametrize("name", BUNDLED)
def test_domination(name):
    rng = np.random.default_rng(8)
    for sol in expanded(name).solutions:
        for _ in range(3):
            v = sol.random_parameters(rng)
            mb = majorant(sol, v)
            assert mb.radius > 0
            assert mb.C >= mb.A
            assert domination_margin(sol, mb, v) <= 1.0

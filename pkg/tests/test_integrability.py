import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhode import (NotConstant, PhasePoly, divisor_constraints, expand, integral_constancy,
                   majorant, solve_balances)
from qhode.errors import FamilyAmbiguous, PoleTooDeep
from qhode.integrability import (compare_embedding, embedding_point, euler_a2_coefficients,
                                 euler_balance_cases, euler_reference_parameters, family_sign,
                                 kowalewski_embedding_functions, scale_parameters, unit_normalize,
                                 verify_kowalewski_divisor)

from conftest import BUNDLED, bundled, expanded


def kowalewski_families():
    return [s for s in expanded("kowalewski", order=16).solutions if s.balance.continuum]


def test_nonconstant_function_is_rejected():
    sol = expanded("euler").solutions[0]
    with pytest.raises(NotConstant) as exc:
        integral_constancy(sol, PhasePoly.variable(3, 0), "m1")
    assert exc.value.order == -1
    assert exc.value.exit_code == 2


@pytest.mark.parametrize("name", BUNDLED)
def test_integrals_have_no_poles(name):
    for sol in expanded(name).solutions:
        for nm, H in sol.spec.integrals.items():
            res = integral_constancy(sol, H, nm)
            assert res.negative_max < 1e-8


def test_z0_coefficient_stable_in_order():
    spec = bundled("euler")
    b = solve_balances(spec, (1, 1, 1))[0]
    lo = divisor_constraints(expand(spec, (1, 1, 1), b, 4))
    hi = divisor_constraints(expand(spec, (1, 1, 1), b, 20))
    for p, q in zip(lo.polys, hi.polys):
        assert p.equals(q, 1e-12)


def test_integral_value_along_series():
    """H(w(z)) evaluated from the truncated series equals its z^0 coefficient."""
    rng = np.random.default_rng(3)
    for sol in expanded("euler").solutions:
        dc = divisor_constraints(sol)
        v = sol.random_parameters(rng)
        z = majorant(sol, v).radius / 4 * np.exp(0.7j)
        w = sol.evaluate(z, v)
        for nm, p in zip(dc.names, dc.polys):
            assert abs(sol.spec.integrals[nm](w) - p(v)) < 1e-7


def test_euler_a2_relation():
    lams = (1, 2, 3)
    sols = expanded("euler").solutions
    for case, (p, q) in zip(euler_balance_cases(lams), euler_a2_coefficients(lams)):
        (sol,) = [s for s in sols if np.allclose(s.c0, case, atol=1e-9)]
        assert np.max(np.abs(sol.numeric_coeffs(sol.random_parameters(
            np.random.default_rng(0)))[1])) < 1e-10
        a2 = sol.coeffs[2][0].with_names(("m2_2", "m3_2"))
        assert a2.coeff((1, 0)) == pytest.approx(p, abs=1e-9)
        assert a2.coeff((0, 1)) == pytest.approx(q, abs=1e-9)
        assert abs(a2.constant()) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_euler_divisor_inversion(seed):
    (sol,) = [s for s in expanded("euler").solutions
              if np.allclose(s.c0, euler_balance_cases((1, 2, 3))[0], atol=1e-9)]
    dc = divisor_constraints(sol)
    assert dc.is_affine()
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    p = dc.solve(h)
    assert np.allclose(dc.evaluate(p), h, atol=1e-12)
    b2, c2 = euler_reference_parameters((1, 2, 3), 2 * h[1], 2 * h[0])
    assert abs(p["m2_2"] - b2) < 1e-8 and abs(p["m3_2"] - c2) < 1e-8


def test_family_sign():
    assert sorted(family_sign(s).imag for s in kowalewski_families()) == [-1, 1]
    with pytest.raises(FamilyAmbiguous):
        family_sign(expanded("euler").solutions[0])


def test_unit_normalisation():
    rng = np.random.default_rng(5)
    for sol in kowalewski_families():
        dc = divisor_constraints(sol)
        v = unit_normalize(sol, sol.random_parameters(rng), dc)
        i = dc.names.index("H3")
        assert dc.polys[i](v) == pytest.approx(1, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.3, 2), st.floats(-3, 3))
def test_integral_weights(seed, r, theta):
    """z^0 of a weight-d integral scales by a^d under the parameter rescaling."""
    a = r * np.exp(1j * theta)
    sol = kowalewski_families()[0]
    dc = divisor_constraints(sol)
    v = sol.random_parameters(np.random.default_rng(seed))
    va = scale_parameters(sol, v, a)
    for nm, d in (("H1", 2), ("H2", 3), ("H3", 4), ("H4", 4)):
        i = dc.names.index(nm)
        assert dc.polys[i](va) == pytest.approx(a ** d * dc.polys[i](v), rel=1e-9)


def test_divisor_identity_both_forms():
    rng = np.random.default_rng(6)
    for sol in kowalewski_families():
        dc = divisor_constraints(sol)
        eps = family_sign(sol)
        for _ in range(5):
            v = sol.random_parameters(rng)
            assert verify_kowalewski_divisor(sol, v, dc).ok
            assert verify_kowalewski_divisor(sol, v, dc, normalize=False).ok
            # the other family's sign does not satisfy the relation
            assert not verify_kowalewski_divisor(sol, v, dc, eps=-eps).ok
            assert not verify_kowalewski_divisor(sol, v, dc, c4_shift=1e-3).ok


def test_embedding_point():
    rng = np.random.default_rng(7)
    for sol in kowalewski_families():
        res = compare_embedding(sol, sol.random_parameters(rng))
        assert res["derived_error"] < 1e-10
        assert res["printed"]["matched"] == [True, True, False, True, True, False, False, False]
        assert not res["printed_ok"]


def test_embedding_rejects_double_pole():
    sol = kowalewski_families()[0]
    m1 = PhasePoly.variable(6, 0)
    with pytest.raises(PoleTooDeep):
        embedding_point(sol, kowalewski_embedding_functions() + [m1 * m1])

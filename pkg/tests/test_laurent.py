import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qhode import (CompatibilityObstruction, ParamPoly, compose_series, detect_weights, expand,
                   parse_system,
                   recursion_rhs, recursion_step, series_residual, solve_balances)
from qhode.integrability import scale_parameters
from qhode.laurent import plan_resonance

from conftest import BUNDLED, bundled, expanded
from dk_oracle import brute_force_dk, literal_dk

OBSTRUCTED = "vars: x, y, z\neq: x' = 0\neq: y' = -y*z\neq: z' = x*y + x*z - y^2"
TOY = "vars: x, y\neq: x' = y + 2*x^2\neq: y' = 3*x*y - x^3"


def numeric_rhs(rhs, values):
    return np.array([p(values) for p in rhs], dtype=complex)


@pytest.mark.parametrize("name", BUNDLED)
def test_coefficient_identity(name):
    """(L - kI) c^(k) equals the composition right-hand side at every level."""
    ex = expanded(name, order=16)
    rng = np.random.default_rng(1)
    for sol in ex.solutions:
        for _ in range(10):
            v = sol.random_parameters(rng)
            C = sol.numeric_coeffs(v)
            for k in range(1, sol.order + 1):
                lhs = sol.kdata.shifted(k) @ C[k]
                rhs = numeric_rhs(recursion_rhs(sol.spec, sol.weights, sol.coeffs[:k], k), v)
                assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(rhs)))


@pytest.mark.parametrize("name", BUNDLED)
def test_series_residual(name):
    for sol in expanded(name).solutions:
        assert series_residual(sol, draws=10, seed=4) < 1e-8


def test_perturbation_is_detected():
    sol = expanded("euler").solutions[0]
    C = sol.numeric_coeffs(sol.random_parameters(np.random.default_rng(0)))
    assert series_residual(sol, coeffs=C) < 1e-10
    C[3, 0] += 1e-3
    assert series_residual(sol, coeffs=C) > 1e-4


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(BUNDLED), st.floats(0.2, 3.0), st.floats(-np.pi, np.pi),
       st.integers(0, 2 ** 32 - 1))
def test_scaling_covariance(name, r, theta, seed):
    """Rescaling parameters by a^level rescales c^(k) by a^k."""
    a = r * np.exp(1j * theta)
    for sol in expanded(name, order=12).solutions:
        v = sol.random_parameters(np.random.default_rng(seed))
        C = sol.numeric_coeffs(v)
        Ca = sol.numeric_coeffs(scale_parameters(sol, v, a))
        k = np.arange(sol.order + 1)[:, None]
        assert np.allclose(Ca, a ** k * C, rtol=1e-9, atol=1e-9 * np.max(np.abs(a ** k * C)))


def test_parameter_names():
    assert [s.names for s in expanded("euler").solutions] == [("m2_2", "m3_2")] * 4
    assert [s.names for s in expanded("weierstrass").solutions] == [("w2_6",)]
    assert [s.names for s in expanded("riccati").solutions] == [()]
    k = expanded("kowalewski", order=16).solutions
    cont = [s for s in k if s.balance.continuum]
    assert [p.name for p in cont[0].parameters] == ["alpha", "g3_1", "g2_2", "g3_3", "g3_4"]
    assert not cont[0].parameters[0].symbolic


def test_riccati_exact():
    (sol,) = expanded("riccati").solutions
    C = sol.numeric_coeffs({})
    assert C[0, 0] == pytest.approx(-1)
    assert np.max(np.abs(C[1:])) < 1e-14


def test_weierstrass_against_p_function():
    """With g2 = 0: wp = z^-2 + c3 z^4 + c3^2/13 z^10 + ..., wp' level-6 coefficient 4 c3."""
    (sol,) = expanded("weierstrass").solutions
    p = 0.37 - 0.21j
    C = sol.numeric_coeffs({"w2_6": p})
    c3 = p / 4
    assert C[6, 0] == pytest.approx(c3, abs=1e-13)
    assert C[12, 0] == pytest.approx(c3 ** 2 / 13, abs=1e-13)
    assert C[12, 1] == pytest.approx(10 * c3 ** 2 / 13, abs=1e-13)
    for k in (1, 2, 3, 4, 5, 7, 8, 9, 10, 11):
        assert abs(C[k, 0]) < 1e-13
    E = compose_series(sol.spec.integrals["E"], sol, upto=0)
    assert E.coeff(0)({"w2_6": p}) == pytest.approx(-14 * c3)


def test_order_below_last_resonance_warns():
    spec = bundled("weierstrass")
    (b,) = solve_balances(spec, (2, 3))
    with pytest.warns(UserWarning):
        sol = expand(spec, (2, 3), b, 4)
    assert sol.names == ()


def test_obstruction():
    spec = parse_system(OBSTRUCTED)
    bals = [b for b in solve_balances(spec, (1, 1, 1)) if not b.continuum]
    assert bals
    hit = 0
    for b in bals:
        if np.allclose(b.point, [0, 1, 1]):
            with pytest.raises(CompatibilityObstruction) as exc:
                expand(spec, (1, 1, 1), b, 6)
            assert exc.value.k == 2
            assert exc.value.witness > 1e-3
            assert exc.value.exit_code == 2
            hit += 1
    assert hit == 1


def test_resonance_step_needs_plan():
    sol = expanded("euler").solutions[0]
    rhs = [ParamPoly.const(0.0)] * 3
    with pytest.raises(ValueError):
        recursion_step(sol.kdata, rhs, 2)


def test_pivot_basis_is_coordinate_aligned():
    sol = expanded("euler").solutions[0]
    plan = plan_resonance(sol.kdata, 2, sol.spec.names)
    assert plan.pivots == [1, 2]
    assert np.allclose(plan.basis[plan.pivots], np.eye(2))
    assert np.allclose(sol.kdata.shifted(2) @ plan.basis, 0, atol=1e-12)


# ---------------------------------------------------------------------------
# brute-force oracle for the recursion right-hand side
# ---------------------------------------------------------------------------

def _sympy_field(spec):
    syms = sympy.symbols(f"u0:{spec.n}")
    exprs = []
    for f in spec.field():
        e = 0
        for a, c in f.terms.items():
            e += sympy.nsimplify(complex(c).real) * sympy.Mul(*[s ** p for s, p in zip(syms, a)])
        exprs.append(sympy.expand(e))
    return exprs, syms


@pytest.mark.parametrize("text", [TOY, "vars: w\neq: w'' = 6*w^2"])
@pytest.mark.parametrize("seed", range(3))
def test_rhs_matches_brute_force_sum(text, seed):
    spec = parse_system(text)
    s = tuple(detect_weights(spec))
    exprs, syms = _sympy_field(spec)
    rng = np.random.default_rng(seed)
    c0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    levels = [c0] + [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(6)]
    coeffs = [[ParamPoly.const(x) for x in row] for row in levels]
    for k in range(1, 7):
        got = numeric_rhs(recursion_rhs(spec, s, coeffs[:k], k), {})
        ref = -brute_force_dk(exprs, syms, c0, levels, k)
        assert np.max(np.abs(got - ref)) < 1e-10 * (1 + np.max(np.abs(ref)))


def test_literal_single_level_sum_differs():
    spec = parse_system(TOY)
    exprs, syms = _sympy_field(spec)
    rng = np.random.default_rng(0)
    levels = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(4)]
    full = brute_force_dk(exprs, syms, levels[0], levels, 3)
    lit = literal_dk(exprs, syms, levels[0], levels, 3)
    assert np.max(np.abs(full - lit)) > 1e-3

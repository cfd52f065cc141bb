"""Acceptance criteria, one test per criterion.

Each test records a single ``criterion N: PASS|FAIL`` line; the lines are
printed in the pytest terminal summary and when this file is run directly.
"""

import time
import warnings

import numpy as np
import sympy

from qhode import (ParamPoly, delta_determinant, detect_weights, divisor_constraints,
                   domination_margin, expand, majorant, parse_system,
                   recursion_rhs, series_residual, series_vs_integration, solve_balances)
from qhode.integrability import (compare_embedding, euler_a2_coefficients, euler_balance_cases,
                                 euler_reference_parameters, family_sign, verify_kowalewski_divisor)
from qhode.report import elliptic_check

from conftest import BUNDLED, bundled
from dk_oracle import brute_force_dk

RESULTS = {}
LAMS = (1, 2, 3)


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def negative_part(H, C, s):
    """Largest |coefficient| of z^m, m < 0, in H(w(z)), from plain numpy convolutions.

    w_i(z) = z^-s_i sum_k C[k, i] z^k; every product is exact below the
    truncation order, which lies well above m = 0 here.
    """
    N = C.shape[0] - 1
    shifts = {a: -sum(e * w for e, w in zip(a, s)) for a in H.terms}
    start = min(shifts.values())
    acc = np.zeros(-start if start < 0 else 0, dtype=complex)  # exponents start..-1
    for a, coef in H.terms.items():
        if shifts[a] >= 0:
            continue
        series = np.array([coef], dtype=complex)
        for i, e in enumerate(a):
            for _ in range(e):
                series = np.convolve(series, C[:, i])[:N + 1]
        n_neg = -shifts[a]
        lo = shifts[a] - start
        acc[lo:lo + n_neg] += series[:n_neg]
    return float(np.max(np.abs(acc))) if acc.size else 0.0


def euler_solutions(order=20):
    spec = bundled("euler")
    bals = solve_balances(spec, (1, 1, 1))
    return spec, bals, [expand(spec, (1, 1, 1), b, order) for b in bals]


def match_case(solutions, case):
    (sol,) = [s for s in solutions if np.max(np.abs(s.c0 - case)) < 1e-9]
    return sol


def test_c01_euler_weights_and_delta():
    t0 = time.perf_counter()
    spec = bundled("euler")
    s = detect_weights(spec)
    d = delta_determinant(spec)
    dt = time.perf_counter() - t0
    l1, l2, l3 = LAMS
    expected = 4 * (l3 - l2) * (l1 - l3) * (l2 - l1)
    exact = set(d.terms) == {(2, 2, 2)} and abs(d.coeff((2, 2, 2)) - expected) < 1e-12
    ok = tuple(s) == (1, 1, 1) and s.unique and exact and dt < 1.0
    assert record(1, ok, f"s={tuple(s)}, Delta={d.format(spec.names)} "
                         f"(expected {expected}*m1^2*m2^2*m3^2), {dt:.2f}s")


def test_c02_euler_balances():
    t0 = time.perf_counter()
    spec = bundled("euler")
    bals = solve_balances(spec, (1, 1, 1))
    dt = time.perf_counter() - t0
    cases = euler_balance_cases(LAMS)
    dists = [min(np.max(np.abs(b.point - c)) for b in bals) for c in cases]
    ok = len(bals) == 4 and max(dists) < 1e-9 and dt < 5.0
    assert record(2, ok, f"{len(bals)} balances, max distance to case formulas "
                         f"{max(dists):.1e}, {dt:.2f}s")


def test_c03_euler_recursion():
    _, _, sols = euler_solutions()
    rng = np.random.default_rng(0)
    c1 = 0.0
    a2_err = 0.0
    null_dims = []
    for case, (p, q) in zip(euler_balance_cases(LAMS), euler_a2_coefficients(LAMS)):
        sol = match_case(sols, case)
        for _ in range(10):
            c1 = max(c1, float(np.max(np.abs(sol.numeric_coeffs(sol.random_parameters(rng))[1]))))
        null_dims.append(sol.kdata.resonance(2).nullspace_dim)
        a2 = sol.coeffs[2][0].with_names(("m2_2", "m3_2"))
        a2_err = max(a2_err, abs(a2.coeff((1, 0)) - p), abs(a2.coeff((0, 1)) - q),
                     abs(a2.constant()))
    ok = c1 < 1e-10 and null_dims == [2] * 4 and a2_err < 1e-9
    assert record(3, ok, f"max |c^(1)| = {c1:.1e}, nullspace dims {null_dims}, "
                         f"a2 relation error {a2_err:.1e}")


def test_c04_euler_divisor_map():
    _, _, sols = euler_solutions()
    sol = match_case(sols, euler_balance_cases(LAMS)[0])
    dc = divisor_constraints(sol)
    rng = np.random.default_rng(1)
    err = 0.0
    for _ in range(5):
        h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        p = dc.solve(h)
        # the closed form is written with S = 2 H2 = sum m^2 and E = 2 H1 = sum l m^2
        b2, c2 = euler_reference_parameters(LAMS, 2 * h[1], 2 * h[0])
        err = max(err, abs(p["m2_2"] - b2), abs(p["m3_2"] - c2))
    ok = dc.is_affine() and err < 1e-8
    assert record(4, ok, f"affine={dc.is_affine()}, max error over 5 draws {err:.1e} "
                         "(reference formulas read with S=2*H2, E=2*H1)")


def test_c05_kowalewski_census():
    t0 = time.perf_counter()
    spec = bundled("kowalewski")
    s = tuple(detect_weights(spec))
    fams = [b for b in solve_balances(spec, s) if b.continuum]
    sols = [expand(spec, s, b, 16, alpha=2.0) for b in fams]
    dt = time.perf_counter() - t0
    ok = len(sols) == 2 and dt < 30.0
    details = []
    for sol in sols:
        levels = sorted(p.level for p in sol.parameters if p.symbolic)
        ok &= levels == [1, 2, 3, 4]
        ok &= sol.free_parameter_count == 5 == spec.n - 1
        details.append(f"levels {levels}, total {sol.free_parameter_count}")
    assert record(5, ok, f"{'; '.join(details)}, {dt:.2f}s")


def test_c06_kowalewski_divisor_identity():
    spec = bundled("kowalewski")
    s = tuple(detect_weights(spec))
    fams = [b for b in solve_balances(spec, s) if b.continuum]
    rng = np.random.default_rng(2)
    worst = 0.0
    count = 0
    eps_seen = set()
    for alpha in (2.0, 0.7 + 0.4j, -1.3j):
        for b in fams:
            sol = expand(spec, s, b, 12, alpha=alpha)
            dc = divisor_constraints(sol)
            eps = family_sign(sol)
            eps_seen.add(eps)
            for _ in range(10):
                chk = verify_kowalewski_divisor(sol, sol.random_parameters(rng), dc, eps=eps)
                worst = max(worst, abs(chk.value))
                count += 1
    ok = worst < 1e-6 and eps_seen == {1j, -1j}
    assert record(6, ok, f"{count} draws over 3 alphas and both families, max |value| "
                         f"{worst:.1e} (H3 normalised to 1)")


def test_c07_embedding_points():
    spec = bundled("kowalewski")
    s = tuple(detect_weights(spec))
    fams = [b for b in solve_balances(spec, s) if b.continuum]
    rng = np.random.default_rng(3)
    matched = None
    derived = 0.0
    ok = True
    for b in fams:
        sol = expand(spec, s, b, 12, alpha=0.8 - 0.3j)
        for _ in range(5):
            res = compare_embedding(sol, sol.random_parameters(rng))
            derived = max(derived, res["derived_error"])
            matched = res["printed"]["matched"]
            ok &= res["printed_ok"]
    comps = [j for j, m in enumerate(matched) if m]
    record(7, ok, f"reference vector matches components {comps} of 0..7; limit computed "
                  f"from the expansions agrees with the derived vector to {derived:.1e}")
    assert ok, "reference limit vector disagrees in components " \
               f"{[j for j, m in enumerate(matched) if not m]}"


def test_c08_residual_suite():
    rng = np.random.default_rng(4)
    worst_r = 0.0
    worst_neg = 0.0
    n_sol = 0
    for name in BUNDLED:
        spec = bundled(name)
        s = tuple(detect_weights(spec))
        for b in solve_balances(spec, s):
            sol = expand(spec, s, b, 16, alpha=2.0 if b.parameter else None)
            n_sol += 1
            worst_r = max(worst_r, series_residual(sol, draws=10, seed=n_sol))
            for _ in range(10):
                C = sol.numeric_coeffs(sol.random_parameters(rng))
                for H in spec.integrals.values():
                    worst_neg = max(worst_neg, negative_part(H, C, s))
    ok = worst_r < 1e-8 and worst_neg < 1e-8
    assert record(8, ok, f"{n_sol} expansions, max residual {worst_r:.1e}, max negative-order "
                         f"integral coefficient {worst_neg:.1e}")


def test_c09_majorant_domination():
    rng = np.random.default_rng(5)
    margin = 0.0
    radius = np.inf
    svi = 0.0
    for name in ("euler", "riccati"):
        spec = bundled(name)
        s = tuple(detect_weights(spec))
        for b in solve_balances(spec, s):
            sol = expand(spec, s, b, 20)
            v = sol.random_parameters(rng)
            mb = majorant(sol, v)
            margin = max(margin, domination_margin(sol, mb, v))
            radius = min(radius, mb.radius)
            svi = max(svi, series_vs_integration(sol, v, [mb.radius / 4]))
    ok = margin <= 1.0 and radius > 0 and svi < 1e-5
    assert record(9, ok, f"max |c|/beta = {margin:.2e}, min radius {radius:.3e}, "
                         f"series vs integration at radius/4 {svi:.1e}")


def test_c10_elliptic_cross_check():
    chk = elliptic_check(bundled("euler"))
    printed = chk["variants"]["as printed"]
    flagged = "mismatch" in chk
    ok = chk["ok"] and chk["residual"] < 1e-6 and (
        chk["best"] == "as printed" or flagged)
    assert record(10, ok, f"best normalization '{chk['best']}' residual {chk['residual']:.1e}; "
                          f"as printed: {printed.get('error', printed.get('residual'))}; "
                          f"flag: {chk.get('mismatch', 'none')}")


def test_c11_brute_force_oracle():
    spec = parse_system("vars: x, y\neq: x' = y + 2*x^2\neq: y' = 3*x*y - x^3")
    s = tuple(detect_weights(spec))
    syms = sympy.symbols("u0:2")
    exprs = [sympy.expand(2 * syms[0] ** 2 + syms[1]),
             sympy.expand(3 * syms[0] * syms[1] - syms[0] ** 3)]
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(3):
        levels = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(7)]
        coeffs = [[ParamPoly.const(x) for x in row] for row in levels]
        for k in range(1, 7):
            got = np.array([p.constant() for p in recursion_rhs(spec, s, coeffs[:k], k)])
            ref = -brute_force_dk(exprs, syms, levels[0], levels, k)
            worst = max(worst, float(np.max(np.abs(got - ref)) / (1 + np.max(np.abs(ref)))))
    ok = s == (1, 2) and worst < 1e-10
    assert record(11, ok, f"toy weights {s}, k <= 6, max relative difference {worst:.1e}")


if __name__ == "__main__":
    warnings.simplefilter("ignore")
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass

# Kowalewski top: the two one-parameter families of balances, the five free
# parameters of their Laurent solutions, the quartic relation cutting out the
# divisor and the limit points of the eight functions f0..f7.
#
#   python3 demos/kowalewski_divisor.py

import numpy as np

from qhode import detect_weights, divisor_constraints, expand, load_system, solve_balances
from qhode.integrability import (compare_embedding, family_sign, parameter_census,
                                 verify_kowalewski_divisor)
from qhode.report import resolve_system_path

spec = load_system(resolve_system_path("kowalewski"))
s = tuple(detect_weights(spec))
print("weights", s)

balances = solve_balances(spec, s)
for b in balances:
    kind = "family" if b.continuum else "isolated"
    print(f"{kind:8s}", [c.format() for c in b.c0])

# The families
# Along each family c0 depends on alpha = c0(m1).  With alpha pinned to a
# number the spectrum is {-1, 0, 1, 2, 3, 4}: four resonances plus alpha give
# five parameters, n - 1 for n = 6.
families = [b for b in balances if b.continuum]
rng = np.random.default_rng(0)
for b in families:
    sol = expand(spec, s, b, N=12, alpha=2.0)
    eps = family_sign(sol)
    print()
    print("epsilon =", eps, "spectrum", np.round(sol.kdata.eigenvalues.real, 6))
    print("parameters", [(p.name, p.level) for p in sol.parameters])
    print(parameter_census(sol))

    # z^0 coefficients of the four integrals
    dc = divisor_constraints(sol)
    for name, poly in zip(dc.names, dc.polys):
        print(f"  {name}: {poly.format()[:90]}")

    # The divisor relation
    # After rescaling so that H3 = 1 the relation
    #   beta^4 (alpha^2-1)^2 - (c1 beta^2 - 2 eps c2 beta - 1)(alpha^2-1) + c4 = 0
    # holds at every parameter draw (beta = z^-1 coefficient of g3).
    vals = [abs(verify_kowalewski_divisor(sol, sol.random_parameters(rng), dc).value)
            for _ in range(10)]
    print("  divisor relation, 10 draws: max", max(vals))
    wrong = abs(verify_kowalewski_divisor(sol, sol.random_parameters(rng), dc, eps=-eps).value)
    print("  with the other family's epsilon:", wrong)

    # Limit points of f0..f7
    emb = compare_embedding(sol, sol.random_parameters(rng), dc)
    print("  limit point  ", np.round(emb["point"], 4))
    print("  against the derived vector, max error", emb["derived_error"])
    print("  components matching the reference vector", emb["printed"]["matched"])

# How far do the Laurent series converge?  The majorant gives a guaranteed
# radius; comparing with a complex-time integrator shows the series is
# accurate well inside it.
#
#   python3 demos/majorant_convergence.py

import numpy as np

from qhode import (detect_weights, domination_margin, expand, load_system, majorant,
                   series_vs_integration, solve_balances)
from qhode.report import resolve_system_path

rng = np.random.default_rng(1)
print(f"{'system':12s} {'A':>8s} {'B':>8s} {'C':>8s} {'radius':>10s} {'margin':>9s}"
      f" {'r/8':>9s} {'r/4':>9s} {'r/2':>9s}")
for name in ("riccati", "euler", "weierstrass", "kowalewski"):
    spec = load_system(resolve_system_path(name))
    s = tuple(detect_weights(spec))
    b = solve_balances(spec, s)[-1]
    sol = expand(spec, s, b, N=20, alpha=2.0 if b.parameter else None)
    v = sol.random_parameters(rng)
    mb = majorant(sol, v)
    # margin = max |c_i^(k)| / beta_k, at most 1 when the majorant dominates
    margin = domination_margin(sol, mb, v)
    errs = [series_vs_integration(sol, v, [mb.radius * f]) for f in (1 / 8, 1 / 4, 1 / 2)]
    print(f"{name:12s} {mb.A:8.3g} {mb.B:8.3g} {mb.C:8.3g} {mb.radius:10.3e} {margin:9.2e}"
          + "".join(f" {e:9.1e}" for e in errs))

# The majorant coefficients grow like radius^-k
spec = load_system(resolve_system_path("euler"))
sol = expand(spec, (1, 1, 1), solve_balances(spec, (1, 1, 1))[0], N=20)
v = sol.random_parameters(rng)
mb = majorant(sol, v)
beta = np.array(mb.beta[1:])
print()
print("beta_k radius^k, k = 1..20:")
print(np.array2string(beta * mb.radius ** np.arange(1, 21), precision=3))
C = np.abs(sol.numeric_coeffs(v)).max(axis=1)[1:]
print("max_i |c_i^(k)| / beta_k:")
print(np.array2string(C / beta, precision=2))

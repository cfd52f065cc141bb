# Euler top, start to finish: weights, balances, the Kowalevski spectrum,
# the Laurent solutions and the map from their free parameters to the values
# of the two first integrals.
#
#   python3 demos/euler_walkthrough.py

import numpy as np

from qhode import (delta_determinant, detect_weights, divisor_constraints, expand,
                   kowalevski_matrix, load_system, series_residual, solve_balances)
from qhode.integrability import euler_balance_cases, euler_reference_parameters
from qhode.report import resolve_system_path

np.set_printoptions(precision=4, suppress=True)

spec = load_system(resolve_system_path("euler"))
print(spec.to_text())

# Weights
# Every right-hand side is quadratic, so s = (1, 1, 1).  The determinant
# below is nonzero, which is what makes these weights the only ones.
s = detect_weights(spec)
print("weights", tuple(s), "unique:", s.unique)
print("Delta =", delta_determinant(spec).format(spec.names))

# Balances
# s_i c_i + f_i(c) = 0 has four nonzero solutions, one for each sign pattern.
balances = solve_balances(spec, tuple(s))
for b in balances:
    print("c0 =", b.point)
print("closed forms:")
for c in euler_balance_cases((1, 2, 3)):
    print("     ", c)

# Spectrum
# L = Jf(c0) + diag(s) has eigenvalues -1, 2, 2: a double resonance at k = 2,
# so each balance carries two free parameters, n - 1 = 2 of them.
b0 = next(b for b in balances if np.allclose(b.point, euler_balance_cases((1, 2, 3))[0]))
kd = kowalevski_matrix(spec, tuple(s), b0.point)
print(kd.matrix)
print("eigenvalues", kd.eigenvalues)

# Laurent solution
sol = expand(spec, tuple(s), b0, N=10)
print("free parameters:", sol.names)
for k in range(4):
    print(f"c^({k}) =", [c.format() for c in sol.coeffs[k]])
print("residual over 10 random draws:", series_residual(sol))

# Integrals on the solution
# H(w(z)) has no poles and its constant term is affine in (m2_2, m3_2).
dc = divisor_constraints(sol)
for name, p in zip(dc.names, dc.polys):
    print(f"z^0 of {name}:", p.format())

# Inverting the affine map recovers the parameters from prescribed integral
# values.  The closed form for b2, c2 is written in terms of S = sum m^2 and
# E = sum lambda m^2, i.e. twice H2 and twice H1.
H = np.array([0.7, -0.2 + 0.1j])
p = dc.solve(H)
print("parameters for H1, H2 =", H, ":", p)
print("closed form b2, c2:      ", euler_reference_parameters((1, 2, 3), 2 * H[1], 2 * H[0]))

"""First integrals on Laurent solutions: constancy, divisor constraints, embeddings.

Composing an integral H with a Laurent solution must give a series with no
negative powers of z; its z^0 coefficient is a polynomial in the free
parameters whose level sets cut out the divisor of the family.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import FamilyAmbiguous, NotConstant, NotExpandedFarEnough, PoleTooDeep
from .laurent import compose_series
from .poly import ParamPoly, PhasePoly

CONSTANCY_TOL = 1e-8
DIVISOR_TOL = 1e-6


@dataclass
class ConstancyResult:
    name: str
    z0: ParamPoly
    negative_max: float
    leading_exponent: int

    def to_dict(self):
        return {"name": self.name, "z0": self.z0.format(), "negative_max": self.negative_max,
                "leading_exponent": self.leading_exponent}


def integral_constancy(solution, H, name="H", tol=CONSTANCY_TOL):
    """Check that H(w(z)) has no negative powers of z and return its z^0 coefficient."""
    zs = compose_series(H, solution, upto=0)
    if zs.order <= 0:
        raise NotExpandedFarEnough(f"{name}: z^0 needs a longer expansion than order "
                                   f"{solution.order}")
    worst = 0.0
    for m, c in zs.items():
        if m >= 0:
            continue
        for mono, coef in c.terms.items():
            worst = max(worst, abs(coef))
            if abs(coef) > tol:
                label = ParamPoly(c.names, {mono: 1}).format()
                raise NotConstant(m, label, abs(coef))
    lead = zs.leading_exponent(tol)
    return ConstancyResult(name, zs.coeff(0), worst, lead if lead is not None else 0)


@dataclass
class DivisorConstraints:
    names: list  # integral names
    polys: list  # z^0 coefficient of each integral
    parameters: tuple

    def evaluate(self, values):
        return np.array([p(values) for p in self.polys], dtype=complex)

    def is_affine(self):
        return all(p.is_affine() for p in self.polys)

    def affine_map(self):
        """(M, offset) with integral values = M @ params + offset, for affine constraints."""
        if not self.is_affine():
            raise ValueError("constraints are not affine in the parameters")
        rows, offs = [], []
        for p in self.polys:
            lin, const = p.with_names(self.parameters).linear_part()
            rows.append(lin)
            offs.append(const)
        return np.array(rows), np.array(offs)

    def solve(self, integral_values):
        """Parameters producing the given integral values (square affine case)."""
        M, off = self.affine_map()
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"{M.shape[0]} constraints for {M.shape[1]} parameters")
        x = np.linalg.solve(M, np.asarray(integral_values, dtype=complex) - off)
        return dict(zip(self.parameters, x))

    def to_dict(self):
        return {"parameters": list(self.parameters),
                "constraints": {nm: p.format() for nm, p in zip(self.names, self.polys)}}


def divisor_constraints(solution, integrals=None, tol=CONSTANCY_TOL):
    """z^0 coefficients of every integral (a mapping name -> PhasePoly)."""
    integrals = solution.spec.integrals if integrals is None else integrals
    names, polys = [], []
    for nm, H in integrals.items():
        res = integral_constancy(solution, H, nm, tol)
        names.append(nm)
        polys.append(res.z0.with_names(solution.names))
    return DivisorConstraints(names, polys, tuple(solution.names))


def parameter_census(solution):
    n = solution.n
    count = solution.free_parameter_count
    return {"free_parameters": count, "predicted": solution.kdata.predicted_free_params,
            "n_minus_1": n - 1, "heuristic_satisfied": count == n - 1}


# ---------------------------------------------------------------------------
# Euler top: explicit inversion for the first balance
# ---------------------------------------------------------------------------

def euler_reference_parameters(lams, S, E):
    """Closed-form (b2, c2) of the first Euler balance from S = sum m^2 and E = sum l m^2.

    Principal square roots throughout, matching :func:`euler_first_balance`
    for l1 < l2 < l3.
    """
    l1, l2, l3 = (complex(x) for x in lams)
    c2 = ((l3 - l2) * (l1 * S - E) - (l1 - l3) * (l2 * S - E)) / (6 * np.sqrt((l1 - l3) * (l3 - l2)))
    b2 = ((l2 - l1) * (l3 * S - E) - (l3 - l2) * (l1 * S - E)) / (6 * np.sqrt((l2 - l1) * (l3 - l2)))
    return complex(b2), complex(c2)


def euler_first_balance(lams):
    """a0 = -1/sqrt((l2-l1)(l1-l3)), b0 = 1/sqrt((l2-l1)(l3-l2)) and c0 from -a0 = (l3-l2) b0 c0.

    For l1 < l2 < l3 this agrees with c0 = 1/sqrt((l1-l3)(l3-l2)); solving for c0
    keeps the sign triple consistent for every ordering of the l_j.
    """
    l1, l2, l3 = (complex(x) for x in lams)
    a = -1 / np.sqrt((l2 - l1) * (l1 - l3))
    b = 1 / np.sqrt((l2 - l1) * (l3 - l2))
    return np.array([a, b, -a / ((l3 - l2) * b)])


def euler_balance_cases(lams):
    """The four sign patterns of the Euler balances, in the conventional case order."""
    a, b, c = euler_first_balance(lams)
    return [np.array([a, b, c]), np.array([-a, b, -c]), np.array([-a, -b, c]),
            np.array([a, -b, -c])]


def euler_a2_coefficients(lams):
    """(p, q) with a2 = p b2 + q c2 for the four cases, principal square roots."""
    l1, l2, l3 = (complex(x) for x in lams)
    p = np.sqrt(l3 - l2) / np.sqrt(l1 - l3)
    q = np.sqrt(l3 - l2) / np.sqrt(l2 - l1)
    return [(p, q), (-p, q), (p, -q), (-p, -q)]


# ---------------------------------------------------------------------------
# Kowalewski top: divisor identity and embedding
# ---------------------------------------------------------------------------

KOWALEWSKI_VARS = ("m1", "m2", "m3", "g1", "g2", "g3")


def _pole_coefficient(solution, var):
    """Coefficient of z^-1 in the given variable, as a ParamPoly."""
    j = solution.spec.index(var)
    k = solution.weights[j] - 1
    return solution.coeffs[k][j]


def family_sign(solution, var="m3", tol=1e-6):
    """epsilon = +i or -i read from the z^-1 coefficient of m3."""
    lead = complex(_pole_coefficient(solution, var).constant())
    for eps in (1j, -1j):
        if abs(lead - eps) < tol:
            return eps
    raise FamilyAmbiguous(f"z^-1 coefficient of {var} is {lead}, expected +i or -i")


def scale_parameters(solution, values, a):
    """Parameters of the rescaled solution a^k c^(k): level-j parameters times a^j."""
    out = dict(values)
    for p in solution.parameters:
        if p.symbolic:
            out[p.name] = values[p.name] * a ** p.level
    return out


def unit_normalize(solution, values, constraints, integral="H3"):
    """Rescale the parameters so that the given weight-4 integral takes the value 1."""
    i = constraints.names.index(integral)
    c = complex(constraints.polys[i](values))
    if abs(c) < 1e-12:
        raise FamilyAmbiguous(f"{integral} vanishes at this draw; cannot normalise")
    return scale_parameters(solution, values, c ** -0.25)


def divisor_polynomial(alpha, beta, c1, c2, c4, eps, c3=1.0):
    """beta^4 (alpha^2-1)^2 - (c1 beta^2 - 2 eps c2 beta - c3)(alpha^2-1) + c4."""
    a = alpha * alpha - 1
    return beta ** 4 * a * a - (c1 * beta * beta - 2 * eps * c2 * beta - c3) * a + c4


@dataclass
class DivisorCheck:
    value: complex
    eps: complex
    alpha: complex
    beta: complex
    c: dict = field(default_factory=dict)
    tol: float = DIVISOR_TOL

    @property
    def ok(self):
        return abs(self.value) < self.tol

    def to_dict(self):
        return {"value": abs(self.value), "ok": self.ok, "eps": [self.eps.real, self.eps.imag],
                "alpha": [self.alpha.real, self.alpha.imag],
                "beta": [self.beta.real, self.beta.imag]}


def verify_kowalewski_divisor(solution, values, constraints=None, normalize=True, eps=None,
                              c4_shift=0.0, tol=DIVISOR_TOL):
    """Evaluate the quartic divisor relation at one parameter draw.

    With ``normalize`` the draw is first rescaled so that H3 = 1 (unit
    direction vector) and the relation is used with constant term 1;
    otherwise the homogeneous form with c3 = H3 is used.
    """
    if constraints is None:
        constraints = divisor_constraints(solution)
    if eps is None:
        eps = family_sign(solution)
    if normalize:
        values = unit_normalize(solution, values, constraints)
    c = {nm: complex(p(values)) for nm, p in zip(constraints.names, constraints.polys)}
    alpha = complex(_pole_coefficient(solution, "m1")(values))
    beta = complex(_pole_coefficient(solution, "g3")(values))
    c3 = 1.0 if normalize else c["H3"]
    val = divisor_polynomial(alpha, beta, c["H1"], c["H2"], c["H4"] + c4_shift, eps, c3)
    return DivisorCheck(val, eps, alpha, beta, c, tol)


def kowalewski_embedding_functions(n=6):
    """f0..f7 spanning the functions with simple poles along the Kowalewski divisor."""
    m1, m2, m3, g1, g2, g3 = (PhasePoly.variable(n, j) for j in range(6))
    f1, f2, f3, f4 = m1, m2, m3, g3
    f5 = f1 * f1 + f2 * f2
    f6 = f1 * f4 * 4 - f3 * f5
    f7 = (f2 * g1 - f1 * g2) * f3 + f4 * g2 * 2
    return [PhasePoly.constant_poly(n, 1), f1, f2, f3, f4, f5, f6, f7]


def embedding_point(solution, functions, upto=-1):
    """z^-1 coefficient of each f_j(w(z)) (the limit of t f_j along the family)."""
    out = []
    for j, f in enumerate(functions):
        zs = compose_series(f, solution, upto=upto)
        lead = zs.leading_exponent()
        if lead is not None and lead < -1:
            raise PoleTooDeep(j, lead)
        out.append(zs.coeff(-1).with_names(solution.names))
    return out


def printed_embedding_vector(alpha, beta, eps, c1, c2, sign=1):
    """Reference vector with the upper (sign=+1) or lower (sign=-1) choice of signs."""
    s = sign
    a = alpha * alpha - 1
    return np.array([0, alpha, s * 1j, s * 1j, beta, s * 1j * alpha * beta, eps * a * beta ** 2,
                     s * 1j * (-s * c2 + c1 * beta - 2 * a * beta ** 3)], dtype=complex)


def derived_embedding_vector(alpha, beta, eps, c1, c2):
    """The same limit computed from the family expansions (eps = z^-1 coefficient of m3)."""
    a = alpha * alpha - 1
    return np.array([0, alpha, eps * alpha, eps, beta, -4 * eps * alpha * beta,
                     4 * eps * a * beta ** 2, eps * (-eps * c2 + c1 * beta - 2 * a * beta ** 3)],
                    dtype=complex)


def compare_embedding(solution, values, constraints=None, tol=1e-8):
    """Compare the computed embedding point with both reference vectors at one draw."""
    if constraints is None:
        constraints = divisor_constraints(solution)
    eps = family_sign(solution)
    point = np.array([p(values) for p in embedding_point(solution, kowalewski_embedding_functions())])
    c = {nm: complex(p(values)) for nm, p in zip(constraints.names, constraints.polys)}
    alpha = complex(_pole_coefficient(solution, "m1")(values))
    beta = complex(_pole_coefficient(solution, "g3")(values))
    derived = derived_embedding_vector(alpha, beta, eps, c["H1"], c["H2"])
    best = None
    for sign in (1, -1):
        for glob in (1, -1):
            ref = glob * printed_embedding_vector(alpha, beta, eps, c["H1"], c["H2"], sign)
            err = np.abs(point - ref)
            matched = [bool(e < tol * (1 + abs(r))) for e, r in zip(err, ref)]
            if best is None or sum(matched) > sum(best["matched"]):
                best = {"sign": sign, "global": glob, "matched": matched,
                        "max_error": float(err.max())}
    return {"eps": eps, "point": point, "derived_error": float(np.max(np.abs(point - derived))),
            "printed": best, "printed_ok": all(best["matched"])}

"""Laurent series solutions ``w_i = z^(-s_i) sum_k c_i^(k) z^k``.

The coefficients ``c^(k)`` solve ``(L - k I) c^(k) = rhs_k`` where ``rhs_k``
is minus the order-``k`` Taylor coefficient of ``f(c(z))`` computed with
``c^(k) = 0``.  At a resonance the right-hand side must lie in the range of
``L - k I``; the solution is then a particular solution plus fresh symbolic
parameters times a nullspace basis.

Coefficients are :class:`ParamPoly` in the resonance parameters.  A continuum
parameter of the balance is pinned to a number before expansion, which keeps
every linear solve numeric.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityObstruction
from .kowalevski import kowalevski_matrix
from .poly import ParamPoly

COMPAT_TOL = 1e-8
DEFAULT_ORDER = 20


# ---------------------------------------------------------------------------
# truncated power series over ParamPoly (or plain numbers)
# ---------------------------------------------------------------------------

def _is_zero(x):
    if isinstance(x, ParamPoly):
        return not x.terms
    return x == 0


def series_mul(a, b, order, zero):
    """Coefficients 0..order of the product of two coefficient lists."""
    out = []
    for k in range(order + 1):
        acc = zero
        for t in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            x, y = a[t], b[k - t]
            if _is_zero(x) or _is_zero(y):
                continue
            acc = acc + x * y
        out.append(acc)
    return out


def series_pow(a, e, order, zero, one, cache=None):
    if cache is not None and e in cache:
        return cache[e]
    if e == 0:
        result = [one] + [zero] * order
    elif e == 1:
        result = list(a[:order + 1]) + [zero] * max(0, order + 1 - len(a))
    else:
        half = series_pow(a, e // 2, order, zero, one, cache)
        result = series_mul(half, half, order, zero)
        if e % 2:
            result = series_mul(result, a, order, zero)
    if cache is not None:
        cache[e] = result
    return result


def compose_poly_series(poly, series, order, zero, one):
    """Taylor coefficients 0..order of ``poly(series_1(z), ..., series_n(z))``."""
    caches = [{} for _ in series]
    out = [zero] * (order + 1)
    for exp, c in poly.terms.items():
        term = [one * c] + [zero] * order
        for j, e in enumerate(exp):
            if e:
                term = series_mul(term, series_pow(series[j], e, order, zero, one, caches[j]),
                                  order, zero)
        out = [x + y for x, y in zip(out, term)]
    return out


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class FreeParameter:
    name: str
    level: int  # 0 for the continuum parameter
    coordinate: int  # variable index the parameter is aligned with
    symbolic: bool
    value: complex = None  # pinned value for the continuum parameter


@dataclass
class ResonancePlan:
    k: int
    basis: np.ndarray  # n x d, identity on the pivot rows
    pivots: list
    names: list


@dataclass
class ZSeries:
    """``sum_m coeffs[m - start] z^m`` known exactly for ``m < order``."""

    start: int
    coeffs: list
    order: int

    def coeff(self, m):
        i = m - self.start
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        if m >= self.order:
            raise IndexError(f"z^{m} is beyond the truncation order {self.order}")
        return ParamPoly()

    def leading_exponent(self, tol=1e-8):
        for i, c in enumerate(self.coeffs):
            if not c.is_zero(tol):
                return self.start + i
        return None

    def negative_part_max(self):
        return max((c.max_abs() for m, c in self.items() if m < 0), default=0.0)

    def items(self):
        return [(self.start + i, c) for i, c in enumerate(self.coeffs)]


@dataclass
class LaurentSolution:
    spec: object
    weights: tuple
    balance: object
    c0: np.ndarray
    kdata: object
    order: int
    coeffs: list  # coeffs[k][i] : ParamPoly
    parameters: list  # FreeParameter
    names: tuple  # symbolic parameter names
    plans: dict = field(default_factory=dict)
    log: list = field(default_factory=list)

    @property
    def n(self):
        return self.spec.n

    @property
    def free_parameter_count(self):
        return len(self.parameters)

    def parameter(self, name):
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    def random_parameters(self, rng, scale=0.5, draws=None):
        shape = () if draws is None else (draws,)
        return {nm: scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                for nm in self.names}

    def numeric_coeffs(self, values):
        """Coefficient array of shape (order+1, n), or (draws, order+1, n) for batches."""
        if not self.names:
            return np.array([[complex(c.constant()) for c in row] for row in self.coeffs])
        batch = np.ndim(next(iter(values.values()))) > 0
        if batch:
            D = len(next(iter(values.values())))
            out = np.zeros((D, self.order + 1, self.n), dtype=complex)
            for k, row in enumerate(self.coeffs):
                for i, c in enumerate(row):
                    out[:, k, i] = c.evaluate_batch(values)
            return out
        return np.array([[c(values) for c in row] for row in self.coeffs], dtype=complex)

    def evaluate(self, z, values=None, coeffs=None):
        """The truncated series at z (numeric parameters)."""
        C = self.numeric_coeffs(values or {}) if coeffs is None else coeffs
        z = complex(z)
        powers = z ** np.arange(self.order + 1)
        s = np.asarray(self.weights, dtype=float)
        return (powers @ C) * z ** (-s)

    def to_json(self):
        return {
            "order": self.order,
            "weights": list(self.weights),
            "parameters": [{"name": p.name, "level": p.level, "coordinate": p.coordinate,
                            "symbolic": p.symbolic,
                            "value": None if p.value is None else [p.value.real, p.value.imag]}
                           for p in self.parameters],
            "coefficients": [[c.with_names(self.names).to_json() for c in row]
                             for row in self.coeffs],
        }


# ---------------------------------------------------------------------------
# recursion
# ---------------------------------------------------------------------------

def _pivot_basis(N, tol=1e-6):
    """Re-express the nullspace basis N (n x d) so it is the identity on d coordinate rows.

    Coordinates are tried from the last one backwards and accepted while the
    selected rows stay well conditioned.
    """
    n, d = N.shape
    scale = np.linalg.norm(N, 2)
    chosen = []
    for i in reversed(range(n)):
        trial = chosen + [i]
        sv = np.linalg.svd(N[trial, :], compute_uv=False)
        if sv[-1] > tol * scale:
            chosen = trial
            if len(chosen) == d:
                break
    chosen.sort()
    B = N @ np.linalg.inv(N[chosen, :])
    B[np.abs(B) < 1e-14] = 0
    return B, chosen


def plan_resonance(kdata, k, var_names):
    M = kdata.shifted(k)
    _, _, vh = np.linalg.svd(M)
    rank = len(M) - kdata.resonance(k).nullspace_dim
    N = vh[rank:].conj().T
    B, piv = _pivot_basis(N)
    return ResonancePlan(k, B, piv, [f"{var_names[p]}_{k}" for p in piv])


def _to_matrix(vec, names):
    monos = sorted({m for p in vec for m in p.with_names(names).terms})
    R = np.zeros((len(vec), len(monos)), dtype=complex)
    for i, p in enumerate(vec):
        p = p.with_names(names)
        for j, m in enumerate(monos):
            R[i, j] = p.terms.get(m, 0)
    return monos, R


def _from_matrix(monos, X, names):
    return [ParamPoly(names, {m: X[i, j] for j, m in enumerate(monos)}) for i in range(X.shape[0])]


def recursion_step(kdata, rhs, k, plan=None, names=None):
    """Solve ``(L - k I) c = rhs`` for one level; ``rhs`` is a vector of ParamPoly."""
    n = len(rhs)
    if names is None:
        names = tuple(dict.fromkeys(nm for p in rhs for nm in p.names))
        if plan is not None:
            names = names + tuple(nm for nm in plan.names if nm not in names)
    names = tuple(names)
    monos, R = _to_matrix(rhs, names)
    M = kdata.shifted(k)
    res = kdata.resonance(k)
    if res is None:
        X = np.linalg.solve(M, R) if monos else np.zeros((n, 0))
        return _from_matrix(monos, X, names)
    U, sv, vh = np.linalg.svd(M)
    rank = n - res.nullspace_dim
    if monos:
        proj = U[:, rank:].conj().T @ R
        witness = float(np.max(np.abs(proj))) if proj.size else 0.0
        if witness > COMPAT_TOL * max(1.0, float(np.max(np.abs(R)))):
            raise CompatibilityObstruction(k, witness)
        # pseudo-inverse restricted to the range of rank `rank`
        X = (vh[:rank].conj().T / sv[:rank]) @ (U[:, :rank].conj().T @ R)
    else:
        X = np.zeros((n, 0))
    if plan is None:
        raise ValueError(f"resonance at k={k} needs a ResonancePlan")
    B = plan.basis
    X = X - B @ X[plan.pivots, :]
    out = _from_matrix(monos, X, names)
    for j, nm in enumerate(plan.names):
        pv = ParamPoly.var(nm, names)
        out = [o + pv * complex(B[i, j]) if B[i, j] != 0 else o for i, o in enumerate(out)]
    return out


def recursion_rhs(spec, s, coeffs, k):
    """Minus the order-k coefficient of f(c(z)) with c^(k) = 0 (composition route)."""
    n = spec.n
    names = tuple(dict.fromkeys(nm for row in coeffs for p in row for nm in p.names))
    zero = ParamPoly.const(0, names)
    one = ParamPoly.const(1, names)
    series = [[coeffs[t][i].with_names(names) if t < len(coeffs) else zero
               for t in range(k)] + [zero] for i in range(n)]
    out = []
    for f in spec.field():
        comp = compose_poly_series(f, series, k, zero, one)
        out.append(-comp[k])
    return out


class _TaylorEngine:
    """Incremental order-k Taylor coefficients of f(c(z)).

    Each monomial of f is a node whose series is its parent monomial's series
    times one variable; the order-k coefficient with c^(k) excluded is
    accumulated from lower orders only, then corrected once c^(k) is known.
    """

    def __init__(self, polys, c0, names):
        self.names = names
        self.zero = ParamPoly.const(0, names)
        n = len(c0)
        self.n = n
        nodes = set()
        for p in polys:
            for a in p.terms:
                a = list(a)
                while sum(a) > 0:
                    nodes.add(tuple(a))
                    j = next(i for i, e in enumerate(a) if e)
                    a[j] -= 1
        self.order = sorted(nodes, key=lambda a: (sum(a), a))
        self.parent = {}
        for a in self.order:
            j = next(i for i, e in enumerate(a) if e)
            pa = list(a)
            pa[j] -= 1
            self.parent[a] = (tuple(pa), j)
        c0 = np.asarray(c0, dtype=complex)
        self.grad = {}
        for a in self.order:
            g = np.zeros(n, dtype=complex)
            for j in range(n):
                if a[j]:
                    e = list(a)
                    e[j] -= 1
                    g[j] = a[j] * np.prod(c0 ** np.array(e))
            self.grad[a] = g
        self.X = [[ParamPoly.const(c0[j], names)] for j in range(n)]
        self.S = {a: [ParamPoly.const(np.prod(c0 ** np.array(a)), names)] for a in self.order}
        self.polys = polys
        self.partials = {}

    def rhs(self, k):
        partial = {}
        for a in self.order:
            pa, j = self.parent[a]
            if sum(pa) == 0:
                partial[a] = self.zero
                continue
            Sp = self.S[pa]
            Xj = self.X[j]
            acc = partial[pa] * Xj[0] if not _is_zero(partial[pa]) else self.zero
            for t in range(1, k):
                x, y = Sp[t], Xj[k - t]
                if _is_zero(x) or _is_zero(y):
                    continue
                acc = acc + x * y
            partial[a] = acc
        self.partials = partial
        out = []
        for p in self.polys:
            acc = self.zero
            for a, c in p.terms.items():
                if sum(a) and not _is_zero(partial[a]):
                    acc = acc + partial[a] * c
            out.append(-acc)
        return out

    def commit(self, ck):
        for j in range(self.n):
            self.X[j].append(ck[j])
        for a in self.order:
            g = self.grad[a]
            full = self.partials[a]
            for j in np.flatnonzero(g):
                if not _is_zero(ck[j]):
                    full = full + ck[j] * complex(g[j])
            self.S[a].append(full)


def expand(spec, s, balance, N=DEFAULT_ORDER, alpha=None, kdata=None):
    """Run the recursion up to order N and return a :class:`LaurentSolution`."""
    s = tuple(s)
    c0 = balance.instantiate(alpha, spec, s)
    if kdata is None:
        kdata = kowalevski_matrix(spec, s, c0, balance.continuum)
    if N < kdata.lambda_n:
        warnings.warn(f"order {N} is below the largest resonance {kdata.lambda_n}; "
                      "some free parameters will be missing")
    plans = {}
    params = []
    if balance.parameter is not None:
        params.append(FreeParameter(balance.parameter, 0, balance.pivot, False,
                                    complex(c0[balance.pivot])))
    for r in kdata.resonances:
        if r.k <= N:
            plan = plan_resonance(kdata, r.k, spec.names)
            plans[r.k] = plan
            for nm, piv in zip(plan.names, plan.pivots):
                params.append(FreeParameter(nm, r.k, piv, True))
    names = tuple(p.name for p in params if p.symbolic)
    engine = _TaylorEngine(spec.field(), c0, names)
    coeffs = [[ParamPoly.const(x, names) for x in c0]]
    log = []
    for k in range(1, N + 1):
        rhs = engine.rhs(k)
        try:
            ck = recursion_step(kdata, rhs, k, plans.get(k), names)
        except CompatibilityObstruction as exc:
            exc.partial = coeffs
            raise
        engine.commit(ck)
        coeffs.append(ck)
        if k in plans:
            log.append(f"k={k}: resonance, parameters {', '.join(plans[k].names)}")
    return LaurentSolution(spec, s, balance, c0, kdata, N, coeffs, params, names, plans, log)


# ---------------------------------------------------------------------------
# verification and composition
# ---------------------------------------------------------------------------

def _numeric_compose(poly, C, order):
    """Taylor coefficients of poly(c(z)) for numeric C with shape (..., order+1, n)."""
    def mul(a, b):
        out = np.zeros_like(a)
        for t in range(order + 1):
            out[..., t:] += a[..., t:t + 1] * b[..., :order + 1 - t]
        return out

    shape = C.shape[:-1]
    total = np.zeros(shape, dtype=complex)
    for exp, c in poly.terms.items():
        term = np.zeros(shape, dtype=complex)
        term[..., 0] = c
        for j, e in enumerate(exp):
            for _ in range(e):
                term = mul(term, C[..., j])
        total = total + term
    return total


def series_residual(solution, draws=10, seed=0, scale=0.5, coeffs=None, relative=False):
    """Max modulus of the order-by-order residual of w' - f(w) below the truncation order.

    Parameters are instantiated at ``draws`` random complex points; with
    ``coeffs`` an explicit numeric coefficient array (order+1, n) is checked
    instead.
    """
    if coeffs is None:
        rng = np.random.default_rng(seed)
        C = solution.numeric_coeffs(solution.random_parameters(rng, scale, draws))
        if C.ndim == 2:
            C = C[None]
    else:
        C = np.asarray(coeffs, dtype=complex)[None]
    N = C.shape[1] - 1
    s = np.asarray(solution.weights, dtype=float)
    kk = np.arange(N + 1)[:, None]
    lhs = (kk - s[None, :]) * C
    worst = 0.0
    for i, f in enumerate(solution.spec.field()):
        F = _numeric_compose(f, C, N)
        r = np.abs(lhs[..., i] - F)
        if relative:
            r = r / (1 + np.abs(lhs[..., i]) + np.abs(F))
        worst = max(worst, float(np.max(r)))
    return worst


def compose_series(g, solution, upto=None):
    """``g(w(z))`` as a ZSeries with ParamPoly coefficients.

    ``upto`` caps the largest exponent computed (inclusive); the result is
    exact for exponents below ``ZSeries.order``.
    """
    s = solution.weights
    names = solution.names
    zero = ParamPoly.const(0, names)
    one = ParamPoly.const(1, names)
    N = solution.order
    shifts = {a: -sum(e * w for e, w in zip(a, s)) for a in g.terms}
    if not shifts:
        return ZSeries(0, [], N + 1)
    start = min(shifts.values())
    valid = min(sh + N for sh in shifts.values()) + 1  # exclusive
    top = valid - 1 if upto is None else min(upto, valid - 1)
    series = [[solution.coeffs[k][i] for k in range(N + 1)] for i in range(solution.n)]
    caches = [{} for _ in series]
    out = [zero] * (top - start + 1)
    for a, c in g.terms.items():
        sh = shifts[a]
        rel = top - sh
        if rel < 0:
            continue
        term = [one * c] + [zero] * rel
        for j, e in enumerate(a):
            if e:
                pw = series_pow(series[j], e, N, zero, one, caches[j])
                term = series_mul(term, pw[:rel + 1], rel, zero)
        for t, x in enumerate(term):
            if not _is_zero(x):
                out[sh + t - start] = out[sh + t - start] + x
    return ZSeries(start, out, valid)

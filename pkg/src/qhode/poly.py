"""Sparse multivariate polynomials with complex double coefficients.

Two flavours share one implementation:

* :class:`PhasePoly` lives in the phase variables ``w_1..w_n`` and has a
  fixed arity.
* :class:`ParamPoly` lives in named free parameters; operands with different
  name lists are aligned on the union of names.

Terms are stored as ``{exponent tuple: complex}`` and pruned below
``PRUNE_TOL`` after every arithmetic operation.  Values are treated as
immutable once built.
"""

import math
import numbers

import numpy as np

from .errors import DivisionByZero

PRUNE_TOL = 1e-13


def _prune(terms):
    return {k: v for k, v in terms.items() if abs(v) >= PRUNE_TOL}


def grlex_key(exp):
    return (sum(exp), exp)


def _fmt_number(c):
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}*i"
    return f"({c.real!r} + {c.imag!r}*i)"


def _fmt_terms(terms, names):
    if not terms:
        return "0"
    parts = []
    for exp in sorted(terms, key=grlex_key, reverse=True):
        c = terms[exp]
        factors = []
        for name, e in zip(names, exp):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        if not factors:
            parts.append(_fmt_number(c))
        elif c == 1:
            parts.append("*".join(factors))
        elif c == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(_fmt_number(c) + "*" + "*".join(factors))
    return " + ".join(parts).replace("+ -", "- ")


class _Sparse:
    __slots__ = ("terms",)

    # subclasses provide: _nvars, _new(terms), _align(other) -> (a, b)

    def __init__(self, terms):
        self.terms = terms

    # -- construction helpers -------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, numbers.Number):
            return self._new({(0,) * self._nvars: complex(other)} if other != 0 else {})
        return NotImplemented

    # -- ring operations ------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._align(other)
        out = dict(a.terms)
        for k, v in b.terms.items():
            out[k] = out.get(k, 0) + v
        return a._new(_prune(out))

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            if other == 0:
                return self._new({})
            c = complex(other)
            return self._new(_prune({k: v * c for k, v in self.terms.items()}))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._align(other)
        out = {}
        get = out.get
        for ka, va in a.terms.items():
            for kb, vb in b.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = get(k, 0) + va * vb
        return a._new(_prune(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return self * (1 / complex(other))
        return NotImplemented

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        result = self._coerce(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- queries --------------------------------------------------------------
    def is_zero(self, tol=PRUNE_TOL):
        return all(abs(v) < tol for v in self.terms.values())

    def max_abs(self):
        return max((abs(v) for v in self.terms.values()), default=0.0)

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=-1)

    def coeff(self, exp):
        return self.terms.get(tuple(exp), 0j)

    def constant(self):
        return self.terms.get((0,) * self._nvars, 0j)

    def monomials(self):
        return sorted(self.terms, key=grlex_key)

    def equals(self, other, tol=1e-12):
        diff = self - other
        return diff.is_zero(tol)

    def _eval(self, point):
        point = [complex(x) for x in point]
        total = 0j
        for exp, c in self.terms.items():
            t = c
            for x, e in zip(point, exp):
                if e:
                    t *= x ** e
            total += t
        return total

    def __hash__(self):
        return hash(tuple(sorted(
            (k, round(v.real, 10), round(v.imag, 10)) for k, v in self.terms.items())))


class PhasePoly(_Sparse):
    """Polynomial in ``n`` phase variables."""

    __slots__ = ("n",)

    def __init__(self, n, terms=None):
        self.n = n
        terms = {} if terms is None else terms
        for k in terms:
            if len(k) != n or any(e < 0 for e in k):
                raise ValueError(f"bad exponent vector {k} for arity {n}")
        super().__init__(_prune({tuple(k): complex(v) for k, v in terms.items()}))

    @property
    def _nvars(self):
        return self.n

    def _new(self, terms):
        p = PhasePoly.__new__(PhasePoly)
        p.n = self.n
        p.terms = terms
        return p

    def _align(self, other):
        if other.n != self.n:
            raise ValueError(f"arity mismatch {self.n} vs {other.n}")
        return self, other

    @classmethod
    def constant_poly(cls, n, c):
        return cls(n, {(0,) * n: c} if c != 0 else {})

    @classmethod
    def variable(cls, n, j):
        exp = [0] * n
        exp[j] = 1
        return cls(n, {tuple(exp): 1})

    def __eq__(self, other):
        if not isinstance(other, PhasePoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = _Sparse.__hash__

    def __call__(self, point):
        return poly_eval(self, point)

    def diff(self, j):
        return poly_diff(self, j)

    def gradient(self):
        return [poly_diff(self, j) for j in range(self.n)]

    def compose(self, polys):
        """Substitute ``w_j -> polys[j]``; the result type follows ``polys``."""
        if len(polys) != self.n:
            raise ValueError("wrong number of substitutions")
        one = polys[0]._coerce(1) if polys else None
        total = one * 0
        cache = {}
        for exp, c in self.terms.items():
            t = one * c
            for j, e in enumerate(exp):
                if e:
                    key = (j, e)
                    if key not in cache:
                        cache[key] = polys[j] ** e
                    t = t * cache[key]
            total = total + t
        return total

    def shift(self, point):
        """Return ``p(point + w)`` as a PhasePoly (Taylor data around ``point``)."""
        subs = [PhasePoly.variable(self.n, j) + complex(point[j]) for j in range(self.n)]
        return self.compose(subs)

    def weighted_degrees(self, weights):
        return sorted({sum(e * s for e, s in zip(exp, weights)) for exp in self.terms})

    def format(self, names=None):
        names = names or [f"w{j + 1}" for j in range(self.n)]
        return _fmt_terms(self.terms, names)

    def __repr__(self):
        return f"PhasePoly({self.format()})"


class ParamPoly(_Sparse):
    """Polynomial in named free parameters."""

    __slots__ = ("names",)

    def __init__(self, names=(), terms=None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate parameter names")
        terms = {} if terms is None else terms
        for k in terms:
            if len(k) != len(self.names):
                raise ValueError(f"bad exponent vector {k}")
        super().__init__(_prune({tuple(k): complex(v) for k, v in terms.items()}))

    @property
    def _nvars(self):
        return len(self.names)

    def _new(self, terms, names=None):
        p = ParamPoly.__new__(ParamPoly)
        p.names = self.names if names is None else names
        p.terms = terms
        return p

    def with_names(self, names):
        names = tuple(names)
        if names == self.names:
            return self
        idx = [names.index(nm) for nm in self.names]
        terms = {}
        for k, v in self.terms.items():
            e = [0] * len(names)
            for i, x in zip(idx, k):
                e[i] = x
            terms[tuple(e)] = v
        return self._new(terms, names)

    def _align(self, other):
        if other.names == self.names:
            return self, other
        names = self.names + tuple(n for n in other.names if n not in self.names)
        return self.with_names(names), other.with_names(names)

    @classmethod
    def const(cls, c, names=()):
        names = tuple(names)
        return cls(names, {(0,) * len(names): c} if c != 0 else {})

    @classmethod
    def var(cls, name, names=None):
        names = tuple(names) if names is not None else (name,)
        exp = [0] * len(names)
        exp[names.index(name)] = 1
        return cls(names, {tuple(exp): 1})

    def __eq__(self, other):
        if not isinstance(other, ParamPoly):
            return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    __hash__ = _Sparse.__hash__

    def __call__(self, values):
        """Evaluate; ``values`` is a mapping name -> number or a sequence in name order."""
        if isinstance(values, dict):
            point = [values[nm] for nm in self.names]
        else:
            point = list(values)
        return self._eval(point)

    def evaluate_batch(self, values):
        """Vectorised evaluation; ``values`` maps name -> array of draws."""
        shape = np.shape(next(iter(values.values()))) if values else ()
        total = np.zeros(shape, dtype=complex)
        cols = [np.asarray(values[nm], dtype=complex) for nm in self.names]
        for exp, c in self.terms.items():
            t = np.full(shape, c, dtype=complex)
            for x, e in zip(cols, exp):
                if e:
                    t = t * x ** e
            total = total + t
        return total

    def substitute(self, values):
        """Partially evaluate the parameters named in ``values``."""
        keep = [i for i, nm in enumerate(self.names) if nm not in values]
        names = tuple(self.names[i] for i in keep)
        out = {}
        for exp, c in self.terms.items():
            t = c
            for i, e in enumerate(exp):
                if e and self.names[i] in values:
                    t *= complex(values[self.names[i]]) ** e
            k = tuple(exp[i] for i in keep)
            out[k] = out.get(k, 0) + t
        return ParamPoly(names, out)

    def is_affine(self, tol=1e-10):
        return all(sum(k) <= 1 for k, v in self.terms.items() if abs(v) >= tol)

    def linear_part(self):
        """Coefficients of the degree-1 monomials, in name order, and the constant."""
        lin = np.zeros(len(self.names), dtype=complex)
        for k, v in self.terms.items():
            if sum(k) == 1:
                lin[k.index(1)] = v
        return lin, self.constant()

    def format(self):
        return _fmt_terms(self.terms, self.names)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"ParamPoly({self.format()})"

    def to_json(self):
        return [{"monomial": list(k), "re": v.real, "im": v.imag}
                for k, v in sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))]


def parampoly_ops(a, b):
    """The four ring operations at once, mostly a convenience for tests."""
    return {"add": a + b, "sub": a - b, "mul": a * b}


def is_zero(p, tol=PRUNE_TOL):
    return p.is_zero(tol)


class RationalFn:
    """``numerator / denominator`` with PhasePoly parts."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator=None):
        if denominator is None:
            denominator = PhasePoly.constant_poly(numerator.n, 1)
        if denominator.is_zero():
            raise DivisionByZero("denominator is identically zero")
        if numerator.n != denominator.n:
            raise ValueError("arity mismatch")
        self.numerator = numerator
        self.denominator = denominator

    @property
    def n(self):
        return self.numerator.n

    @property
    def is_polynomial(self):
        d = self.denominator
        return d.degree == 0

    def as_poly(self):
        if not self.is_polynomial:
            raise ValueError("not a polynomial")
        return self.numerator * (1 / self.denominator.constant())

    def __call__(self, point):
        return poly_eval(self, point)

    def format(self, names=None):
        if self.is_polynomial:
            return self.as_poly().format(names)
        return f"({self.numerator.format(names)}) / ({self.denominator.format(names)})"

    def __repr__(self):
        return f"RationalFn({self.format()})"


def poly_eval(p, point, tol=1e-14):
    """Evaluate a PhasePoly or RationalFn at a point."""
    if len(point) != p.n:
        raise ValueError(f"point has length {len(point)}, arity is {p.n}")
    if isinstance(p, RationalFn):
        den = p.denominator._eval(point)
        if abs(den) < tol:
            raise DivisionByZero(f"denominator vanishes at {tuple(point)}")
        return p.numerator._eval(point) / den
    return p._eval(point)


def poly_diff(p, j):
    if not 0 <= j < p.n:
        raise IndexError(f"variable index {j} out of range for arity {p.n}")
    out = {}
    for exp, c in p.terms.items():
        e = exp[j]
        if e:
            k = exp[:j] + (e - 1,) + exp[j + 1:]
            out[k] = c * e
    return p._new(_prune(out))


def poly_det(matrix):
    """Determinant of a square matrix of PhasePoly by cofactor expansion over column subsets."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    arity = matrix[0][0].n
    # minors[(mask)] = det of rows 0..k-1 and the columns in mask (k = popcount)
    minors = {0: PhasePoly.constant_poly(arity, 1)}
    for row in range(n):
        nxt = {}
        for mask, m in minors.items():
            if m.is_zero():
                continue
            for col in range(n):
                if mask & (1 << col):
                    continue
                entry = matrix[row][col]
                if entry.is_zero():
                    continue
                # sign: number of chosen columns greater than col
                sign = -1 if bin(mask >> (col + 1)).count("1") % 2 else 1
                key = mask | (1 << col)
                term = m * entry * sign
                nxt[key] = nxt[key] + term if key in nxt else term
        minors = nxt
    return minors.get((1 << n) - 1, PhasePoly(arity))


def factorial_multi(alpha):
    return math.prod(math.factorial(a) for a in alpha)

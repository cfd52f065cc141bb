"""Quasi-homogeneity weights and the uniqueness determinant."""

import itertools
from dataclasses import dataclass

import numpy as np
import sympy

from .poly import PhasePoly, poly_det

S_MAX = 6


@dataclass(frozen=True)
class WeightVector:
    s: tuple
    unique: bool

    def __iter__(self):
        return iter(self.s)

    def __len__(self):
        return len(self.s)

    def __getitem__(self, i):
        return self.s[i]


def _constraints(spec):
    """Rows (a, i, shift): each monomial exponent ``a`` of f_i must have weight s_i + 1 + shift.

    For rational right-hand sides every numerator monomial must share one
    weight and every denominator monomial another; the difference is s_i + 1.
    Returned as a list of per-equation (numerator exps, denominator exps).
    """
    return [(list(r.numerator.terms), list(r.denominator.terms)) for r in spec.rhs]


def _feasible(s, cons):
    s = np.asarray(s)
    for i, (num, den) in enumerate(cons):
        if not num:
            continue  # f_i == 0 imposes nothing
        wn = {int(np.dot(a, s)) for a in num}
        wd = {int(np.dot(a, s)) for a in den}
        if len(wn) != 1 or len(wd) != 1:
            return False
        if wn.pop() - wd.pop() != s[i] + 1:
            return False
    return True


def _candidates(n, smax):
    """All s in [1, smax]^n ordered by sum, then lexicographically."""
    grid = np.array(list(itertools.product(range(1, smax + 1), repeat=n)), dtype=int)
    order = np.lexsort(tuple(grid[:, j] for j in reversed(range(n))) + (grid.sum(axis=1),))
    return grid[order]


def _search(spec, smax, exclude=()):
    cons = _constraints(spec)
    n = spec.n
    # vectorised screen on the polynomial part, exact check afterwards
    grid = _candidates(n, smax)
    mask = np.ones(len(grid), dtype=bool)
    for i, (num, den) in enumerate(cons):
        if not num or len(den) != 1 or any(den[0]):
            continue
        for a in num:
            mask &= grid @ np.asarray(a) == grid[:, i] + 1
    for s in grid[mask]:
        t = tuple(int(x) for x in s)
        if t in exclude:
            continue
        if _feasible(t, cons):
            return t
    return None


def _rational_fallback(spec):
    """Exact rational solve of the weight equations (polynomial systems)."""
    n = spec.n
    sym = sympy.symbols(f"s0:{n}")
    eqs = []
    for i, r in enumerate(spec.rhs):
        if not r.is_polynomial:
            return None
        for a in r.numerator.terms:
            eqs.append(sum(e * x for e, x in zip(a, sym)) - sym[i] - 1)
    if not eqs:
        return None
    sol = sympy.linsolve(eqs, sym)
    if not sol:
        return None
    (vals,) = sol
    if any(v.free_symbols for v in vals):
        return None
    if all(v.is_integer and v >= 1 for v in vals):
        return tuple(int(v) for v in vals)
    return None


def detect_weights(spec, smax=S_MAX):
    """Minimal positive integer weights making the system quasi-homogeneous, or None.

    Ties among minimal-sum solutions go to the lexicographically smallest.
    """
    s = _search(spec, smax)
    if s is None:
        s = _rational_fallback(spec)
    if s is None:
        return None
    unique = True
    if spec.is_polynomial:
        unique = not delta_determinant(spec).is_zero()
    return WeightVector(s, unique)


def second_solution(spec, s, smax=S_MAX):
    """Another feasible weight vector within the search box, if any."""
    return _search(spec, smax, exclude={tuple(s)})


def check_invariance(spec, s):
    """Exact exponent bookkeeping for f_i(a^s w) = a^(s_i+1) f_i(w)."""
    s = tuple(s)
    if len(s) != spec.n or any(x < 1 for x in s):
        return False
    return _feasible(s, _constraints(spec))


def delta_determinant(spec):
    """det(w_j df_i/dw_j - delta_ij f_i) as a PhasePoly."""
    f = spec.field()
    n = spec.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = PhasePoly.variable(n, j) * f[i].diff(j)
            if i == j:
                e = e - f[i]
            row.append(e)
        rows.append(row)
    return poly_det(rows)

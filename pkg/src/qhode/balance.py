"""Leading-order (balance) equations ``s_i c_i + f_i(c) = 0`` and their solutions.

Solutions are found by damped Newton iteration from seeded random complex
starts.  A solution whose Jacobian is rank deficient lies on a continuum; a
one-dimensional continuum is traced, parameterised by its dominant tangent
coordinate (``alpha``) and fitted by a low-degree polynomial.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .errors import NoBalanceFound
from .poly import ParamPoly, PhasePoly
from .system import compile_polys

CONTINUUM_PARAM = "alpha"
RANK_RTOL = 1e-8
RESIDUAL_TOL = 1e-9


@dataclass
class BalanceConfig:
    starts: int = 200
    seed: int = 0
    tol: float = 1e-12
    dedup: float = 1e-6
    scale: float = 2.0
    max_iter: int = 50


@dataclass
class Balance:
    c0: tuple  # ParamPoly per variable; in CONTINUUM_PARAM when continuum
    residual_norm: float
    continuum: bool
    jacobian_rank: int
    point: np.ndarray  # one numeric representative
    pivot: Optional[int] = None  # coordinate used as the continuum parameter
    curve_exact: bool = True
    notes: list = field(default_factory=list)

    @property
    def parameter(self):
        return CONTINUUM_PARAM if self.continuum and self.pivot is not None else None

    def instantiate(self, alpha=None, spec=None, s=None):
        """Numeric leading coefficients; pins the continuum parameter when present."""
        if self.parameter is None:
            return np.array(self.point, dtype=complex)
        if alpha is None:
            alpha = self.point[self.pivot]
        c = np.array([p({CONTINUUM_PARAM: alpha}) for p in self.c0], dtype=complex)
        if spec is not None and s is not None:
            c = _pinned_newton(_Eq5(spec, s), c, self.pivot, complex(alpha))
        return c

    def key(self):
        if self.parameter is not None:
            coeffs = []
            for p in self.c0:
                for k in range(3):
                    coeffs.append(p.coeff((k,)))
            return (1,) + _round_key(coeffs)
        return (0,) + _round_key(self.point)


def _round_key(values):
    out = []
    for v in values:
        v = complex(v)
        out.extend((round(v.real, 6) + 0.0, round(v.imag, 6) + 0.0))
    return tuple(out)


class _Eq5:
    """Numeric residual and Jacobian of the balance equations."""

    def __init__(self, spec, s):
        polys = balance_equations(spec, s)
        self.n = spec.n
        self.F = compile_polys(polys)
        self.J = compile_polys([p.diff(j) for p in polys for j in range(self.n)])

    def res(self, c):
        return self.F(c)

    def jac(self, c):
        return self.J(c).reshape(self.n, self.n)


def balance_equations(spec, s):
    """The polynomials ``s_i c_i + f_i(c)`` in the unknowns c."""
    n = spec.n
    return [PhasePoly.variable(n, i) * s[i] + f for i, f in enumerate(spec.field())]


def balance_residual(spec, s, c0):
    polys = balance_equations(spec, s)
    return max(abs(p(c0)) for p in polys)


def _polish(eq, c, nr, steps=3):
    """A few plain Newton steps past the tolerance, kept only while they help."""
    for _ in range(steps):
        trial = c + np.linalg.lstsq(eq.jac(c), -eq.res(c), rcond=None)[0]
        nt = np.max(np.abs(eq.res(trial)))
        if not nt < nr:
            break
        c, nr = trial, nt
    return c, nr


def _newton(eq, c, cfg):
    r = eq.res(c)
    nr = np.max(np.abs(r))
    for _ in range(cfg.max_iter):
        if nr < cfg.tol * max(1.0, np.max(np.abs(c)) ** 2):
            c, nr = _polish(eq, c, nr)
            return c, nr, True
        step = np.linalg.lstsq(eq.jac(c), -r, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            trial = c + t * step
            rt = eq.res(trial)
            nt = np.max(np.abs(rt))
            if np.isfinite(nt) and nt < nr:
                break
            t *= 0.5
        else:
            return c, nr, False
        c, r, nr = trial, rt, nt
    return c, nr, nr < cfg.tol * max(1.0, np.max(np.abs(c)) ** 2)


def _pinned_newton(eq, c, pivot, alpha, iters=60, tol=1e-13):
    """Gauss-Newton on [eq(c); c_pivot - alpha] = 0."""
    n = eq.n
    e = np.zeros(n, dtype=complex)
    e[pivot] = 1
    for _ in range(iters):
        r = np.append(eq.res(c), c[pivot] - alpha)
        if np.max(np.abs(r)) < tol * max(1.0, np.max(np.abs(c)) ** 2):
            break
        Jm = np.vstack([eq.jac(c), e])
        c = c + np.linalg.lstsq(Jm, -r, rcond=None)[0]
    return c


def _rank(M):
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def _trace_curve(eq, c, max_degree=4, npts=7):
    """Fit c(alpha) along a one-dimensional continuum through c.

    Returns (pivot, list of coefficient arrays per coordinate) or (pivot, None).
    """
    n = eq.n
    _, _, vh = np.linalg.svd(eq.jac(c))
    v = vh[-1].conj()
    mags = np.abs(v)
    pivot = int(np.flatnonzero(mags >= (1 - 1e-9) * mags.max())[0])
    a0 = c[pivot]
    h = 0.37 * max(1.0, abs(a0)) * (1 + 0.41j)
    alphas, pts = [], []
    prev = c
    for j in range(npts):
        a = a0 + j * h
        guess = prev + (a - prev[pivot]) * v / v[pivot]
        p = _pinned_newton(eq, guess, pivot, a)
        if np.max(np.abs(eq.res(p))) > 1e-11 * max(1.0, np.max(np.abs(p)) ** 2):
            return pivot, None
        alphas.append(a)
        pts.append(p)
        prev = p
    alphas = np.array(alphas)
    pts = np.array(pts)
    # fit in a centred variable for conditioning, then expand back
    for deg in range(1, max_degree + 1):
        V = np.vander(alphas - a0, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, pts, rcond=None)
        if np.max(np.abs(V @ coef - pts)) < 1e-9:
            break
    else:
        return pivot, None
    # re-expand sum_k coef_k (alpha - a0)^k in powers of alpha
    out = np.zeros((deg + 1, n), dtype=complex)
    for k in range(deg + 1):
        for m in range(k + 1):
            out[m] += comb(k, m) * (-a0) ** (k - m) * coef[k]
    out[np.abs(out) < 1e-11] = 0
    # snap near-integers and near-simple values produced by round-off
    snapped = np.round(out.real, 10) + 1j * np.round(out.imag, 10)
    out = np.where(np.abs(snapped - out) < 1e-10, snapped, out)
    # validate at fresh parameter values
    for a in (a0 - 0.73 * h, a0 + 2.9j * abs(h)):
        cc = sum(out[k] * a ** k for k in range(deg + 1))
        if np.max(np.abs(eq.res(cc))) > RESIDUAL_TOL:
            return pivot, None
    return pivot, [out[:, i] for i in range(n)]


def solve_balances(spec, s, config=None):
    """Multistart Newton for the balance equations; returns a sorted list of Balance."""
    cfg = config or BalanceConfig()
    eq = _Eq5(spec, s)
    n = spec.n
    rng = np.random.default_rng(cfg.seed)
    starts = cfg.scale * (rng.standard_normal((cfg.starts, n))
                          + 1j * rng.standard_normal((cfg.starts, n))) / np.sqrt(2)
    isolated = []
    continua = []
    for c in starts:
        c, nr, ok = _newton(eq, c, cfg)
        if not ok or np.max(np.abs(c)) < 1e-6:
            continue
        if any(np.max(np.abs(c - b.point)) < cfg.dedup for b in isolated):
            continue
        if any(_on_continuum(b, c, cfg.dedup) for b in continua):
            continue
        rank = _rank(eq.jac(c))
        if rank == n:
            c = _snap_small(c)
            c0 = tuple(ParamPoly.const(x) for x in c)
            isolated.append(Balance(c0, float(np.max(np.abs(eq.res(c)))), False, rank,
                                    c.copy()))
            continue
        if rank == n - 1:
            pivot, curve = _trace_curve(eq, c)
            if curve is not None:
                c0 = tuple(ParamPoly((CONTINUUM_PARAM,),
                                     {(k,): co[k] for k in range(len(co))}) for co in curve)
                # representative point: the curve at the found pivot value
                rep = np.array([p({CONTINUUM_PARAM: c[pivot]}) for p in c0])
                resid = max(np.max(np.abs(eq.res(np.array(
                    [p({CONTINUUM_PARAM: a}) for p in c0])))) for a in (rep[pivot], 1.0, 2.0, 1j))
                continua.append(Balance(c0, float(resid), True, rank, rep, pivot, True))
                continue
            b = Balance(tuple(ParamPoly.const(x) for x in c),
                        float(np.max(np.abs(eq.res(c)))), True, rank, c.copy(), pivot, False,
                        ["continuum could not be fitted by a polynomial curve"])
        else:
            b = Balance(tuple(ParamPoly.const(x) for x in c),
                        float(np.max(np.abs(eq.res(c)))), True, rank, c.copy(), None, False,
                        [f"continuum of dimension {n - rank} is not parameterised"])
        continua.append(b)
    # Newton accepts residuals relative to |c|^2; points that drifted far out
    # along an asymptotic direction pass that test without being solutions
    found = [b for b in isolated + continua if b.residual_norm < RESIDUAL_TOL]
    if not found:
        raise NoBalanceFound(f"no nonzero balance after {cfg.starts} starts")
    return sorted(found, key=Balance.key)


def _snap_small(c, rtol=1e-14):
    """Zero real or imaginary parts that are round-off relative to the vector."""
    eps = rtol * max(1.0, float(np.max(np.abs(c))))
    re = np.where(np.abs(c.real) < eps, 0.0, c.real)
    im = np.where(np.abs(c.imag) < eps, 0.0, c.imag)
    return re + 1j * im


def _on_continuum(b, c, tol):
    if b.parameter is not None:
        cc = np.array([p({CONTINUUM_PARAM: c[b.pivot]}) for p in b.c0])
        return np.max(np.abs(cc - c)) < tol
    return np.max(np.abs(c - b.point)) < tol

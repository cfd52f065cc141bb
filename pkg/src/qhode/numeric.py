"""Numerical cross-checks: complex-time integration, series vs. integration, Jacobi functions."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp, InvalidRegime, ModulusOutOfRange, StiffnessFailure
from .poly import poly_eval
from .system import SystemSpec, compile_polys

# Dormand-Prince 5(4) tableau
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class ComplexPath:
    """Straight segment from z0 to z1, sampled at ``steps`` equal sub-segments."""

    z0: complex
    z1: complex
    steps: int = 1

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ValueError("a path needs at least one step")

    def points(self):
        return np.linspace(complex(self.z0), complex(self.z1), int(self.steps) + 1)


@dataclass
class TrajectorySample:
    z: np.ndarray
    w: np.ndarray  # (len(z), n)
    err: np.ndarray  # largest local error estimate on the sub-segment ending at z
    nsteps: int = 0

    @property
    def final(self):
        return self.w[-1]

    def to_csv(self, path):
        n = self.w.shape[1]
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["re_z", "im_z"] + [f"{p}_w{j + 1}" for j in range(n) for p in ("re", "im")])
            for z, w in zip(self.z, self.w):
                z = complex(z)
                out.writerow([repr(z.real), repr(z.imag)]
                             + [repr(float(x)) for v in w for x in (v.real, v.imag)])


def field_function(system):
    """Numeric right-hand side for a SystemSpec or a plain callable."""
    if not isinstance(system, SystemSpec):
        return lambda w: np.asarray(system(w), dtype=complex)
    if system.is_polynomial:
        return compile_polys(system.field())
    rhs = system.rhs
    return lambda w: np.array([poly_eval(r, w) for r in rhs], dtype=complex)


def _dp_step(f, w, k1, h):
    ks = [k1]
    for i in range(1, 7):
        wi = w + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(wi))
    w5 = w + h * sum(b * k for b, k in zip(_B5, ks))
    err = h * sum(e * k for e, k in zip(_E, ks))
    return w5, err, ks[-1]


def integrate(system, w0, path, tol=1e-10, fixed_steps=None, max_steps=200_000, blowup=1e12):
    """Dormand-Prince integration of ``w' = f(w)`` along a straight complex path.

    The path is parameterised by real ``tau`` in [0, 1]; each step advances
    ``z`` by ``tau_step * (z1 - z0)``.  With ``fixed_steps`` every sub-segment
    is covered by that many equal steps and no error control is applied.
    """
    f0 = field_function(system)
    w = np.array(w0, dtype=complex)
    pts = path.points()
    zs, ws, errs = [pts[0]], [w.copy()], [0.0]
    bound = blowup * max(1.0, np.max(np.abs(w)))
    total = 0
    for za, zb in zip(pts[:-1], pts[1:]):
        dz = zb - za

        def f(v):
            return dz * f0(v)

        tau = 0.0
        k1 = f(w)
        seg_err = 0.0
        if fixed_steps:
            h = 1.0 / fixed_steps
            for _ in range(fixed_steps):
                w, e, k1 = _dp_step(f, w, k1, h)
                seg_err = max(seg_err, float(np.max(np.abs(e))))
            total += fixed_steps
        else:
            h = _initial_step(f, w, k1)
            while tau < 1.0:
                h = min(h, 1.0 - tau)
                if total >= max_steps:
                    raise StiffnessFailure(f"more than {max_steps} steps near z={za + tau * dz}")
                wn, e, kn = _dp_step(f, w, k1, h)
                scale = tol * (1.0 + np.maximum(np.abs(w), np.abs(wn)))
                ratio = float(np.max(np.abs(e) / scale)) if np.all(np.isfinite(wn)) else np.inf
                total += 1
                if ratio <= 1.0:
                    tau += h
                    w, k1 = wn, kn
                    seg_err = max(seg_err, float(np.max(np.abs(e))))
                    if np.max(np.abs(w)) > bound:
                        raise BlowUp(za + tau * dz)
                fac = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
                h = h * fac
                if h < 1e-14:
                    raise BlowUp(za + tau * dz)
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > bound:
            raise BlowUp(zb)
        zs.append(zb)
        ws.append(w.copy())
        errs.append(seg_err)
    return TrajectorySample(np.array(zs), np.array(ws), np.array(errs), total)


def _initial_step(f, w, k1):
    d0 = np.max(np.abs(w)) + 1e-300
    d1 = np.max(np.abs(k1)) + 1e-300
    h0 = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-3
    h0 = min(h0, 1.0)
    k2 = f(w + h0 * k1)
    d2 = np.max(np.abs(k2 - k1)) / h0 / (1 + d0)
    h1 = (0.01 / max(d1 / (1 + d0), d2)) ** 0.2 if max(d1, d2) > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100 * h0, h1, 1.0)


def series_vs_integration(solution, values=None, radii=(), points=8, tol=1e-12, offset=0.3):
    """Max relative discrepancy between the series and integration around rings.

    For each radius r the integrator is seeded with the series value at
    ``r e^(i offset)`` and carried along chords through ``points`` ring points;
    each arrival is compared with the series evaluated there.
    """
    values = values or {}
    C = solution.numeric_coeffs(values)
    worst = 0.0
    for r in radii:
        ring = r * np.exp(1j * (offset + 2 * np.pi * np.arange(points + 1) / points))
        w = solution.evaluate(ring[0], coeffs=C)
        for za, zb in zip(ring[:-1], ring[1:]):
            w = integrate(solution.spec, w, ComplexPath(za, zb, 1), tol=tol).final
            ref = solution.evaluate(zb, coeffs=C)
            worst = max(worst, float(np.linalg.norm(w - ref) / np.linalg.norm(ref)))
    return worst


# ---------------------------------------------------------------------------
# Jacobi elliptic functions
# ---------------------------------------------------------------------------

def jacobi_elliptic(u, k):
    """(sn, cn, dn)(u | modulus k) by the arithmetic-geometric mean and descending Landen steps."""
    if not 0 <= k < 1:
        raise ModulusOutOfRange(f"modulus {k} outside [0, 1)")
    u = np.asarray(u, dtype=float)
    if k == 0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    a, b, c = [1.0], [np.sqrt(1.0 - k * k)], [k]
    while abs(c[-1]) > 1e-17 and len(a) < 40:
        a.append(0.5 * (a[-1] + b[-1]))
        c.append(0.5 * (a[-2] - b[-1]))
        b.append(np.sqrt(a[-2] * b[-1]))
    N = len(a) - 1
    phi = (2.0 ** N) * a[N] * u
    prev = phi
    for j in range(N, 0, -1):
        prev = phi
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
    sn, cn = np.sin(phi), np.cos(phi)
    dn = cn / np.cos(prev - phi) if N else np.ones_like(u)
    return sn, cn, dn


# ---------------------------------------------------------------------------
# Euler top in elliptic functions
# ---------------------------------------------------------------------------

# (factor applied to H2 = (m1^2 + m2^2 + m3^2)/2 before it enters the formula,
#  sign of the elliptic argument)
EULER_NORMALIZATIONS = {
    "as printed": (1.0, 1),
    "argument t -> -t": (1.0, -1),
    "H2 read as m1^2+m2^2+m3^2": (2.0, 1),
    "H2 read as m1^2+m2^2+m3^2, argument t -> -t": (2.0, -1),
}


@dataclass
class EllipticCheck:
    lambdas: tuple
    H1: float
    H2: float
    variants: dict = field(default_factory=dict)  # name -> dict of outcomes
    best: str = None
    residual: float = np.inf
    tol: float = 1e-6

    @property
    def passed(self):
        return self.residual < self.tol

    def to_dict(self):
        return {"lambdas": list(self.lambdas), "H1": self.H1, "H2": self.H2,
                "best": self.best, "residual": self.residual, "passed": self.passed,
                "variants": self.variants}


def euler_closed_form(lams, H1, H2, t, h2_factor=1.0, sign=1):
    """m(t) and m'(t) from the cn/sn/dn formulas at argument ``sign * omega * t``.

    H2 is multiplied by ``h2_factor`` before use.

    Returns (m, dm, k2).  The regime requires every radicand positive and
    0 <= k^2 < 1.
    """
    l1, l2, l3 = lams
    P = h2_factor * H2
    Q = 2 * H1
    rad = {"m1": (Q - P * l3) / (l1 - l3), "m2": (Q - P * l3) / (l2 - l3),
           "m3": (P * l1 - Q) / (l1 - l3), "omega": (l2 - l3) * (P * l1 - Q)}
    bad = [k for k, v in rad.items() if not v > 0]
    if bad:
        raise InvalidRegime(f"non-positive radicand for {', '.join(bad)}")
    k2 = (l1 - l2) * (Q - P * l3) / ((l2 - l3) * (P * l1 - Q))
    if not 0 <= k2 < 1:
        raise InvalidRegime(f"k^2 = {k2} outside [0, 1)")
    A, B, C = (np.sqrt(rad[k]) for k in ("m1", "m2", "m3"))
    om = np.sqrt(rad["omega"])
    sn, cn, dn = jacobi_elliptic(sign * om * np.asarray(t, dtype=float), np.sqrt(k2))
    m = np.stack([A * cn, B * sn, C * dn], axis=-1)
    dm = sign * om * np.stack([-A * sn * dn, B * cn * dn, -C * k2 * sn * cn], axis=-1)
    return m, dm, k2


def euler_closed_form_check(lams, H1, H2, t_grid, tol=1e-6):
    """Residual of the Jacobi-function solution against the Euler equations.

    H1 = (l1 m1^2 + l2 m2^2 + l3 m3^2)/2 and H2 = (m1^2 + m2^2 + m3^2)/2.  Each
    normalization is scored by the larger of the ODE residual and the error in
    reproducing H1, H2 along the curve.
    """
    l1, l2, l3 = lams
    out = EllipticCheck(tuple(lams), float(H1), float(H2), tol=tol)
    for name, (fac, sign) in EULER_NORMALIZATIONS.items():
        try:
            m, dm, k2 = euler_closed_form(lams, H1, H2, t_grid, fac, sign)
        except InvalidRegime as exc:
            out.variants[name] = {"h2_factor": fac, "sign": sign, "error": exc.name,
                                  "message": str(exc)}
            continue
        rhs = np.stack([(l3 - l2) * m[:, 1] * m[:, 2], (l1 - l3) * m[:, 0] * m[:, 2],
                        (l2 - l1) * m[:, 0] * m[:, 1]], axis=-1)
        ode = float(np.max(np.abs(dm - rhs)))
        h1 = 0.5 * (m ** 2 @ np.array([l1, l2, l3]))
        h2 = 0.5 * np.sum(m ** 2, axis=1)
        integ = float(max(np.max(np.abs(h1 - H1)), np.max(np.abs(h2 - H2))))
        res = max(ode, integ)
        out.variants[name] = {"h2_factor": fac, "sign": sign, "k2": float(k2), "ode_residual": ode,
                              "integral_residual": integ, "residual": res,
                              "H2_ratio": float(H2 / np.mean(h2))}
        if res < out.residual:
            out.residual, out.best = res, name
    return out

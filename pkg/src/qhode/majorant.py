"""Majorant series for the Laurent coefficients and the implied radius bound.

With ``A`` bounding the low-order coefficients, ``B`` the Taylor data of f at
the balance and ``C`` the resolvent ``(L - k I)^-1`` beyond the last
resonance, the series ``Phi = A z + sum beta_k z^k`` defined by
``Phi = A z + C B^2 (n Phi)^2 / (1 - B n Phi)`` dominates every coefficient.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoPositiveRoot, NotExpandedFarEnough

C_MARGIN = 1e-6
SCAN = 100


@dataclass
class MajorantBound:
    A: float
    B: float
    C: float
    n: int
    lambda_n: int
    radius: float
    beta: list = field(default_factory=list)

    def to_dict(self):
        return {"A": self.A, "B": self.B, "C": self.C, "n": self.n,
                "lambda_n": self.lambda_n, "radius": self.radius}


def taylor_bound(spec, c0):
    """Smallest B with |d^a f_i(c0)| <= a! B^|a| for every multi-index a != 0."""
    B = 0.0
    for f in spec.field():
        for a, coef in f.shift(np.asarray(c0, dtype=complex)).terms.items():
            deg = sum(a)
            if deg and abs(coef) > 0:
                B = max(B, abs(coef) ** (1.0 / deg))
    return B


def resolvent_bound(L, start, scan=SCAN):
    """sup over k >= start of ||(L - k I)^-1||_inf, scanned then tail-bounded."""
    n = len(L)
    normL = np.linalg.norm(L, np.inf)
    best = 0.0
    k = start
    while k < start + scan or k <= normL + 1:
        best = max(best, np.linalg.norm(np.linalg.inv(L - k * np.eye(n)), np.inf))
        k += 1
    # for k beyond the scan, ||(L - kI)^-1|| <= 1 / (k - ||L||)
    return max(best, 1.0 / (k - normL))


def majorant_constants(solution, values=None, N=None):
    """(A, B, C) at one numeric instantiation of the free parameters."""
    kdata = solution.kdata
    lam = kdata.lambda_n
    if solution.order < lam:
        raise NotExpandedFarEnough(f"expanded to {solution.order}, largest resonance is {lam}")
    C_num = solution.numeric_coeffs(values or {})
    top = np.max(np.abs(C_num[1:lam + 1])) if lam >= 1 else 0.0
    A = 1.0 + float(top)
    B = taylor_bound(solution.spec, solution.c0)
    C = max(A + C_MARGIN, resolvent_bound(kdata.matrix, lam + 1))
    return A, B, C


def radius_lower_bound(A, B, C, n):
    """Smallest positive root of 1 - 2nAB(1 + 2nBC) z + n^2 A^2 B^2 z^2."""
    if min(A, B, C) <= 0:
        raise NoPositiveRoot(f"constants must be positive (A={A}, B={B}, C={C})")
    a = (n * A * B) ** 2
    b = -2 * n * A * B * (1 + 2 * n * B * C)
    disc = b * b - 4 * a
    if disc < 0:
        raise NoPositiveRoot("complex roots")
    # numerically stable smaller root
    q = -0.5 * (b - np.sqrt(disc))
    root = 1.0 / q if q != 0 else np.inf  # c/q with c = 1
    if not root > 0:
        raise NoPositiveRoot(f"root {root}")
    return float(root)


def majorant_coeffs(A, B, C, n, N):
    """beta_1..beta_N (index 0 unused, set to 0).

    beta_k grows like radius^-k, so double precision overflows once N is a
    few hundred divided by -log10(radius).
    """
    beta = np.zeros(N + 1)
    beta[1] = A
    nb = n * B
    for k in range(2, N + 1):
        # [Phi^m]_k with Phi truncated below k; Phi^m needs only beta_1..beta_{k-1}
        phi = beta[:k].copy()
        power = phi.copy()
        total = 0.0
        for m in range(2, k + 1):
            power = np.convolve(power, phi)[:k + 1]
            if len(power) <= k:
                break
            total += nb ** m * power[k]
        beta[k] = C * total
    return beta.tolist()


def closed_form_phi(A, B, C, n, z):
    """Phi(z) from the quadratic root, for comparison with majorant_coeffs."""
    z = np.asarray(z, dtype=complex)
    disc = 1 - 2 * n * A * B * (1 + 2 * n * B * C) * z + (n * A * B * z) ** 2
    return (1 + n * A * B * z - np.sqrt(disc)) / (2 * n * B * (1 + n * B * C))


def majorant(solution, values=None, N=None):
    """Compute the full bound and check domination at the given instantiation."""
    N = solution.order if N is None else N
    A, B, C = majorant_constants(solution, values)
    n = solution.n
    return MajorantBound(A, B, C, n, solution.kdata.lambda_n,
                         radius_lower_bound(A, B, C, n), majorant_coeffs(A, B, C, n, N))


def domination_margin(solution, bound, values=None):
    """max over k >= 1, i of |c_i^(k)| / beta_k; domination holds when <= 1."""
    C_num = np.abs(solution.numeric_coeffs(values or {}))
    N = min(len(bound.beta) - 1, C_num.shape[0] - 1)
    beta = np.asarray(bound.beta[1:N + 1])
    return float(np.max(C_num[1:N + 1].max(axis=1) / beta)) if N >= 1 else 0.0

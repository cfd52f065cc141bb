"""Kowalevski matrix, spectrum and resonance structure at a balance."""

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned

INT_TOL = 1e-6
NEAR_TOL = 1e-3
NULL_RTOL = 1e-8


@dataclass
class Resonance:
    k: int
    multiplicity: int  # algebraic, counted from the spectrum
    nullspace_dim: int  # geometric

    @property
    def defective(self):
        return self.nullspace_dim < self.multiplicity


@dataclass
class KowalevskiData:
    matrix: np.ndarray
    weights: tuple
    eigenvalues: np.ndarray
    resonances: list
    continuum: bool
    near_resonances: list = field(default_factory=list)  # (eigenvalue, nearest int)

    @property
    def predicted_free_params(self):
        return sum(r.nullspace_dim for r in self.resonances) + (1 if self.continuum else 0)

    @property
    def lambda_n(self):
        """Largest positive integer eigenvalue (0 when there is none)."""
        return max((r.k for r in self.resonances), default=0)

    def resonance(self, k):
        for r in self.resonances:
            if r.k == k:
                return r
        return None

    def shifted(self, k):
        return self.matrix - k * np.eye(len(self.matrix))


def nullspace_dim(M, rtol=NULL_RTOL):
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return M.shape[1]
    return int(np.sum(sv <= rtol * sv[0])) + (M.shape[1] - len(sv))


def jacobian_at(spec, c0):
    f = spec.field()
    n = spec.n
    return np.array([[f[i].diff(j)(c0) for j in range(n)] for i in range(n)], dtype=complex)


def kowalevski_matrix(spec, s, c0, continuum=False):
    """Jacobian of f at c0 plus diag(s), with spectrum and resonances."""
    c0 = np.asarray(c0, dtype=complex)
    L = jacobian_at(spec, c0) + np.diag(np.asarray(s, dtype=float))
    try:
        ev = np.linalg.eigvals(L)
    except np.linalg.LinAlgError as exc:
        raise IllConditioned(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise IllConditioned("non-finite eigenvalues")
    ev = ev[np.lexsort((ev.imag, ev.real))]
    counts = {}
    near = []
    for lam in ev:
        k = int(round(lam.real))
        dist = abs(lam - k)
        if dist < INT_TOL:
            if k >= 1:
                counts[k] = counts.get(k, 0) + 1
        elif dist < NEAR_TOL:
            near.append((complex(lam), k))
    # L - kI is singular whenever k was accepted as an eigenvalue, so at least
    # one null direction is kept even when c0 is only accurate to ~1e-8
    res = [Resonance(k, m, max(1, nullspace_dim(L - k * np.eye(len(L)))))
           for k, m in sorted(counts.items())]
    return KowalevskiData(L, tuple(s), ev, res, bool(continuum), near)


def resonance_report(data, n):
    return {
        "predicted_free_params": data.predicted_free_params,
        "n_minus_1": n - 1,
        "heuristic_satisfied": data.predicted_free_params == n - 1,
        "lambda_n": data.lambda_n,
        "resonances": [{"k": r.k, "multiplicity": r.multiplicity,
                        "nullspace_dim": r.nullspace_dim, "defective": r.defective}
                       for r in data.resonances],
        "near_resonances": [{"eigenvalue": [z.real, z.imag], "nearest": k}
                            for z, k in data.near_resonances],
    }

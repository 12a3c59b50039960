"""Dense linear-algebra primitives used by the rest of the package.

Everything here is a pure function of numpy arrays. Hermitian inputs are
symmetrized before any eigendecomposition, and all spectra are returned in
descending order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidInputError, NotPSDError

#: Relative threshold below which a singular value/eigenvalue counts as zero.
RANK_TOL = 1e-9


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array or raise."""
    a = np.asarray(m)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a.astype(complex, copy=False)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class ReducedSvd:
    """Rank-truncated SVD ``m = left @ diag(singular_values) @ right^H``."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.conj().T


def reduced_svd(m, rank_tol: float = RANK_TOL) -> ReducedSvd:
    """Reduced SVD keeping singular values above ``rank_tol * sigma_max``.

    A zero matrix gives rank 0 with empty ``(rows, 0)`` / ``(cols, 0)`` factors.
    """
    if not rank_tol > 0:
        raise InvalidInputError("rank_tol must be positive")
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tol * s[0]))
    return ReducedSvd(u[:, :r], s[:r].copy(), vh[:r].conj().T)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(eigvals, eigvecs)`` with ``m = U diag(lam) U^H``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"hermitian_eig needs a square matrix, got {a.shape}")
    lam, u = np.linalg.eigh(hermitize(a))
    return lam[::-1].copy(), u[:, ::-1].copy()


def psd_power(m, exponent: float, tol: float = RANK_TOL) -> np.ndarray:
    """Matrix square root (``exponent=0.5``) or inverse square root (``-0.5``).

    Eigenvalues at or below ``tol * lambda_max`` are treated as zero; for the
    inverse root they are pseudo-inverted, i.e. mapped to zero.
    """
    if exponent not in (0.5, -0.5):
        raise InvalidInputError("psd_power supports exponents 1/2 and -1/2 only")
    lam, u = hermitian_eig(m)
    lam_max = lam[0] if lam.size else 0.0
    if lam_max <= 0.0:
        if lam.size and lam[-1] < -tol * max(abs(lam[-1]), 1.0):
            raise NotPSDError(f"matrix is not PSD (min eigenvalue {lam[-1]:.3e})")
        return np.zeros_like(u)
    if lam[-1] < -tol * lam_max:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {lam[-1]:.3e})")
    keep = lam > tol * lam_max
    f = np.zeros_like(lam)
    f[keep] = lam[keep] ** exponent
    return hermitize((u * f) @ u.conj().T)


def pseudo_inverse(m, tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with relative singular-value cutoff."""
    a = as_matrix(m)
    svd = reduced_svd(a, tol)
    if svd.rank == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
    return (svd.right / svd.singular_values) @ svd.left.conj().T


def waterfill(gains, budget: float) -> np.ndarray:
    """Optimal power split over parallel channels with unit noise.

    Maximizes ``sum(log(1 + g_i p_i))`` subject to ``sum(p) = budget``:
    ``p_i = max(0, mu - 1/g_i)``. Zero-gain channels get zero power.

    >>> waterfill([4.0, 1.0], 1.0)
    array([0.875, 0.125])
    """
    g = np.asarray(gains, dtype=float).ravel()
    if budget < 0 or not np.isfinite(budget):
        raise InvalidInputError("budget must be a finite nonnegative number")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise InvalidInputError("gains must be finite and nonnegative")
    p = np.zeros_like(g)
    live = np.flatnonzero(g >= np.finfo(float).tiny)
    if budget == 0:
        return p
    if live.size == 0:
        if not np.any(g > 0):
            raise InfeasibleError("all channel gains are zero")
        # only subnormal gains: 1/g overflows, the strongest takes everything
        p[np.argmax(g)] = budget
        return p

    order = live[np.argsort(-g[live], kind="stable")]
    inv = 1.0 / g[order]
    csum = np.cumsum(inv)
    n = np.arange(1, order.size + 1)
    mu = (budget + csum) / n
    # largest active set whose weakest member still sits below the water level;
    # the strongest channel is always active once budget > 0
    active = mu > inv
    active[0] = True
    k = int(np.flatnonzero(active)[-1]) + 1
    p[order[:k]] = mu[k - 1] - inv[:k]
    return p

"""Per-user and sum rates of the hybrid broadcast channel and its dual MAC.

Conventions
-----------
* Users are indexed ``0..K-1``. List order is the DPC encoding order in the
  BC (user 0 sees no interference) and the reverse SIC order in the MAC
  (user ``j`` is interfered by users ``j+1..K-1``).
* Rates are ``1/2 * log2 det(...)``: the half prefactor is kept on purpose.
  Multiply by two for bits/s/Hz reporting.
* Noise has unit variance everywhere, so SNR equals the total power ``P``.

Shapes: ``H[k]`` is ``M x N``, ``V`` is ``N x Ns``, ``W[k]`` is ``M x d``,
MAC covariances ``Q[k]`` are ``d x d`` and BC covariances ``D[k]`` are
``Ns x Ns``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .kernels import hermitize

HALF = 0.5


@dataclass(frozen=True)
class SystemDims:
    """System dimensions. ``n_rf_t``/``n_rf_r`` default to ``2 Ns`` and ``2 d``."""

    K: int
    N: int
    M: int
    d: int
    n_rf_t: int | None = None
    n_rf_r: int | None = None

    def __post_init__(self):
        if min(self.K, self.N, self.M, self.d) < 1:
            raise InvalidInputError("all dimensions must be >= 1")
        if self.d > min(self.M, self.N):
            raise InvalidInputError("d must not exceed min(M, N)")
        if self.Ns > self.N:
            raise InvalidInputError("K*d streams do not fit on N BS antennas")
        if self.n_rf_t is None:
            object.__setattr__(self, "n_rf_t", 2 * self.Ns)
        if self.n_rf_r is None:
            object.__setattr__(self, "n_rf_r", 2 * self.d)
        if self.n_rf_t < 2 * self.Ns or self.n_rf_r < 2 * self.d:
            raise InvalidInputError("need at least twice as many RF chains as streams")

    @property
    def Ns(self) -> int:
        return self.K * self.d


def _check_shapes(H: Sequence[np.ndarray], V: np.ndarray, W: Sequence[np.ndarray], cov=None, cov_dim=None):
    K = len(H)
    if len(W) != K:
        raise InvalidInputError(f"expected {K} combiners, got {len(W)}")
    M, N = H[0].shape
    if V.ndim != 2 or V.shape[0] != N:
        raise InvalidInputError(f"precoder must have {N} rows, got shape {V.shape}")
    for k in range(K):
        if H[k].shape != (M, N):
            raise InvalidInputError("channel shapes differ across users")
        if W[k].ndim != 2 or W[k].shape[0] != M:
            raise InvalidInputError(f"combiner {k} must have {M} rows")
    if cov is not None:
        if len(cov) != K:
            raise InvalidInputError(f"expected {K} covariances, got {len(cov)}")
        for k in range(K):
            n = cov_dim(k)
            if cov[k].shape != (n, n):
                raise InvalidInputError(f"covariance {k} must be {n}x{n}, got {cov[k].shape}")


def _check_mac(H, V, W, Q):
    _check_shapes(H, V, W, Q, lambda k: W[k].shape[1])


def _check_bc(H, V, W, D):
    _check_shapes(H, V, W, D, lambda k: V.shape[1])


def log2det_gain(base: np.ndarray, extra: np.ndarray) -> float:
    """``log2 det(I + base^{-1} extra)`` for PD ``base`` and PSD ``extra``.

    Evaluated on the Cholesky-whitened matrix so the result is never negative.
    """
    L = np.linalg.cholesky(hermitize(base))
    Linv_x = np.linalg.solve(L, extra)
    white = np.linalg.solve(L, Linv_x.conj().T).conj().T
    lam = np.linalg.eigvalsh(hermitize(white))
    return float(np.sum(np.log2(1.0 + np.clip(lam, 0.0, None))))


def mac_signal_cov(H, W, Q, users=None) -> np.ndarray:
    """``sum_k H_k^H W_k Q_k W_k^H H_k`` over ``users`` (all by default)."""
    N = H[0].shape[1]
    S = np.zeros((N, N), dtype=complex)
    for k in range(len(H)) if users is None else users:
        G = W[k].conj().T @ H[k]
        S += G.conj().T @ Q[k] @ G
    return hermitize(S)


def mac_interference_cov(j: int, H, V, W, Q) -> np.ndarray:
    """Noise-plus-interference covariance ``B_j`` seen by MAC user ``j``."""
    _check_mac(H, V, W, Q)
    S = mac_signal_cov(H, W, Q, range(j + 1, len(H)))
    return hermitize(V.conj().T @ V + V.conj().T @ S @ V)


def mac_user_rate(j: int, H, V, W, Q) -> float:
    B = mac_interference_cov(j, H, V, W, Q)
    G = W[j].conj().T @ H[j] @ V
    return HALF * log2det_gain(B, G.conj().T @ Q[j] @ G)


def mac_sum_rate(H, V, W, Q) -> float:
    """``1/2 log2 |V^H V + V^H S V| - 1/2 log2 |V^H V|``."""
    _check_mac(H, V, W, Q)
    VhV = V.conj().T @ V
    S = mac_signal_cov(H, W, Q)
    return HALF * log2det_gain(VhV, V.conj().T @ S @ V)


def bc_interference_cov(j: int, H, V, W, D) -> np.ndarray:
    """Noise-plus-interference covariance ``A_j`` (``d x d``) of BC user ``j``."""
    _check_bc(H, V, W, D)
    Ns = V.shape[1]
    prior = sum((D[l] for l in range(j)), np.zeros((Ns, Ns), dtype=complex))
    E = W[j].conj().T @ H[j] @ V
    return hermitize(W[j].conj().T @ W[j] + E @ prior @ E.conj().T)


def bc_user_rate(j: int, H, V, W, D) -> float:
    A = bc_interference_cov(j, H, V, W, D)
    E = W[j].conj().T @ H[j] @ V
    return HALF * log2det_gain(A, E @ D[j] @ E.conj().T)


def bc_sum_rate(H, V, W, D) -> float:
    return float(sum(bc_user_rate(j, H, V, W, D) for j in range(len(H))))


def mac_user_rates(H, V, W, Q) -> np.ndarray:
    return np.array([mac_user_rate(j, H, V, W, Q) for j in range(len(H))])


def bc_user_rates(H, V, W, D) -> np.ndarray:
    return np.array([bc_user_rate(j, H, V, W, D) for j in range(len(H))])

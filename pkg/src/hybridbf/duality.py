"""MAC-to-BC covariance transformation for the hybrid system.

The precoder ``V`` and combiners ``W_k`` are shared between uplink and
downlink, so user ``j`` sees the effective downlink channel
``Ht_j = W_j^H H_j V`` and its Hermitian in the uplink. Users are processed in
increasing index because ``A_j`` depends on the already-computed
``D_0..D_{j-1}``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .kernels import RANK_TOL, hermitize, psd_power, reduced_svd
from .rates import bc_user_rates, mac_interference_cov, mac_user_rates

#: Positive-definiteness floor asserted for A_j and B_j.
PD_TOL = 1e-10


@dataclass
class BcCovarianceSet:
    """Downlink covariances ``D_k`` (``Ns x Ns``); indexable like a list."""

    per_user: list[np.ndarray]
    budget: float
    truncated_users: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.per_user)

    def __getitem__(self, k):
        return self.per_user[k]

    def __iter__(self):
        return iter(self.per_user)

    def total_power(self) -> float:
        return float(sum(np.real(np.trace(d)) for d in self.per_user))


@dataclass
class DualityReport:
    per_user_rate_gap: list[float]
    power_bc: float
    power_mac: float
    max_gap: float
    truncated_users: list[int] = field(default_factory=list)

    @property
    def power_gap(self) -> float:
        return abs(self.power_bc - self.power_mac)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["power_gap"] = self.power_gap
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _assert_pd(M: np.ndarray, name: str):
    lam_min = np.linalg.eigvalsh(hermitize(M))[0]
    if lam_min < PD_TOL:
        raise AssertionError(f"{name} is not positive definite (min eigenvalue {lam_min:.3e})")


def mac_to_bc(H, V, W, Q, rank_tol: float = RANK_TOL) -> BcCovarianceSet:
    """Downlink covariances achieving the same per-user rates as ``Q`` in the MAC.

    For each user ``j``: ``B_j^{-1/2} Ht_j^H A_j^{-1/2} = F_j L_j G_j^H``
    (reduced SVD) and
    ``D_j = B_j^{-1/2} F_j G_j^H A_j^{1/2} Q_j A_j^{1/2} G_j F_j^H B_j^{-1/2}``.
    Users whose covariance has power outside the span of ``G_j`` lose that
    part and are listed in ``truncated_users``.
    """
    K = len(H)
    Ns = V.shape[1]
    D: list[np.ndarray] = []
    truncated = []
    budget = float(sum(np.real(np.trace(q)) for q in Q))
    for j in range(K):
        B = mac_interference_cov(j, H, V, W, Q)
        Ht = W[j].conj().T @ H[j] @ V
        prior = sum(D, np.zeros((Ns, Ns), dtype=complex))
        A = hermitize(W[j].conj().T @ W[j] + Ht @ prior @ Ht.conj().T)
        _assert_pd(B, f"B_{j}")
        _assert_pd(A, f"A_{j}")
        B_mh = psd_power(B, -0.5)
        A_h = psd_power(A, 0.5)
        A_mh = psd_power(A, -0.5)
        Qa = A_h @ Q[j] @ A_h
        svd = reduced_svd(B_mh @ Ht.conj().T @ A_mh, rank_tol) if np.any(Ht) else None
        if svd is None or svd.rank == 0:
            if np.real(np.trace(Q[j])) > rank_tol * max(budget, 1.0):
                truncated.append(j)
            D.append(np.zeros((Ns, Ns), dtype=complex))
            continue
        F, G = svd.left, svd.right
        inner = G.conj().T @ Qa @ G
        if np.real(np.trace(Qa)) - np.real(np.trace(inner)) > 1e-9 * max(np.real(np.trace(Qa)), 1.0):
            truncated.append(j)
        T = B_mh @ F
        D.append(hermitize(T @ inner @ T.conj().T))
    return BcCovarianceSet(D, budget, truncated)


def verify_duality(H, V, W, Q, D) -> DualityReport:
    """Compare per-user BC and MAC rates and transmitted powers."""
    r_mac = mac_user_rates(H, V, W, Q)
    r_bc = bc_user_rates(H, V, W, D)
    gaps = np.abs(r_bc - r_mac)
    p_bc = float(sum(np.real(np.trace(V @ d @ V.conj().T)) for d in D))
    p_mac = float(sum(np.real(np.trace(w @ q @ w.conj().T)) for w, q in zip(W, Q)))
    return DualityReport(
        per_user_rate_gap=[float(g) for g in gaps],
        power_bc=p_bc,
        power_mac=p_mac,
        max_gap=float(gaps.max()) if gaps.size else 0.0,
        truncated_users=list(getattr(D, "truncated_users", [])),
    )

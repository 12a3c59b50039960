"""Alternating sum-rate maximization over (Q_k, V, W_k) in the dual MAC.

The objective is ``1/2 log2 |I + V^H (sum_k H_k^H W_k Q_k W_k^H H_k) V|`` with
``V`` and every ``W_k`` semi-unitary and ``sum_k tr(Q_k) = P``. Each outer
iteration runs three block updates:

1. covariances, by sum-power iterative waterfilling over the effective
   channels ``W_k^H H_k V``;
2. precoder, as the dominant eigenspace of the aggregate uplink signal
   covariance;
3. combiners, by per-user iterative waterfilling over ``H_k V`` restricted to
   ``d`` eigenmodes, then splitting each modified covariance into an
   orthonormal basis (the combiner) and its eigenvalues (the new ``Q_k``).

Every block update is either an exact block maximizer or a safeguarded ascent
step, so the objective never decreases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .kernels import RANK_TOL, hermitian_eig, hermitize, pseudo_inverse, psd_power, reduced_svd, waterfill
from .rates import HALF, SystemDims, mac_sum_rate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    max_outer_iters: int = 50
    objective_tol: float = 1e-6
    inner_waterfill_iters: int = 100
    rank_tol: float = RANK_TOL
    seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.inner_waterfill_iters < 1:
            raise InvalidInputError("iteration counts must be positive")
        if not (self.objective_tol > 0 and self.rank_tol > 0):
            raise InvalidInputError("tolerances must be positive")


@dataclass
class SolveTrace:
    """Objective after the initial point and after every block update.

    ``outer_objective[i]`` is the objective at the end of outer iteration ``i``
    (index 0 is the starting point).
    """

    objective_per_iter: list[float] = field(default_factory=list)
    outer_objective: list[float] = field(default_factory=list)
    converged: bool = False
    iters_used: int = 0
    duality_gap: float = float("nan")

    def max_decrease(self) -> float:
        obj = np.asarray(self.objective_per_iter)
        if obj.size < 2:
            return 0.0
        return float(max(0.0, -np.min(np.diff(obj))))


class Solution(NamedTuple):
    V: np.ndarray
    W: list[np.ndarray]
    Q: list[np.ndarray]
    trace: SolveTrace


def objective(H, V, W, Q) -> float:
    return mac_sum_rate(H, V, W, Q)


def _logdet_I_plus(X: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(hermitize(X))
    return float(np.sum(np.log2(1.0 + np.clip(lam, 0.0, None))))


def _mac_value(G: Sequence[np.ndarray], Q: Sequence[np.ndarray]) -> float:
    n = G[0].shape[0]
    Z = np.zeros((n, n), dtype=complex)
    for g, q in zip(G, Q):
        Z += g @ q @ g.conj().T
    return HALF * _logdet_I_plus(Z)


def _noise_plus_interference(G, Q, k) -> np.ndarray:
    n = G[0].shape[0]
    Z = np.eye(n, dtype=complex)
    for j, (g, q) in enumerate(zip(G, Q)):
        if j != k:
            Z += g @ q @ g.conj().T
    return hermitize(Z)


def _whitened_modes(G, Q, k, rank_tol):
    """Singular values and input directions of user ``k``'s whitened channel."""
    Nk = _noise_plus_interference(G, Q, k)
    svd = reduced_svd(psd_power(Nk, -0.5) @ G[k], rank_tol) if np.any(G[k]) else None
    if svd is None or svd.rank == 0:
        return np.zeros(0), np.zeros((G[k].shape[1], 0), dtype=complex)
    return svd.singular_values, svd.right


def sum_power_iwf(G, P: float, Q0, iters: int = 100, rank_tol: float = RANK_TOL, tol: float = 1e-13):
    """Sum-power iterative waterfilling for a MAC ``y = sum_k G_k u_k + n``.

    Maximizes ``1/2 log2 |I + sum_k G_k Q_k G_k^H|`` subject to
    ``sum_k tr(Q_k) = P``, starting from the feasible point ``Q0``. Each
    iteration waterfills all users jointly against the current interference
    over the pooled set of whitened eigenmodes, then moves toward that target
    with the best of a few convex-combination steps (``1``, ``1/K``, ...).
    A step is only taken if it does not lower the objective.

    Returns ``(Q, value, degenerate)``; ``degenerate`` is True when every
    effective channel is zero, in which case all covariances are zero.
    """
    K = len(G)
    Q = [hermitize(np.asarray(q, dtype=complex)) for q in Q0]
    if not any(np.any(g) for g in G):
        return [np.zeros_like(q) for q in Q], 0.0, True
    value = _mac_value(G, Q)
    steps = [1.0, 1.0 / K] + [1.0 / (K * 2**i) for i in range(1, 6)]
    for _ in range(iters):
        modes = [_whitened_modes(G, Q, k, rank_tol) for k in range(K)]
        pooled = np.concatenate([s**2 for s, _ in modes])
        if pooled.size == 0:
            break
        p = waterfill(pooled, P)
        target, at = [], 0
        for s, U in modes:
            pk = p[at : at + s.size]
            at += s.size
            target.append((U * pk) @ U.conj().T)
        best_val, best_Q = value, None
        for t in dict.fromkeys(steps):
            cand = [hermitize((1 - t) * q + t * qt) for q, qt in zip(Q, target)]
            val = _mac_value(G, cand)
            if val > best_val:
                best_val, best_Q = val, cand
            if t <= 1.0 / K and best_Q is not None:
                break
        if best_Q is None:
            break
        gain = best_val - value
        Q, value = best_Q, best_val
        if gain <= tol * max(1.0, abs(value)):
            break
    return Q, value, False


def cyclic_iwf(G, powers, factors, rank_cap: int, iters: int = 100, rank_tol: float = RANK_TOL, tol: float = 1e-13):
    """Per-user-power iterative waterfilling with a rank cap on each user.

    ``factors[k] = (U_k, p_k)`` describes the starting covariance
    ``U_k diag(p_k) U_k^H``. Each user in turn gets the exact best response:
    waterfilling of ``powers[k]`` over the ``rank_cap`` strongest eigenmodes of
    its whitened channel. Returns updated factors and the final value.
    """
    K = len(G)
    factors = list(factors)

    def cov(k):
        U, p = factors[k]
        return (U * p) @ U.conj().T

    value = _mac_value(G, [cov(k) for k in range(K)])
    for _ in range(iters):
        prev = value
        for k in range(K):
            if powers[k] <= 0:
                continue
            Qs = [cov(j) for j in range(K)]
            s, U = _whitened_modes(G, Qs, k, rank_tol)
            if s.size == 0:
                continue
            s, U = s[:rank_cap], U[:, :rank_cap]
            cand = (U, waterfill(s**2, powers[k]))
            old = factors[k]
            factors[k] = cand
            new_val = _mac_value(G, [cov(j) for j in range(K)])
            if new_val < value:
                # best response cannot lose; guard against roundoff only
                factors[k] = old
            else:
                value = new_val
        if value - prev <= tol * max(1.0, abs(value)):
            break
    return factors, value


def orthonormal_completion(X: np.ndarray, n_cols: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Extend orthonormal columns ``X`` to ``n_cols`` orthonormal columns."""
    n, r = X.shape
    if r >= n_cols:
        return X[:, :n_cols]
    rng = rng or np.random.default_rng(0)
    R = rng.standard_normal((n, n_cols - r)) + 1j * rng.standard_normal((n, n_cols - r))
    R -= X @ (X.conj().T @ R)
    Qr, _ = np.linalg.qr(R)
    # second projection pass for numerical orthogonality
    Qr -= X @ (X.conj().T @ Qr)
    Qr, _ = np.linalg.qr(Qr)
    return np.hstack([X, Qr])


def _effective_mac_channels(H, V, W) -> list[np.ndarray]:
    return [V.conj().T @ H[k].conj().T @ W[k] for k in range(len(H))]


def step1_covariances(H, V, W, P: float, opts: SolveOptions = SolveOptions(), Q0=None):
    """Optimal MAC covariances ``Q_k`` for fixed precoder and combiners.

    Starts from ``Q0`` (uniform ``P/Ns`` when omitted) and never lowers the
    objective relative to it. Returns ``(Q, degenerate)``.
    """
    if P < 0:
        raise InvalidInputError("power budget must be nonnegative")
    K = len(H)
    d = W[0].shape[1]
    if Q0 is None:
        Q0 = [np.eye(d, dtype=complex) * P / (K * d) for _ in range(K)]
    G = _effective_mac_channels(H, V, W)
    Q, _, degenerate = sum_power_iwf(G, P, Q0, opts.inner_waterfill_iters, opts.rank_tol)
    return Q, degenerate


def step2_precoder(H, W, Q, dims: SystemDims, opts: SolveOptions = SolveOptions()) -> np.ndarray:
    """Semi-unitary precoder spanning the dominant eigenspace of the uplink signal.

    With ``S = sum_k H_k^H W_k Q_k W_k^H H_k = G_a diag(lam) G_a^H`` (rank
    ``r_t <= Ns``), returns ``V = (G_a G_a^H)^+ G_a`` padded with further
    orthonormal directions to ``Ns`` columns.
    """
    from .rates import mac_signal_cov

    S = mac_signal_cov(H, W, Q)
    lam, U = hermitian_eig(S)
    if lam[0] <= 0:
        raise DegenerateInputError("uplink signal covariance is zero")
    r_t = min(int(np.count_nonzero(lam > opts.rank_tol * lam[0])), dims.Ns)
    Ga = U[:, :r_t]
    V = pseudo_inverse(Ga @ Ga.conj().T, opts.rank_tol) @ Ga
    if r_t < dims.Ns:
        # Padding carries no power, so any orthonormal completion gives the
        # same objective. Channel-aligned directions let users that were
        # switched off by waterfilling regain power in later iterations.
        T = mac_signal_cov(H, W, [np.eye(w.shape[1]) for w in W])
        proj = np.eye(T.shape[0]) - V @ V.conj().T
        _, Up = hermitian_eig(proj @ T @ proj)
        V, _ = np.linalg.qr(np.hstack([V, Up[:, : dims.Ns - r_t]]))
    return V


def _split_factors(factors, d: int, rng):
    W, Q = [], []
    for U, p in factors:
        U = orthonormal_completion(U, d, rng) if U.shape[1] < d else U
        pk = np.zeros(d)
        pk[: p.size] = p
        W.append(U)
        Q.append(np.diag(pk).astype(complex))
    return W, Q


def step3_combiners(H, V, Q, dims: SystemDims, opts: SolveOptions = SolveOptions(), W0=None):
    """Combiners and diagonal covariances for a fixed precoder.

    Per-user budgets ``P_k = tr(Q_k)`` are kept. The modified covariances
    ``Q~_k = W_k Q_k W_k^H`` are optimized by rank-``d`` iterative waterfilling
    over ``C_k = H_k V``, starting from the current ``W0``/``Q``; each is then
    returned as ``W_k`` (its orthonormal eigenvectors) and ``Q_k`` (its
    eigenvalues), so ``W_k^H W_k = I`` exactly.
    """
    K, d, M = len(H), dims.d, dims.M
    powers = [float(np.real(np.trace(q))) for q in Q]
    if W0 is None:
        W0 = [np.eye(M, d, dtype=complex) for _ in range(K)]
    factors = []
    for k in range(K):
        lam, U = hermitian_eig(W0[k] @ Q[k] @ W0[k].conj().T)
        factors.append((U[:, :d], np.clip(lam[:d], 0.0, None)))
    G = [V.conj().T @ H[k].conj().T for k in range(K)]
    rng = np.random.default_rng(opts.seed)
    factors, _ = cyclic_iwf(G, powers, factors, d, opts.inner_waterfill_iters, opts.rank_tol)
    W, Qn = [], []
    for k in range(K):
        if powers[k] <= 0:
            # inactive user: any orthonormal W works; match it to H_k V
            u, _, _ = np.linalg.svd(H[k] @ V, full_matrices=True)
            W.append(u[:, :d])
            Qn.append(np.zeros((d, d), dtype=complex))
            continue
        Wk, Qk = _split_factors([factors[k]], d, rng)
        W.append(Wk[0])
        Qn.append(Qk[0])
    return W, Qn


def step3_combiners_fixed_cov(H, V, W, Q, dims: SystemDims, opts: SolveOptions = SolveOptions()):
    """Best combiners for frozen covariances ``Q_k = c I`` (cyclic over users).

    For ``Q_k`` proportional to the identity, user ``k``'s best response is the
    top-``d`` eigenvectors of ``C_k N_k^{-1} C_k^H`` with ``N_k`` its
    noise-plus-interference covariance in the MAC.
    """
    K, d = len(H), dims.d
    W = list(W)
    C = [H[k] @ V for k in range(K)]
    G = [c.conj().T for c in C]
    value = objective(H, V, W, Q)
    for _ in range(opts.inner_waterfill_iters):
        prev = value
        for k in range(K):
            Gw = [G[j] @ W[j] for j in range(K)]
            Nk = _noise_plus_interference(Gw, Q, k)
            T = C[k] @ np.linalg.solve(Nk, C[k].conj().T)
            _, U = hermitian_eig(T)
            old = W[k]
            W[k] = U[:, :d]
            new_val = objective(H, V, W, Q)
            if new_val < value:
                W[k] = old
            else:
                value = new_val
        if value - prev <= 1e-13 * max(1.0, abs(value)):
            break
    return W


def initialize(H, dims: SystemDims, P: float):
    """Channel-aligned start: V from the stacked channel, W_k from H_k V, uniform Q."""
    K, d, Ns = len(H), dims.d, dims.Ns
    stacked = np.vstack([H[k] for k in range(K)])
    _, _, vh = np.linalg.svd(stacked, full_matrices=True)
    V = vh[:Ns].conj().T
    W = []
    for k in range(K):
        u, _, _ = np.linalg.svd(H[k] @ V, full_matrices=True)
        W.append(u[:, :d])
    Q = [np.eye(d, dtype=complex) * (P / Ns) for _ in range(K)]
    return V, W, Q


def solve(H, dims: SystemDims, P: float, opts: SolveOptions = SolveOptions(), fixed_covariance: bool = False,
          check_duality: bool = True) -> Solution:
    """Run the alternating maximizer until the relative objective change stalls.

    With ``fixed_covariance=True`` the covariances stay at ``(P/Ns) I`` and
    only the precoder and combiners are updated (identity-covariance design).
    Non-convergence is reported in the trace, not raised.
    """
    if not P > 0:
        raise InvalidInputError("power budget must be positive")
    if len(H) != dims.K or H[0].shape != (dims.M, dims.N):
        raise InvalidInputError("channel shape does not match dims")
    V, W, Q = initialize(H, dims, P)
    trace = SolveTrace()
    f = objective(H, V, W, Q)
    trace.objective_per_iter.append(f)
    trace.outer_objective.append(f)

    for it in range(opts.max_outer_iters):
        f_prev = f
        if not fixed_covariance:
            Q, degenerate = step1_covariances(H, V, W, P, opts, Q0=Q)
            if degenerate:
                log.warning("all effective channels vanished; stopping")
                trace.objective_per_iter.append(objective(H, V, W, Q))
                break
            trace.objective_per_iter.append(objective(H, V, W, Q))
        V = step2_precoder(H, W, Q, dims, opts)
        trace.objective_per_iter.append(objective(H, V, W, Q))
        if fixed_covariance:
            W = step3_combiners_fixed_cov(H, V, W, Q, dims, opts)
        else:
            W, Q = step3_combiners(H, V, Q, dims, opts, W0=W)
        f = objective(H, V, W, Q)
        trace.objective_per_iter.append(f)
        trace.outer_objective.append(f)
        trace.iters_used = it + 1
        if abs(f - f_prev) <= opts.objective_tol * max(abs(f_prev), np.finfo(float).tiny):
            trace.converged = True
            break

    if check_duality:
        from .duality import mac_to_bc, verify_duality

        D = mac_to_bc(H, V, W, Q)
        trace.duality_gap = verify_duality(H, V, W, Q, D).max_gap
    return Solution(V, W, Q, trace)

"""Random test instances and the acceptance summary log."""

import numpy as np

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list = []


def random_semi_unitary(rng, n, k):
    X = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    Q, _ = np.linalg.qr(X)
    return Q


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return X @ X.conj().T


def random_instance(rng, K, N, M, d, P=1.0):
    """Gaussian channels, random semi-unitary V/W_k, random Q_k with total power P."""
    H = [rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N)) for _ in range(K)]
    V = random_semi_unitary(rng, N, K * d)
    W = [random_semi_unitary(rng, M, d) for _ in range(K)]
    Q = [random_psd(rng, d) for _ in range(K)]
    total = sum(np.trace(q).real for q in Q)
    Q = [q * P / total for q in Q]
    return H, V, W, Q

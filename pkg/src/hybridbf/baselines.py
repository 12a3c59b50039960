"""Reference schemes: identity-covariance hybrid design and digital capacity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .kernels import waterfill
from .optimizer import SolveOptions, solve, sum_power_iwf
from .rates import HALF, SystemDims


@dataclass
class BaselineResult:
    name: str
    sum_rate: float
    details: dict = field(default_factory=dict)


def identity_covariance_rate(H, dims: SystemDims, P: float, opts: SolveOptions = SolveOptions()) -> BaselineResult:
    """Hybrid design with covariances frozen at ``(P/Ns) I``.

    Precoder and combiners are alternated with the same updates and stopping
    rule as the proposed solver; only the covariance step is skipped.
    """
    if P < 0:
        raise InvalidInputError("power budget must be nonnegative")
    if P == 0:
        return BaselineResult("identity_cov", 0.0, {"iters_used": 0})
    sol = solve(H, dims, P, opts, fixed_covariance=True, check_duality=False)
    rate = sol.trace.outer_objective[-1]
    return BaselineResult("identity_cov", rate, {"iters_used": sol.trace.iters_used, "converged": sol.trace.converged})


def point_to_point_capacity(H: np.ndarray, P: float, streams: int | None = None) -> float:
    """``1/2 log2 |I + H Q H^H|`` with waterfilling over the squared singular values.

    ``streams`` restricts the allocation to the strongest ``streams`` modes.
    """
    g = np.linalg.svd(H, compute_uv=False) ** 2
    if streams is not None:
        g = g[:streams]
    if P == 0 or not np.any(g > 0):
        return 0.0
    p = waterfill(g, P)
    return float(HALF * np.sum(np.log2(1.0 + g * p)))


def mac_sum_capacity(H, P: float, iters: int = 5000, tol: float = 1e-14) -> float:
    """Sum capacity of the fully digital MAC ``y = sum_k H_k^H u_k + n``.

    Unconstrained ``M x M`` user covariances under one sum-power budget,
    solved by sum-power iterative waterfilling.
    """
    if P == 0:
        return 0.0
    K = len(H)
    M = H[0].shape[0]
    G = [H[k].conj().T for k in range(K)]
    Q0 = [np.eye(M, dtype=complex) * P / (K * M) for _ in range(K)]
    _, value, _ = sum_power_iwf(G, P, Q0, iters=iters, tol=tol)
    return float(value)


def fully_digital_capacity(H, P: float, mode: str = "mac_sum_capacity", streams: int | None = None) -> BaselineResult:
    """Fully digital capacity oracle: ``point_to_point`` (K=1) or ``mac_sum_capacity``."""
    if P < 0:
        raise InvalidInputError("power budget must be nonnegative")
    if mode == "point_to_point":
        if len(H) != 1:
            raise InvalidInputError("point_to_point mode needs exactly one user")
        rate = point_to_point_capacity(H[0], P, streams)
    elif mode == "mac_sum_capacity":
        if streams is not None:
            raise InvalidInputError("stream limit only applies to point_to_point mode")
        rate = mac_sum_capacity(H, P)
    else:
        raise InvalidInputError(f"unknown capacity mode {mode!r}")
    return BaselineResult("fully_digital", rate, {"mode": mode, "streams": streams})

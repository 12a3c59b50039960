"""Constant-modulus analog times digital factorization of beamformers.

Any ``N x Ns`` matrix ``X`` can be written exactly as ``X_RF @ X_D`` with
unit-modulus ``X_RF`` once there are at least ``2 Ns`` RF chains: every entry
``r e^{j phi}`` is the sum of two unit phasors scaled by a common ``c0``,
``c0 e^{j(phi + delta)} + c0 e^{j(phi - delta)}`` with
``cos(delta) = r / (2 c0)``. Stream ``c`` uses RF chains ``2c`` and ``2c+1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidInputError
from .kernels import as_matrix
from .rates import mac_sum_rate

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class HybridFactor:
    """Analog part stored as phases (radians) so ``|analog| == 1`` exactly."""

    analog_phases: np.ndarray
    digital: np.ndarray
    reconstruction_error: float

    @property
    def analog(self) -> np.ndarray:
        return np.exp(1j * self.analog_phases)

    @property
    def n_rf(self) -> int:
        return self.analog_phases.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.analog @ self.digital

    def to_dict(self) -> dict:
        return {
            "analog_phases": self.analog_phases.tolist(),
            "digital": np.stack([self.digital.real, self.digital.imag], axis=-1).tolist(),
            "reconstruction_error": self.reconstruction_error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "HybridFactor":
        dig = np.asarray(d["digital"], dtype=float)
        return cls(np.asarray(d["analog_phases"], dtype=float), dig[..., 0] + 1j * dig[..., 1],
                   float(d["reconstruction_error"]))


def factor(V, n_rf: int) -> HybridFactor:
    """Exact two-phases-per-entry factorization ``V = V_RF V_D``.

    Raises :class:`InfeasibleError` when ``n_rf < 2 * Ns``. Surplus RF chains
    get zero-phase analog columns and all-zero digital rows.
    """
    V = as_matrix(V, "V")
    N, Ns = V.shape
    if n_rf < 2 * Ns:
        raise InfeasibleError(f"need at least {2 * Ns} RF chains for {Ns} streams, got {n_rf}")
    mag = np.abs(V)
    c0 = mag.max() / 2.0 * (1.0 + 1e-12)
    phi = np.angle(V)
    if c0 > 0:
        delta = np.arccos(np.minimum(1.0, mag / (2.0 * c0)))
    else:
        delta = np.full(V.shape, np.pi / 2)
    phases = np.zeros((N, n_rf))
    phases[:, 0 : 2 * Ns : 2] = phi + delta
    phases[:, 1 : 2 * Ns : 2] = phi - delta
    phases = np.mod(phases, TWO_PI)
    digital = np.zeros((n_rf, Ns), dtype=complex)
    cols = np.arange(Ns)
    digital[2 * cols, cols] = c0
    digital[2 * cols + 1, cols] = c0
    err = float(np.linalg.norm(np.exp(1j * phases) @ digital - V))
    return HybridFactor(phases, digital, err)


def quantize_phases(f: HybridFactor, bits: int, V_target) -> HybridFactor:
    """Round analog phases to a ``2**bits``-point grid and refit the digital part.

    The digital matrix is re-solved by unconstrained least squares against
    ``V_target``. Coarser grids are subsets of the ``2**bits`` grid, so the
    roundings at ``1..bits`` bits are all admissible; the best fit among them
    is kept, which makes the error nonincreasing in ``bits``.
    """
    if bits < 1:
        raise InvalidInputError("need at least one phase bit")
    V_target = as_matrix(V_target, "V_target")
    best = None
    for b in range(bits, 0, -1):
        levels = 2**b
        step = TWO_PI / levels
        q = np.mod(np.round(f.analog_phases / step), levels) * step
        A = np.exp(1j * q)
        digital, *_ = np.linalg.lstsq(A, V_target, rcond=None)
        err = float(np.linalg.norm(A @ digital - V_target))
        if best is None or err < best.reconstruction_error:
            best = HybridFactor(q, digital, err)
    return best


def semi_unitary_deviation(X) -> float:
    """``||X^H X - I||_F``."""
    X = np.asarray(X)
    return float(np.linalg.norm(X.conj().T @ X - np.eye(X.shape[1])))


def rate_with_factors(H, f_V: HybridFactor, f_W, Q) -> float:
    """MAC sum rate with the reconstructed ``V_RF V_D`` and ``W_RF,k W_D,k``."""
    V = f_V.reconstruct()
    W = [fw.reconstruct() for fw in f_W]
    return mac_sum_rate(H, V, W, Q)

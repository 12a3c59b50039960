"""
Constant-modulus factorization
==============================

With twice as many RF chains as streams, any precoder splits exactly into
phase shifters and a small digital matrix. Finite-resolution phase shifters
break exactness; the digital part is refit by least squares.
"""

import numpy as np

from hybridbf import SystemDims, factor, quantize_phases, sample_channel, solve
from hybridbf.factorization import rate_with_factors

dims = SystemDims(K=4, N=16, M=4, d=1)
H = sample_channel(dims.K, dims.N, dims.M, L=15, seed=2).per_user
sol = solve(H, dims, 10.0)

fV = factor(sol.V, dims.n_rf_t)
print("analog shape:", fV.analog.shape, " digital shape:", fV.digital.shape)
print("max | |analog| - 1 |:", np.max(np.abs(np.abs(fV.analog) - 1)))
print("reconstruction error:", fV.reconstruction_error)

rate = sol.trace.outer_objective[-1]
fW = [factor(w, dims.n_rf_r) for w in sol.W]
print("rate unfactored %.6f  factored %.6f" % (rate, rate_with_factors(H, fV, fW, sol.Q)))

# resolution sweep of the phase shifters
for bits in (1, 2, 3, 4, 6, 8):
    qV = quantize_phases(fV, bits, sol.V)
    qW = [quantize_phases(f, bits, w) for f, w in zip(fW, sol.W)]
    r = rate_with_factors(H, qV, qW, sol.Q)
    print(f"{bits} bits: ||V_RF V_D - V|| = {qV.reconstruction_error:.3e}, rate {r:.4f}")

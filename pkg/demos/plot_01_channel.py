"""
Geometric mmWave channels
=========================

Each user sees a sum of ``L`` plane waves. With few paths the channel is
low rank, which is what makes a small number of RF chains sufficient.
"""

import numpy as np

from hybridbf.channel import ArrayGeometry, sample_channel, steering_vector

# a half-wavelength ULA response at 30 degrees
a = steering_vector(ArrayGeometry(8, 0.5), np.deg2rad(30))
print("phase step between elements (rad):", np.round(np.angle(a[1] / a[0]), 4))

# rank grows with the number of scatterers, capped by the array sizes
for L in (1, 2, 4, 15):
    H = sample_channel(K=1, N=16, M=4, L=L, seed=0)[0]
    s = np.linalg.svd(H, compute_uv=False)
    print(f"L={L:2d}  singular values: {np.round(s, 2)}")

# same seed, same channel
h1 = sample_channel(2, 16, 4, 15, seed=3)
h2 = sample_channel(2, 16, 4, 15, seed=3)
print("reproducible:", all(np.array_equal(x, y) for x, y in zip(h1, h2)))

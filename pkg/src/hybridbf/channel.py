"""Geometric multipath channel model for uniform linear arrays.

Each user channel is a sum of ``L`` rank-one path terms,
``H_k = sum_l alpha_kl * a_R(theta_arr) a_T(theta_dep)^H``, with no path-loss
or normalisation factor. SNR is set solely through the transmit power.

Randomness comes from numpy's PCG64 bit generator seeded with the integer
seed. Per user, the draw order is: ``L`` departure angles, ``L`` arrival
angles, then ``2L`` uniforms mapped to ``L`` complex gains by Box-Muller.
Gaussians are produced from uniforms explicitly so that the stream depends
only on PCG64, not on numpy's sampler internals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ArrayGeometry:
    n_elements: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.n_elements < 1:
            raise InvalidInputError("array needs at least one element")
        if not self.spacing_over_wavelength > 0:
            raise InvalidInputError("element spacing must be positive")


@dataclass(frozen=True)
class PathSet:
    angles_of_departure: np.ndarray
    angles_of_arrival: np.ndarray
    gains: np.ndarray

    @property
    def count(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class ChannelSet:
    """Per-user ``M x N`` channel matrices plus the paths that built them."""

    per_user: list[np.ndarray]
    path_sets: list[PathSet] = field(default_factory=list)
    seed: int | None = None

    def __post_init__(self):
        if not self.per_user:
            raise InvalidInputError("ChannelSet needs at least one user")
        shape = self.per_user[0].shape
        if any(h.shape != shape for h in self.per_user):
            raise InvalidInputError("all user channels must share one shape")

    @property
    def K(self) -> int:
        return len(self.per_user)

    @property
    def M(self) -> int:
        return self.per_user[0].shape[0]

    @property
    def N(self) -> int:
        return self.per_user[0].shape[1]

    def __len__(self):
        return self.K

    def __iter__(self):
        return iter(self.per_user)

    def __getitem__(self, k):
        return self.per_user[k]

    def to_json(self) -> str:
        """Dump channels as JSON; complex entries become ``[re, im]`` pairs."""
        return json.dumps(
            {
                "K": self.K,
                "M": self.M,
                "N": self.N,
                "seed": self.seed,
                "channels": [_complex_to_pairs(h) for h in self.per_user],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        d = json.loads(text)
        hs = [_pairs_to_complex(c) for c in d["channels"]]
        return cls(hs, [], d.get("seed"))


def _complex_to_pairs(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _pairs_to_complex(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def steering_vector(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """ULA response ``exp(j 2 pi (d/lambda) n sin(theta))``, ``n = 0..N-1``."""
    n = np.arange(geom.n_elements)
    phase = TWO_PI * geom.spacing_over_wavelength * n * np.sin(theta)
    # built from phases so every entry has modulus exactly 1
    return np.exp(1j * phase)


def steering_vector_3d(geom_h: ArrayGeometry, geom_v: ArrayGeometry, theta: float, phi: float) -> np.ndarray:
    """Planar-array response as the Kronecker product of azimuth and elevation ULAs."""
    return np.kron(steering_vector(geom_h, theta), steering_vector(geom_v, phi))


def complex_gaussian(rng: np.random.Generator, size: int) -> np.ndarray:
    """Unit-variance circular complex Gaussians via Box-Muller on PCG64 uniforms."""
    u = rng.random(2 * size)
    u1, u2 = u[0::2], u[1::2]
    # 1 - u keeps the log argument in (0, 1]
    r = np.sqrt(-np.log1p(-u1))
    return r * np.exp(1j * TWO_PI * u2)


def channel_from_paths(paths: PathSet, tx: ArrayGeometry, rx: ArrayGeometry) -> np.ndarray:
    a_r = np.stack([steering_vector(rx, t) for t in paths.angles_of_arrival], axis=1)
    a_t = np.stack([steering_vector(tx, t) for t in paths.angles_of_departure], axis=1)
    return (a_r * paths.gains) @ a_t.conj().T


def sample_paths(rng: np.random.Generator, L: int) -> PathSet:
    aod = TWO_PI * rng.random(L)
    aoa = TWO_PI * rng.random(L)
    gains = complex_gaussian(rng, L)
    return PathSet(aod, aoa, gains)


def sample_channel(
    K: int,
    N: int,
    M: int,
    L: int,
    seed: int,
    spacing_over_wavelength: float = 0.5,
) -> ChannelSet:
    """Draw ``K`` independent ``M x N`` multipath channels from ``seed``."""
    for name, v in (("K", K), ("N", N), ("M", M), ("L", L)):
        if int(v) < 1:
            raise InvalidInputError(f"{name} must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    tx = ArrayGeometry(N, spacing_over_wavelength)
    rx = ArrayGeometry(M, spacing_over_wavelength)
    hs, paths = [], []
    for _ in range(K):
        ps = sample_paths(rng, L)
        paths.append(ps)
        hs.append(channel_from_paths(ps, tx, rx))
    return ChannelSet(hs, paths, seed)

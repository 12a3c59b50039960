"""Capacity-oriented hybrid beamforming for mmWave multi-user MIMO.

Channels come from :mod:`hybridbf.channel`, the alternating sum-rate solver
lives in :mod:`hybridbf.optimizer`, downlink covariances are recovered by
:mod:`hybridbf.duality`, and :mod:`hybridbf.factorization` splits the
resulting beamformers into phase-shifter and digital parts.
"""

from .baselines import fully_digital_capacity, identity_covariance_rate
from .channel import ArrayGeometry, ChannelSet, sample_channel, steering_vector, steering_vector_3d
from .duality import DualityReport, mac_to_bc, verify_duality
from .factorization import HybridFactor, factor, quantize_phases, rate_with_factors
from .optimizer import Solution, SolveOptions, SolveTrace, solve
from .rates import SystemDims, bc_sum_rate, mac_sum_rate

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "ChannelSet",
    "DualityReport",
    "HybridFactor",
    "Solution",
    "SolveOptions",
    "SolveTrace",
    "SystemDims",
    "bc_sum_rate",
    "factor",
    "fully_digital_capacity",
    "identity_covariance_rate",
    "mac_sum_rate",
    "mac_to_bc",
    "quantize_phases",
    "rate_with_factors",
    "sample_channel",
    "solve",
    "steering_vector",
    "steering_vector_3d",
    "verify_duality",
]

"""Brute-force check of the measurement moments, free of closed forms.

The sensor arm and the two detector inefficiencies act on photon number as
beam splitters with vacuum ancillas, i.e. binomial thinning of the joint
number distribution with intensity transmittances ``T_a = |r_sp|^2 eta_a^2``
and ``T_b = eta_b^2``.  This module realises exactly that: build
``P(n, m) = |C_{n,m}|^2``, thin it with explicit binomial kernels, and read
the difference moments off by direct summation.  None of the closed-form
moment expressions from :mod:`plasmonq.metrology` are used here — only its
result/parameter *types* are shared — so agreement between the two modules
is a genuine cross-check, not a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrology import ChannelEfficiencies, DivergenceError, MeasurementStats
from .quantum_states import FockCoefficients, coherent_product

__all__ = [
    "JointNumberDistribution",
    "joint_distribution",
    "binomial_thinning",
    "oracle_measurement",
    "oracle_ratio",
]

# Tighter than the constructor default so the coherent reference inside
# oracle_ratio never limits a 1e-10 comparison.
_REFERENCE_TRUNCATION_TOL = 3e-14


@dataclass(frozen=True)
class JointNumberDistribution:
    """Joint photon-number probabilities on ``k, l in 0..cutoff``.

    ``sum(probs)`` may fall below 1 for truncated states; the deficit is
    exposed as :attr:`leakage`.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"probability matrix must be square, got shape {arr.shape}")
        if np.any(arr < 0.0):
            raise ValueError("probabilities must be non-negative")
        total = float(arr.sum())
        if total > 1.0 + 1e-9:
            raise ValueError(f"probabilities sum to {total} > 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def cutoff(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def leakage(self) -> float:
        return max(0.0, 1.0 - float(self.probs.sum()))


def joint_distribution(state: FockCoefficients) -> JointNumberDistribution:
    """``P(n, m) = |C_{n,m}|^2`` of a two-mode expansion."""
    return JointNumberDistribution(np.abs(state.coeffs) ** 2)


def _thinning_kernel(size: int, transmittance: float) -> np.ndarray:
    """Matrix ``L[k, n] = C(n, k) T^k (1-T)^(n-k)`` (zero above the diagonal)."""
    kernel = np.zeros((size, size))
    for n in range(size):
        for k in range(n + 1):
            kernel[k, n] = (
                math.comb(n, k) * transmittance**k * (1.0 - transmittance) ** (n - k)
            )
    return kernel


def binomial_thinning(
    dist: JointNumberDistribution, t_a: float, t_b: float
) -> JointNumberDistribution:
    """Thin each mode independently with intensity transmittances ``t_a, t_b``."""
    for name, value in (("t_a", t_a), ("t_b", t_b)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    size = dist.cutoff + 1
    kernel_a = _thinning_kernel(size, t_a)
    kernel_b = _thinning_kernel(size, t_b)
    return JointNumberDistribution(kernel_a @ dist.probs @ kernel_b.T)


def oracle_measurement(
    state: FockCoefficients, r_abs: float, eff: ChannelEfficiencies
) -> MeasurementStats:
    """Difference moments by direct summation over the thinned distribution."""
    if not 0.0 <= r_abs <= 1.0:
        raise ValueError(f"r_abs must lie in [0, 1], got {r_abs}")
    thinned = binomial_thinning(
        joint_distribution(state), r_abs**2 * eff.eta_a**2, eff.eta_b**2
    )
    counts = np.arange(thinned.cutoff + 1, dtype=float)
    diff = counts[np.newaxis, :] - counts[:, np.newaxis]  # l - k at (k, l)
    mean = float(np.sum(diff * thinned.probs))
    second = float(np.sum(diff * diff * thinned.probs))
    return MeasurementStats(mean=mean, std=math.sqrt(max(0.0, second - mean * mean)))


def oracle_ratio(
    state: FockCoefficients,
    classical_reference_n: float,
    r_abs: float,
    eta: float,
) -> float:
    """Noise of a coherent reference over the state's noise, both brute-force.

    The reference is a coherent product with per-mode mean
    ``classical_reference_n`` (normally the state's own per-mode mean),
    pushed through the same loss channels.
    """
    eff = ChannelEfficiencies(eta, eta)
    state_std = oracle_measurement(state, r_abs, eff).std
    if state_std == 0.0:
        raise DivergenceError(
            "state noise vanishes at this operating point; ratio diverges"
        )
    reference = coherent_product(
        math.sqrt(classical_reference_n), truncation_tol=_REFERENCE_TRUNCATION_TOL
    )
    return oracle_measurement(reference, r_abs, eff).std / state_std

"""Seedable, cross-platform random number generation for the simulator.

The generator is splitmix64: a named, well-studied 64-bit generator whose
entire state is one integer, which makes stream derivation trivial and
reproducibility auditable. Uniform doubles are ``(x >> 11 + 0.5) * 2^-53``,
strictly inside (0, 1) so inverse-CDF transforms never see an endpoint.

Normal deviates use the Acklam rational approximation of the inverse
normal CDF (relative error < 1.15e-9) rather than rejection or ziggurat
sampling: a fixed closed-form transform consumes exactly one uniform per
deviate, so two implementations of this spec produce identical sequences.

Truncation is by resampling (draw again until above the floor), never by
clamping, which would pile probability mass on the floor and bias means.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1

# Acklam's inverse normal CDF coefficients.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def norm_inv_cdf(p: float) -> float:
    """Inverse standard normal CDF (Acklam's approximation)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


class SplitMix64:
    """splitmix64 with inverse-CDF sampling helpers."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double strictly inside (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * (2.0**-53)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def normal(self, mean: float, sd: float) -> float:
        return mean + sd * norm_inv_cdf(self.random())

    def exponential(self, scale: float) -> float:
        return -scale * math.log(self.random())

    def gamma_int(self, shape: int, scale: float) -> float:
        """Gamma with integer shape, as a sum of exponentials."""
        if shape < 1 or shape != int(shape):
            raise ValueError(f"shape must be a positive integer, got {shape}")
        return sum(self.exponential(scale) for _ in range(int(shape)))

    def truncated(self, draw, floor: float) -> float:
        """Resample ``draw()`` until the value exceeds ``floor``."""
        while True:
            x = draw()
            if x > floor:
                return x


def stream_seed(seed: int, arm_index: int, replication: int = 0) -> int:
    """Derive an independent stream seed: arm index XORed into the seed,
    replication folded into the high half. Arm indexes are small (1, 2),
    so distinct (arm, replication) pairs always map to distinct seeds."""
    return (seed ^ arm_index ^ (replication << 32)) & _MASK64

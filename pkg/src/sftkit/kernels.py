"""Analytic Gaussian, Gaussian-derivative and Morlet kernels, and the O(KN) convolution oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .signal import Signal, extended_range


def default_half_width(sigma: float) -> int:
    return max(1, math.ceil(3.0 * sigma))


@dataclass(frozen=True)
class GaussianParams:
    sigma: float
    K: int | None = None
    gamma: float = field(init=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        K = default_half_width(self.sigma) if self.K is None else int(self.K)
        if K < 1:
            raise ValueError("K must be >= 1")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "gamma", 1.0 / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class MorletParams:
    """Dilated Morlet wavelet with scale ``sigma`` and centre frequency ``xi``."""

    sigma: float
    xi: float
    K: int | None = None
    C_xi: float = field(init=False)
    kappa_xi: float = field(init=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        K = default_half_width(self.sigma) if self.K is None else int(self.K)
        if K < 1:
            raise ValueError("K must be >= 1")
        object.__setattr__(self, "K", K)
        xi2 = self.xi**2
        denom = 1.0 + math.exp(-xi2) - 2.0 * math.exp(-0.75 * xi2)
        object.__setattr__(self, "C_xi", denom**-0.5)
        object.__setattr__(self, "kappa_xi", math.exp(-0.5 * xi2))

    @property
    def gamma(self) -> float:
        return 1.0 / (2.0 * self.sigma**2)

    @property
    def amplitude(self) -> float:
        """Leading factor ``C_xi / (pi**(1/4) sqrt(sigma))``."""
        return self.C_xi / (math.pi**0.25 * math.sqrt(self.sigma))

    @property
    def carrier(self) -> float:
        """Carrier angular frequency in rad/sample."""
        return self.xi / self.sigma

    def gaussian(self) -> GaussianParams:
        return GaussianParams(self.sigma, self.K)


def gauss(params: GaussianParams, n):
    g = params.gamma
    n = np.asarray(n, dtype=np.float64)
    return math.sqrt(g / math.pi) * np.exp(-g * n * n)


def gauss_d(params: GaussianParams, n):
    n = np.asarray(n, dtype=np.float64)
    return (-2.0 * params.gamma * n) * gauss(params, n)


def gauss_dd(params: GaussianParams, n):
    g = params.gamma
    n = np.asarray(n, dtype=np.float64)
    return (4.0 * g * g * n * n - 2.0 * g) * gauss(params, n)


def morlet(params: MorletParams, n):
    n = np.asarray(n, dtype=np.float64)
    envelope = np.exp(-(n * n) / (2.0 * params.sigma**2))
    return params.amplitude * envelope * (np.exp(1j * params.carrier * n) - params.kappa_xi)


def sample_kernel(fn, params, K: int | None = None) -> np.ndarray:
    """Evaluate ``fn(params, k)`` for ``k`` in ``[-K, K]``."""
    K = params.K if K is None else K
    return fn(params, np.arange(-K, K + 1))


def truncated_convolution(sig: Signal, kernel, k_min: int | None = None) -> np.ndarray:
    """Direct ``out[n] = sum_k kernel[k] x[n - k]`` with boundary-extended input.

    ``kernel[j]`` holds the tap for ``k = k_min + j``; by default the kernel
    is centred, i.e. ``k_min = -(len(kernel) - 1) // 2``. Cost is O(len(kernel) N).
    """
    kernel = np.asarray(kernel)
    L = kernel.size
    if L < 1:
        raise ValueError("empty kernel")
    if k_min is None:
        k_min = -((L - 1) // 2)
    k_max = k_min + L - 1
    N = len(sig)
    ext = extended_range(sig, -k_max, N - k_min)
    return np.convolve(ext, kernel, mode="valid")

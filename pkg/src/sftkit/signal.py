"""Signals, boundary extension, precision selection and test-signal generators."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Number of chirp sweeps over the signal length: phase 2*pi*F*(n/N)**2.
CHIRP_CYCLES = 8.0


class BoundaryPolicy(enum.Enum):
    ZERO = "zero"
    CLAMP = "clamp"


class Precision(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"

    @property
    def real_dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self is Precision.SINGLE else np.float64)

    @property
    def complex_dtype(self) -> np.dtype:
        return np.dtype(np.complex64 if self is Precision.SINGLE else np.complex128)


class TestSignal(enum.Enum):
    __test__ = False  # keep pytest from collecting this enum

    IMPULSE = "impulse"
    CONSTANT = "constant"
    CHIRP = "chirp"
    SEEDED_NOISE = "noise"


@dataclass(frozen=True)
class Signal:
    """A finite real signal together with the rule used to read outside it.

    ``samples`` is stored as a read-only float64 array.
    """

    samples: np.ndarray
    boundary: BoundaryPolicy = BoundaryPolicy.CLAMP

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).ravel()
        if arr.size < 1:
            raise ValueError("a signal needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.boundary is other.boundary and np.array_equal(self.samples, other.samples)

    def __hash__(self):
        return hash((self.boundary, self.samples.tobytes()))

    def with_samples(self, samples) -> Signal:
        return Signal(samples, self.boundary)


def extended_sample(sig: Signal, n: int) -> float:
    """Sample ``n`` of ``sig``, resolving out-of-range indices by its boundary policy."""
    N = len(sig)
    if 0 <= n < N:
        return float(sig.samples[n])
    if sig.boundary is BoundaryPolicy.ZERO:
        return 0.0
    return float(sig.samples[0] if n < 0 else sig.samples[N - 1])


def extended_range(sig: Signal, lo: int, hi: int) -> np.ndarray:
    """Boundary-resolved samples for the index range ``[lo, hi)`` as float64."""
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi})")
    N = len(sig)
    idx = np.arange(lo, hi)
    if sig.boundary is BoundaryPolicy.CLAMP:
        return sig.samples[np.clip(idx, 0, N - 1)]
    out = np.zeros(hi - lo)
    inside = (idx >= 0) & (idx < N)
    out[inside] = sig.samples[idx[inside]]
    return out


def make_test_signal(
    kind: TestSignal | str,
    N: int,
    seed: int = 0,
    boundary: BoundaryPolicy = BoundaryPolicy.CLAMP,
) -> Signal:
    """Deterministic generator for the standard test inputs.

    Impulse puts a one at ``N // 2``; the chirp is ``sin(2*pi*F*n**2/N**2)``
    with ``F = CHIRP_CYCLES``; seeded noise is uniform on ``[-1, 1]`` from
    numpy's PCG64 stream for ``seed``.
    """
    kind = TestSignal(kind)
    if N < 1:
        raise ValueError("N must be at least 1")
    if kind is TestSignal.IMPULSE:
        x = np.zeros(N)
        x[N // 2] = 1.0
    elif kind is TestSignal.CONSTANT:
        x = np.ones(N)
    elif kind is TestSignal.CHIRP:
        n = np.arange(N, dtype=np.float64)
        x = np.sin(2.0 * np.pi * CHIRP_CYCLES * n**2 / float(N) ** 2)
    else:
        x = np.random.default_rng(seed).uniform(-1.0, 1.0, N)
    return Signal(x, boundary)

"""Log-depth sliding sums on a simulated bulk-synchronous machine.

``h[n] = sum_{k=0}^{L-1} f[n + k]`` is built by pairwise doubling: round ``r``
forms sums of ``2^{r+1}`` consecutive samples and, when bit ``r`` of ``L`` is
set, prepends the current ``2^r``-block to the partial window sum. Two
variants are provided:

* ``flat``     - one doubling round per bit of ``L`` over the whole array.
* ``blocked8`` - the array is laid out in 2D; each (16, 8) tile performs
  three doubling rounds "in shared memory", then writes back transposed so
  that elements ``8^j`` apart become neighbours for the next stage.

Each round is executed by a worker pool over disjoint output ranges; inputs
of a round are never written during it (double buffering), so results do
not depend on the number of workers or on scheduling.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .sft_engine import SftConfig, _phases
from .signal import Signal, extended_range

TILE = (16, 8)


def bit(m: int, r: int) -> int:
    """``floor(m / 2^r) mod 2``: bit ``r`` of ``m`` (bit 0 least significant)."""
    if m < 0 or r < 0:
        raise ValueError("bit() takes non-negative integers")
    return (m >> r) & 1


def rounds_for(L: int) -> int:
    """``R`` with ``2^(R-1) <= L < 2^R``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return L.bit_length()


def base8_digits(L: int) -> int:
    n = 0
    while L > 0:
        L //= 8
        n += 1
    return n


def padded_length(N: int) -> int:
    """Smallest power of eight that is ``>= N``."""
    n8 = 1
    while n8 < N:
        n8 *= 8
    return n8


class Variant(enum.Enum):
    FLAT = "flat"
    BLOCKED8 = "blocked8"


@dataclass(frozen=True)
class SlidingSumPlan:
    N: int
    L: int
    variant: Variant = Variant.FLAT
    M: int = 10496
    block_shape: tuple[int, int] = TILE

    def __post_init__(self):
        if not 1 <= self.L <= self.N:
            raise ValueError(f"need 1 <= L <= N, got L={self.L}, N={self.N}")
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def R(self) -> int:
        return rounds_for(self.L)

    @property
    def N8(self) -> int:
        return padded_length(self.N)

    @property
    def stages(self) -> int:
        return base8_digits(self.L)

    @property
    def layout_length(self) -> int:
        # L == N == 8^x needs one more base-8 digit than the padded layout holds
        n8 = self.N8
        return n8 * 8 if self.stages > round(math.log(n8, 8)) else n8


@dataclass
class RoundRecord:
    stage: int
    r: int
    bit: int
    span: tuple[int, int]
    adds: int
    g: np.ndarray | None = None
    h: np.ndarray | None = None


@dataclass
class RoundTrace:
    variant: Variant
    L: int
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def total_adds(self) -> int:
        return sum(rec.adds for rec in self.rounds)

    def __len__(self) -> int:
        return len(self.rounds)

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["round", "stage", "r", "bit", "span_lo", "span_hi", "adds"])
            for i, rec in enumerate(self.rounds):
                w.writerow([i, rec.stage, rec.r, rec.bit, rec.span[0], rec.span[1], rec.adds])
        finally:
            if own:
                fh.close()


class BspPool:
    """Runs a round as independent tasks over index chunks, then waits (the barrier)."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers
        self._ex = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def run(self, task, n_items: int) -> None:
        if self._ex is None or n_items < 2:
            task(0, n_items)
            return
        edges = np.linspace(0, n_items, min(self.workers, n_items) + 1).astype(int)
        futures = [self._ex.submit(task, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        for fut in futures:
            fut.result()

    def close(self):
        if self._ex is not None:
            self._ex.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _check(f, L):
    f = np.asarray(f)
    if f.ndim != 1:
        raise ValueError("f must be one-dimensional")
    N = f.size
    if not 1 <= L <= N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={N}")
    return f, N


def sliding_sum_flat(f, L: int, workers: int = 1, keep_snapshots: bool = False, return_trace: bool = False):
    """Window sums of length ``L`` by ``R`` doubling rounds; returns ``N - L + 1`` values."""
    f, N = _check(f, L)
    R = rounds_for(L)
    g = f.copy()
    h = np.zeros_like(f)
    trace = RoundTrace(Variant.FLAT, L)
    with BspPool(workers) as pool:
        for r in range(R):
            step = 1 << r
            active = max(N - step, 0)
            b = bit(L, r)
            g_next = g.copy()
            h_next = h.copy()

            def task(lo, hi, g=g, h=h, g_next=g_next, h_next=h_next, step=step, active=active, b=b):
                hi = min(hi, active)
                if hi <= lo:
                    return
                if b:
                    h_next[lo:hi] = g[lo:hi] + h[lo + step : hi + step]
                g_next[lo:hi] = g[lo:hi] + g[lo + step : hi + step]

            pool.run(task, N)
            # tail n >= N - 2^r reads zeros beyond the array
            if b:
                h_next[active:] = g[active:]
            g, h = g_next, h_next
            trace.rounds.append(
                RoundRecord(0, r, b, (0, active), active * (1 + b), g.copy() if keep_snapshots else None,
                            h.copy() if keep_snapshots else None)
            )
    out = h[: N - L + 1].copy()
    return (out, trace) if return_trace else out


def rearrange8(layout: np.ndarray) -> np.ndarray:
    """Pure data movement of one tile write-back stage.

    ``layout`` has shape ``(D, W)``; element ``[64 xB + x + 8 y][yB]`` (``x, y < 8``)
    moves to ``[y + 8 xB][x + 8 yB]`` of a ``(D // 8, 8 W)`` array. Starting
    from ``f`` as a ``(N8, 1)`` column, one stage puts ``f[n]`` at
    ``[n // 8][n % 8]``: consecutive runs of eight become columns and
    elements eight apart become neighbours along the first index.
    """
    D, W = layout.shape
    nB = -(-D // 64)
    src = np.zeros((nB * 64, W), dtype=layout.dtype)
    src[:D] = layout
    # [xB, y, x, yB]
    blk = src.reshape(nB, 8, 8, W)
    out = np.transpose(blk, (0, 1, 3, 2)).reshape(nB * 8, 8 * W)
    return out[: D // 8].copy()


def _sssg(g1, h1, L, pool: BspPool):
    """One shared-memory stage: three doubling rounds per (16, 8) tile, transposed write-back.

    Tile row ``y_T`` of block ``x_B`` holds elements ``64 x_B + 8 y_T + x_T``
    for ``x_T < 16``; the upper half (``x_T >= 8``) is the look-ahead the
    eight outputs of the row need, read from the next row or block.
    """
    D, W = g1.shape
    nB = -(-D // 64)
    pad = nB * 64 + 8
    gp = np.zeros((pad, W), dtype=g1.dtype)
    hp = np.zeros((pad, W), dtype=h1.dtype)
    gp[:D] = g1
    hp[:D] = h1
    Dn = D // 8
    g2 = np.zeros((Dn, 8 * W), dtype=g1.dtype)
    h2 = np.zeros((Dn, 8 * W), dtype=h1.dtype)
    xT = np.arange(16)
    yT = np.arange(8)
    adds = [0, 0, 0]

    def task(b0, b1):
        xb = np.arange(b0, b1)
        idx = 64 * xb[:, None, None] + 8 * yT[None, :, None] + xT[None, None, :]
        s = gp[idx]  # [block, yT, xT, yB]
        t = hp[idx]
        for r in range(3):
            step = 1 << r
            lim = 16 - step
            s_new = s.copy()
            if bit(L, r):
                t_new = t.copy()
                t_new[:, :, :lim] = s[:, :, :lim] + t[:, :, step:]
                t = t_new
            s_new[:, :, :lim] = s[:, :, :lim] + s[:, :, step:]
            s = s_new
        # write back rows y + 8 xB, columns x + 8 yB for x, y < 8
        sv = np.transpose(s[:, :, :8, :], (0, 1, 3, 2)).reshape(len(xb) * 8, 8 * W)
        tv = np.transpose(t[:, :, :8, :], (0, 1, 3, 2)).reshape(len(xb) * 8, 8 * W)
        lo = b0 * 8
        hi = min(b1 * 8, Dn)
        if hi > lo:
            g2[lo:hi] = sv[: hi - lo]
            h2[lo:hi] = tv[: hi - lo]

    pool.run(task, nB)
    lanes = nB * 8 * W
    for r in range(3):
        lim = 16 - (1 << r)
        adds[r] = lanes * lim * (1 + bit(L, r))
    return g2, h2, adds


def sliding_sum_blocked8(f, L: int, workers: int = 1, keep_snapshots: bool = False):
    """Blocked base-8 sliding sum; returns ``(h, trace)`` with ``N - L + 1`` values in ``h``.

    Driver: clear the work arrays, load ``f`` into column 0, then while
    ``L > 0`` run a tile stage on the low three bits of ``L`` and shift ``L``
    right by three; finally undo the accumulated layout permutation.
    """
    f, N = _check(f, L)
    plan = SlidingSumPlan(N, L, Variant.BLOCKED8)
    total = plan.layout_length
    g1 = np.zeros((total, 1), dtype=f.dtype)
    h1 = np.zeros((total, 1), dtype=f.dtype)
    pos = np.full((total, 1), -1, dtype=np.int64)
    g1[:N, 0] = f
    pos[:, 0] = np.arange(total)
    trace = RoundTrace(Variant.BLOCKED8, L)
    rem = L
    stage = 0
    with BspPool(workers) as pool:
        while rem > 0:
            g1, h1, adds = _sssg(g1, h1, rem, pool)
            pos = rearrange8(pos)
            span = (0, g1.shape[0] * 8)
            for r in range(3):
                trace.rounds.append(
                    RoundRecord(stage, r, bit(rem, r), span, adds[r], g1.copy() if keep_snapshots else None,
                                h1.copy() if keep_snapshots else None)
                )
            rem //= 8
            stage += 1
    out = np.zeros(total, dtype=f.dtype)
    out[pos.ravel()] = h1.ravel()
    return out[: N - L + 1].copy(), trace


def sliding_sum(f, L: int, variant: Variant | str = Variant.FLAT, workers: int = 1) -> np.ndarray:
    variant = Variant(variant)
    if variant is Variant.FLAT:
        return sliding_sum_flat(f, L, workers)
    return sliding_sum_blocked8(f, L, workers)[0]


def brute_force_sliding_sum(f, L: int) -> np.ndarray:
    f = np.asarray(f)
    return np.array([f[n : n + L].sum() for n in range(f.size - L + 1)], dtype=f.dtype)


# ----------------------------------------------------------------------------
# cost model


@dataclass
class CostReport:
    parallel_steps: int
    total_adds: int
    total_mults: int
    predicted_regime: str


def cost_model(plan: SlidingSumPlan) -> CostReport:
    """Exact operation counts of one sliding sum and its depth on ``M`` cores."""
    N, L = plan.N, plan.L
    if plan.variant is Variant.FLAT:
        steps = plan.R
        adds = sum(max(N - (1 << r), 0) * (1 + bit(L, r)) for r in range(plan.R))
    else:
        steps = 3 * plan.stages
        _, trace = sliding_sum_blocked8(np.zeros(N, dtype=np.int64), L)
        adds = trace.total_adds
    if plan.M >= N:
        regime = "M >= N: depth O(log2 L), independent of N"
    else:
        regime = "M < N: time O(N log2 L / M)"
    return CostReport(steps, int(adds), 0, regime)


@dataclass
class MethodCost:
    method: str
    N: int
    sigma: float
    P: int
    mults: int
    adds: int
    depth: int
    regime: str


def method_cost(method: str, N: int, sigma: float, P: int = 6, M: int = 10496, K: int | None = None) -> MethodCost:
    """Operation counts of a whole transform.

    ``truncated``: ``N (6 sigma + 1)`` multiplies and adds, reduction depth
    ``ceil(log2(6 sigma + 1))``. ``sft``: ``7 N P`` multiplies and ``6 N P``
    adds (running sum, window difference and recombination per order), with
    sliding-sum depth ``R`` per order when run in parallel.
    """
    if method == "truncated":
        taps = int(6 * sigma) + 1
        work = N * taps
        depth = math.ceil(math.log2(taps))
        if M >= work:
            regime = "M >= N(6 sigma + 1): O(log2 sigma)"
        else:
            regime = "M < N(6 sigma + 1): O(N sigma / M)"
        return MethodCost(method, N, sigma, P, work, work, depth, regime)
    if method == "sft":
        K = K if K is not None else math.ceil(3 * sigma)
        L = 2 * K + 1
        depth = P * rounds_for(L)
        regime = "M > N: O(P log2 K)" if M > N else "M <= N: O(N P log2 K / M)"
        return MethodCost(method, N, sigma, P, 7 * N * P, 6 * N * P, depth, regime)
    raise ValueError(f"unknown method {method!r}")


# ----------------------------------------------------------------------------
# SFT through the sliding sum


def sft_via_sliding_sum(
    sig: Signal,
    cfg: SftConfig,
    start: int = 0,
    count: int | None = None,
    variant: Variant | str = Variant.FLAT,
    workers: int = 1,
):
    """``(c, s)`` with the window sums of ``x[m] exp((-alpha + i omega) m)`` done by the sliding sum.

    Each output only ever sums its own ``2K + 1`` terms, so reduced-precision
    error does not build up along the signal.
    """
    N = len(sig)
    count = N - start if count is None else count
    K = cfg.K
    L = 2 * K + 1
    omega = cfg.frequency
    alpha = cfg.alpha
    dt = cfg.precision.real_dtype
    cdt = cfg.precision.complex_dtype
    periodic_K = K if cfg.periodic else None
    chunk = max(4 * K + 2, int(30.0 / alpha)) if alpha > 0 else count
    z = np.empty(count, dtype=cdt)
    for a in range(0, count, max(chunk, 1)):
        b = min(count, a + chunk)
        m0 = start + a - K
        xs = extended_range(sig, m0, start + b + K).astype(dt)
        rel = np.arange(xs.size)
        w = _phases(rel, omega, periodic_K)
        if alpha > 0:
            w = w * np.exp(-alpha * rel)
        f = xs.astype(cdt) * w.astype(cdt)
        window = sliding_sum(f, L, variant, workers)
        t = np.arange(b - a)
        back = _phases(-(t + K), omega, periodic_K)
        if alpha > 0:
            back = back * np.exp(alpha * (t + K))
        z[a:b] = window * back.astype(cdt)
    return z.real.copy(), (-z.imag).copy()


def sliding_sum_components(variant: Variant | str = Variant.FLAT, workers: int = 1):
    """Drop-in for the engine's complex component evaluation, backed by the sliding sum."""

    def z(sig, cfg, start=0, count=None):
        c, s = sft_via_sliding_sum(sig, cfg, start, count, variant, workers)
        return c - 1j * s

    return z

"""Sliding (and attenuated sliding) Fourier transform components.

Every strategy returns the windowed correlation

    z[n] = c[n] - i s[n] = sum_{k=-K}^{K} x[n-k] exp(alpha k) exp(-i omega k)

for a contiguous block of output indices, with ``omega = beta p`` (integer
order) or an arbitrary real frequency. ``alpha = 0`` is the plain SFT.

Strategies
----------
kernel integral
    Prefix sums of ``x[m] exp((-alpha + i omega) m)`` differenced over the
    window, followed by phase removal.
recursive1 / recursive2
    First- and second-order recursive filters, truncated to the window by a
    delayed subtraction. When the wavelength divides ``2K`` the cheaper
    ``2K`` truncation is used, otherwise the general ``2K + 1`` one.

The attenuated filters decay towards *older* samples, whereas ``z`` weights
older samples by ``exp(+alpha k)``. The recursive strategies therefore run the
attenuated recurrences over the time-reversed signal, where they are stable,
and conjugate the result.

Recurrences run in the configured precision end to end; complex state is kept
as explicit (real, imaginary) pairs inside the loops.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .signal import Precision, Signal, extended_range


class Strategy(enum.Enum):
    KERNEL_INTEGRAL = "kernel"
    RECURSIVE1 = "rec1"
    RECURSIVE2 = "rec2"


@dataclass(frozen=True)
class SftConfig:
    """One SFT/ASFT component: window ``[-K, K]``, frequency and attenuation.

    Give either an integer order ``p`` (frequency ``beta p``) or a real
    frequency ``omega`` in rad/sample. ``n0`` records the output shift that
    pairs with ``alpha = 2 gamma n0`` in the Gaussian reconstructions.
    """

    K: int
    p: int | None = 0
    beta: float | None = None
    omega: float | None = None
    alpha: float = 0.0
    n0: int | None = None
    strategy: Strategy = Strategy.KERNEL_INTEGRAL
    precision: Precision = Precision.DOUBLE
    full_window: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        beta = math.pi / self.K if self.beta is None else float(self.beta)
        if not beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "beta", beta)
        if self.omega is not None:
            object.__setattr__(self, "p", None)
            if self.strategy is not Strategy.KERNEL_INTEGRAL:
                raise ValueError("real-frequency components use the kernel-integral strategy only")
        elif self.p is None or self.p < 0:
            raise ValueError("need a non-negative integer order p or a real frequency omega")
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise ValueError("alpha must be a finite non-negative number")
        if self.n0 is not None and self.n0 < 0:
            raise ValueError("n0 must be non-negative")
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "precision", Precision(self.precision))

    @property
    def frequency(self) -> float:
        return float(self.omega) if self.omega is not None else self.beta * self.p

    @property
    def periodic(self) -> bool:
        """True when ``exp(i omega 2K) == 1`` exactly (integer order, ``beta = pi / K``)."""
        return self.omega is None and math.isclose(self.beta * self.K, math.pi, rel_tol=1e-13)

    @property
    def use_2k_truncation(self) -> bool:
        return self.periodic and not self.full_window

    def with_order(self, p: int) -> SftConfig:
        return _replace(self, p=p, omega=None)

    def with_omega(self, omega: float) -> SftConfig:
        return _replace(self, omega=omega, strategy=Strategy.KERNEL_INTEGRAL)


def _replace(cfg: SftConfig, **kw) -> SftConfig:
    return dataclasses.replace(cfg, **kw)


@dataclass
class SftState:
    """Filter and kernel-integral state sequences on the index grid ``origin + i``."""

    origin: int
    u_window: np.ndarray | None = None
    u_window_prefix: np.ndarray | None = None
    v: np.ndarray | None = None
    v_2k: np.ndarray | None = None
    v_2k_direct: np.ndarray | None = None
    v_2k_second: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


# ----------------------------------------------------------------------------
# scalar recurrences (numba); dtype of the inputs fixes the arithmetic width


@numba.njit(cache=True)
def _first_order(x, ar, ai, out_r, out_i):
    """v[m] = (ar + i ai) v[m-1] + x[m], zero initial state."""
    vr = x[0] * 0
    vi = x[0] * 0
    for m in range(x.shape[0]):
        nr = ar * vr - ai * vi + x[m]
        ni = ar * vi + ai * vr
        vr = nr
        vi = ni
        out_r[m] = vr
        out_i[m] = vi


@numba.njit(cache=True)
def _second_order(x, a1, a2, br, bi, out_r, out_i):
    """v[m] = a1 v[m-1] - a2 v[m-2] + x[m] - (br + i bi) x[m-1], zero history."""
    zero = x[0] * 0
    r1 = zero
    r2 = zero
    i1 = zero
    i2 = zero
    xp = zero
    for m in range(x.shape[0]):
        xm = x[m]
        nr = a1 * r1 - a2 * r2 + xm - br * xp
        ni = a1 * i1 - a2 * i2 - bi * xp
        r2 = r1
        r1 = nr
        i2 = i1
        i1 = ni
        xp = xm
        out_r[m] = nr
        out_i[m] = ni


@numba.njit(cache=True)
def _first_order_windowed(x, L, ar, ai, lam, out_r, out_i):
    """v_L[m] = (ar + i ai) v_L[m-1] + x[m] - lam x[m-L]  (real lam; 2K truncation)."""
    vr = x[0] * 0
    vi = x[0] * 0
    for m in range(x.shape[0]):
        drive = x[m]
        if m >= L:
            drive = drive - lam * x[m - L]
        nr = ar * vr - ai * vi + drive
        ni = ar * vi + ai * vr
        vr = nr
        vi = ni
        out_r[m] = vr
        out_i[m] = vi


@numba.njit(cache=True)
def _second_order_windowed(x, L, a1, a2, br, bi, lam, out_r, out_i):
    """Second-order form of the windowed filter with delayed-input subtraction."""
    zero = x[0] * 0
    r1 = zero
    r2 = zero
    i1 = zero
    i2 = zero
    for m in range(x.shape[0]):
        d0 = x[m]
        if m >= L:
            d0 = d0 - lam * x[m - L]
        d1 = zero
        if m >= 1:
            d1 = x[m - 1]
            if m - 1 >= L:
                d1 = d1 - lam * x[m - 1 - L]
        nr = a1 * r1 - a2 * r2 + d0 - br * d1
        ni = a1 * i1 - a2 * i2 - bi * d1
        r2 = r1
        r1 = nr
        i2 = i1
        i1 = ni
        out_r[m] = nr
        out_i[m] = ni


@numba.njit(cache=True)
def _fir_block(x, L, A1, A2, A3, A4, B, out_r, out_i):
    """Recursive FIR block diagram: two real delay lines, four gains, feed-forward B x[n-L]."""
    yr = x[0] * 0
    yi = x[0] * 0
    for m in range(x.shape[0]):
        drive = x[m]
        if m >= L:
            drive = drive + B * x[m - L]
        nr = A1 * yr + A2 * yi + drive
        ni = A3 * yr + A4 * yi
        yr = nr
        yi = ni
        out_r[m] = yr
        out_i[m] = yi


def _scalar(v, dtype):
    return dtype.type(v)


def _run_filter(xs: np.ndarray, omega: float, alpha: float, order: int, dtype) -> np.ndarray:
    """Full (unwindowed) forward filter ``v[m] = exp(-alpha - i omega) v[m-1] + x[m]``."""
    out_r = np.empty_like(xs)
    out_i = np.empty_like(xs)
    if order == 1:
        decay = math.exp(-alpha)
        _first_order(
            xs, _scalar(decay * math.cos(omega), dtype), _scalar(-decay * math.sin(omega), dtype), out_r, out_i
        )
    else:
        decay = math.exp(-alpha)
        _second_order(
            xs,
            _scalar(2.0 * decay * math.cos(omega), dtype),
            _scalar(decay * decay, dtype),
            _scalar(decay * math.cos(omega), dtype),
            _scalar(decay * math.sin(omega), dtype),
            out_r,
            out_i,
        )
    return _to_complex(out_r, out_i)


def _to_complex(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    cdt = np.complex64 if re.dtype == np.float32 else np.complex128
    out = np.empty(re.shape, dtype=cdt)
    out.real = re
    out.imag = im
    return out


def _forward_recursive(xloc: np.ndarray, count: int, cfg: SftConfig, order: int, return_state: bool = False):
    """Forward-attenuated windowed sums ``sum_{j=-K}^{K} exp(-(alpha + i omega) j) x[n - j]``.

    ``xloc`` holds samples for indices ``n_first - (2K + 1) .. n_first + count + K - 1``
    in the working dtype; the filter starts from zero state at its first sample.
    """
    K = cfg.K
    L = 2 * K + 1
    omega = cfg.frequency
    alpha = cfg.alpha
    dtype = xloc.dtype
    cdt = np.complex64 if dtype == np.float32 else np.complex128
    v = _run_filter(xloc, omega, alpha, order, dtype)
    # window end n + K sits at local position t + 3K + 1
    centre = np.arange(count) + L + K
    if cfg.use_2k_truncation:
        lam = cdt(math.exp(-2.0 * alpha * K))
        v2k = v[centre] - lam * v[centre - 2 * K]
        tail = xloc[centre - 2 * K].astype(cdt) * lam
        sign = -1.0 if cfg.p % 2 else 1.0
        z = cdt(sign * math.exp(alpha * K)) * (v2k + tail)
    else:
        lam = cdt(np.exp(-(alpha + 1j * omega) * L))
        vL = v[centre] - lam * v[centre - L]
        z = cdt(np.exp((alpha + 1j * omega) * K)) * vL
    if return_state:
        return z, v
    return z


def _phases(m: np.ndarray, omega: float, periodic_K: int | None) -> np.ndarray:
    """``exp(i omega m)`` computed in double; integer orders reduce ``m`` mod ``2K`` first."""
    if periodic_K is not None:
        m = np.mod(m, 2 * periodic_K)
    return np.exp(1j * omega * m.astype(np.float64))


def _kernel_integral(sig: Signal, start: int, count: int, cfg: SftConfig) -> np.ndarray:
    K = cfg.K
    omega = cfg.frequency
    alpha = cfg.alpha
    dt = cfg.precision.real_dtype
    cdt = cfg.precision.complex_dtype
    periodic_K = K if cfg.periodic else None
    # prefix differences cancel: the error grows like eps * exp(alpha * span), so keep alpha * chunk <= 8
    if alpha > 0:
        chunk = max(16, int(8.0 / alpha))
    else:
        chunk = count
    out = np.empty(count, dtype=cdt)
    for a in range(0, count, max(chunk, 1)):
        b = min(count, a + chunk)
        n_lo = start + a
        m0 = n_lo - K
        xs = extended_range(sig, m0, start + b + K).astype(dt)
        rel = np.arange(xs.size)
        w = _phases(rel, omega, periodic_K)
        if alpha > 0:
            w = w * np.exp(-alpha * rel)
        f = xs.astype(cdt) * w.astype(cdt)
        u = np.concatenate([np.zeros(1, dtype=cdt), np.cumsum(f, dtype=cdt)])
        t = np.arange(b - a)
        window = u[t + 2 * K + 1] - u[t]
        # window holds sum_m x[m] exp((-alpha + i omega)(m - m0)); centre offset is t + K
        back = _phases(-(t + K), omega, periodic_K)
        if alpha > 0:
            back = back * np.exp(alpha * (t + K))
        out[a:b] = window * back.astype(cdt)
    return out


def sft_z(sig: Signal, cfg: SftConfig, start: int = 0, count: int | None = None) -> np.ndarray:
    """Complex ``c - i s`` for output indices ``start .. start + count - 1``."""
    if count is None:
        count = len(sig) - start
    if count < 0:
        raise ValueError("negative output count")
    if count == 0:
        return np.empty(0, dtype=cfg.precision.complex_dtype)
    if cfg.strategy is Strategy.KERNEL_INTEGRAL:
        return _kernel_integral(sig, start, count, cfg)
    order = 1 if cfg.strategy is Strategy.RECURSIVE1 else 2
    K = cfg.K
    dt = cfg.precision.real_dtype
    if cfg.alpha == 0.0:
        xloc = extended_range(sig, start - 2 * K - 1, start + count + K).astype(dt)
        return _forward_recursive(xloc, count, cfg, order)
    # attenuated: run over the reversed signal, then conjugate and reverse back
    xrev = extended_range(sig, start - K, start + count + 2 * K + 1)[::-1].astype(dt)
    zf = _forward_recursive(np.ascontiguousarray(xrev), count, cfg, order)
    return np.conj(zf[::-1])


def sft_components(sig: Signal, cfg: SftConfig, start: int = 0, count: int | None = None):
    """``(c, s)`` real sequences for the configured order/frequency and attenuation."""
    z = sft_z(sig, cfg, start, count)
    return z.real.copy(), (-z.imag).copy()


def asft_components(sig: Signal, cfg: SftConfig, start: int = 0, count: int | None = None):
    """Attenuated components ``(c~, s~)``; ``cfg.alpha`` must be positive."""
    if not cfg.alpha > 0:
        raise ValueError("ASFT needs alpha > 0")
    return sft_components(sig, cfg, start, count)


def direct_components(sig: Signal, K: int, omega: float, alpha: float = 0.0, start: int = 0, count: int | None = None):
    """Brute-force O(KN) evaluation of ``z`` in double precision (test oracle)."""
    if count is None:
        count = len(sig) - start
    k = np.arange(-K, K + 1)
    taps = np.exp(alpha * k) * np.exp(-1j * omega * k)
    xs = extended_range(sig, start - K, start + count + K)
    # z[n] = sum_k taps[k] x[n - k]
    return np.convolve(xs, taps, mode="valid")


def sliding_window_state(sig: Signal, cfg: SftConfig) -> SftState:
    """Windowed state sequences from the in-window recurrences, plus prefix-difference forms.

    All sequences are indexed by ``m = origin + i`` for ``m`` in
    ``[-(2K + 1), N + K)``:

    * ``u_window``        - windowed kernel integral via its add/subtract recurrence
    * ``u_window_prefix`` - the same window as a difference of prefix sums
    * ``v``               - full first-order filter state
    * ``v_2k``            - ``v[m] - exp(-2 alpha K) v[m - 2K]``
    * ``v_2k_direct``     - windowed first-order recurrence
    * ``v_2k_second``     - windowed second-order recurrence

    The filter forms are forward (older samples attenuated) and require a
    wavelength dividing ``2K``.
    """
    K = cfg.K
    L = 2 * K + 1
    dt = cfg.precision.real_dtype
    cdt = cfg.precision.complex_dtype
    omega = cfg.frequency
    alpha = cfg.alpha
    origin = -L
    N = len(sig)
    xs = extended_range(sig, origin, N + K).astype(dt)
    M = xs.size
    rel = np.arange(M)
    ph = _phases(rel, omega, K if cfg.periodic else None).astype(cdt)
    f = xs.astype(cdt) * ph

    state = SftState(origin=origin)
    # windowed kernel integral: u_L[m] = u_L[m-1] + f[m] - f[m-L]
    uw = np.empty(M, dtype=cdt)
    acc = cdt.type(0)
    for m in range(M):
        acc = acc + f[m]
        if m >= L:
            acc = acc - f[m - L]
        uw[m] = acc
    state.u_window = uw
    prefix = np.cumsum(f, dtype=cdt)
    shifted = np.concatenate([np.zeros(L, dtype=cdt), prefix[:-L]])
    state.u_window_prefix = prefix - shifted

    if cfg.periodic:
        state.v = _run_filter(xs, omega, alpha, 1, dt)
        lam = math.exp(-2.0 * alpha * K)
        lagged = np.concatenate([np.zeros(2 * K, dtype=cdt), state.v[:-2 * K]])
        state.v_2k = state.v - cdt.type(lam) * lagged
        decay = math.exp(-alpha)
        out_r = np.empty_like(xs)
        out_i = np.empty_like(xs)
        _first_order_windowed(
            xs, 2 * K, dt.type(decay * math.cos(omega)), dt.type(-decay * math.sin(omega)), dt.type(lam), out_r, out_i
        )
        state.v_2k_direct = _to_complex(out_r, out_i)
        out_r = np.empty_like(xs)
        out_i = np.empty_like(xs)
        _second_order_windowed(
            xs,
            2 * K,
            dt.type(2.0 * decay * math.cos(omega)),
            dt.type(decay * decay),
            dt.type(decay * math.cos(omega)),
            dt.type(decay * math.sin(omega)),
            dt.type(lam),
            out_r,
            out_i,
        )
        state.v_2k_second = _to_complex(out_r, out_i)
    return state


def fir_block_response(x: np.ndarray, K: int, p: int, beta: float | None = None):
    """Run the recursive FIR block diagram with ``A1 = A4 = cos(beta p)``,
    ``-A2 = A3 = sin(beta p)`` and ``B = -1`` over ``x``.

    The two delay lines carry ``Re`` and ``-Im`` of the windowed state,
    i.e. ``conj(v_2k)``.
    """
    beta = math.pi / K if beta is None else beta
    x = np.ascontiguousarray(x, dtype=np.float64)
    c, s = math.cos(beta * p), math.sin(beta * p)
    out_r = np.empty_like(x)
    out_i = np.empty_like(x)
    _fir_block(x, 2 * K, c, -s, s, c, -1.0, out_r, out_i)
    return out_r, out_i


@dataclass
class StabilityReport:
    max_state_magnitude: float
    state_bound: float
    max_component_error: float
    max_relative_error: float
    reference_scale: float


def stability_probe(sig: Signal, cfg: SftConfig, precision: Precision = Precision.SINGLE) -> StabilityReport:
    """Compare a reduced-precision run against double precision on the same signal.

    ``max_state_magnitude`` is the largest ``|v|`` reached by the recursive
    filter (or by the running prefix for the kernel integral);
    ``state_bound`` is ``max|x| / (1 - exp(-alpha))`` (``inf`` for ``alpha = 0``).
    """
    lo_cfg = _replace(cfg, precision=Precision(precision))
    hi_cfg = _replace(cfg, precision=Precision.DOUBLE)
    z_lo = sft_z(sig, lo_cfg).astype(np.complex128)
    z_hi = sft_z(sig, hi_cfg)
    err = np.abs(z_lo - z_hi)
    scale = float(np.max(np.abs(z_hi))) or 1.0
    xmax = float(np.max(np.abs(sig.samples)))
    bound = math.inf if cfg.alpha == 0 else xmax / (1.0 - math.exp(-cfg.alpha))
    state_mag = _state_magnitude(sig, lo_cfg)
    return StabilityReport(state_mag, bound, float(err.max()), float(err.max()) / scale, scale)


def _state_magnitude(sig: Signal, cfg: SftConfig) -> float:
    K = cfg.K
    N = len(sig)
    dt = cfg.precision.real_dtype
    if cfg.strategy is Strategy.KERNEL_INTEGRAL:
        xs = extended_range(sig, -K, N + K).astype(dt)
        ph = _phases(np.arange(xs.size), cfg.frequency, K if cfg.periodic else None)
        return float(np.max(np.abs(np.cumsum(xs * ph.astype(cfg.precision.complex_dtype)))))
    order = 1 if cfg.strategy is Strategy.RECURSIVE1 else 2
    if cfg.alpha == 0.0:
        xs = extended_range(sig, -2 * K - 1, N + K).astype(dt)
    else:
        xs = np.ascontiguousarray(extended_range(sig, -K, N + 2 * K + 1)[::-1].astype(dt))
    v = _run_filter(xs, cfg.frequency, cfg.alpha, order, dt)
    return float(np.max(np.abs(v)))

"""Least-squares trigonometric fits of Gaussian and Morlet kernels on [-K, K].

The sinusoids ``cos(beta p k)`` / ``sin(beta p k)`` sampled on the integer
grid are not orthogonal once ``beta`` is tuned away from ``pi / K``, so every
fit solves the full Gram system rather than projecting mode by mode.
"""

from __future__ import annotations

import ast
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .kernels import GaussianParams, MorletParams, gauss, gauss_d, gauss_dd, morlet
from .metrics import relative_rmse

FORMAT_HEADER = "sftkit-coefficients"
FORMAT_VERSION = 1
GRAM_COND_LIMIT = 1e12


class FitDegenerateError(ValueError):
    """Raised when the Gram matrix of a fit is singular or ill-conditioned."""


class CoefficientKind(enum.Enum):
    GAUSS_COS = "gauss_cos"
    GAUSS_DERIV_SIN = "gauss_deriv_sin"
    GAUSS_DERIV2_COS = "gauss_deriv2_cos"
    MORLET_DIRECT = "morlet_direct"
    MORLET_MULTIPLY = "morlet_multiply"


@dataclass(frozen=True)
class HarmonicGrid:
    """Half-width ``K``, base frequency ``beta`` and the orders used per basis."""

    K: int
    beta: float | None = None
    cos_orders: tuple[int, ...] = ()
    sin_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        beta = math.pi / self.K if self.beta is None else float(self.beta)
        if not beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "beta", beta)
        for name in ("cos_orders", "sin_orders"):
            orders = tuple(int(p) for p in getattr(self, name))
            if len(set(orders)) != len(orders):
                raise ValueError(f"{name} must be distinct")
            if any(p < 0 for p in orders):
                raise ValueError(f"{name} must be non-negative")
            object.__setattr__(self, name, orders)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def n_basis(self) -> int:
        return len(self.cos_orders) + len(self.sin_orders)

    @property
    def integer_periodic(self) -> bool:
        """True when every order's wavelength divides ``2K`` (``beta = pi / K``)."""
        return math.isclose(self.beta * self.K, math.pi, rel_tol=1e-12)

    def design(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        cols = [np.cos(self.beta * p * k) for p in self.cos_orders]
        cols += [np.sin(self.beta * p * k) for p in self.sin_orders]
        if not cols:
            return np.zeros((k.size, 0))
        return np.stack(cols, axis=1)

    def with_beta(self, beta: float) -> HarmonicGrid:
        return HarmonicGrid(self.K, beta, self.cos_orders, self.sin_orders)


@dataclass
class CoefficientSet:
    """Fitted series ``sum_p cos_coeffs[p] cos(beta p k) + sin_coeffs[p] sin(beta p k)``.

    For the Gaussian kinds the coefficients are ``a_p``, ``b_p`` or ``d_p``.
    Morlet direct sets hold ``m_p`` in ``cos_coeffs`` and ``i l_p`` in
    ``sin_coeffs`` (so the series is the complex kernel itself). Morlet
    multiply sets hold the Gaussian envelope coefficients ``a_p``.
    """

    kind: CoefficientKind
    grid: HarmonicGrid
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    fit_rmse: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cos_coeffs = np.asarray(self.cos_coeffs)
        self.sin_coeffs = np.asarray(self.sin_coeffs)
        if self.cos_coeffs.shape != (len(self.grid.cos_orders),):
            raise ValueError("cos coefficient count does not match grid")
        if self.sin_coeffs.shape != (len(self.grid.sin_orders),):
            raise ValueError("sin coefficient count does not match grid")

    @property
    def P(self) -> int:
        return int(self.meta.get("P", max(self.grid.cos_orders + self.grid.sin_orders, default=0)))

    def evaluate(self, k) -> np.ndarray:
        """Series value at integer ``k``; zero outside ``[-K, K]``."""
        k = np.asarray(k)
        B = self.grid.design(k)
        coeffs = np.concatenate([self.cos_coeffs, self.sin_coeffs])
        vals = B @ coeffs if coeffs.size else np.zeros(k.shape)
        return np.where(np.abs(k) <= self.grid.K, vals, 0.0)

    @property
    def l_coeffs(self) -> np.ndarray:
        """Morlet direct ``l_p`` (the sine series carries ``i l_p``)."""
        return self.sin_coeffs / 1j

    def shifted_coeffs(self) -> tuple[np.ndarray, np.ndarray]:
        """Orders ``-P..P`` and ``a'_p`` with ``a'_0 = a_0`` and ``a'_{+-p} = a_p / 2``."""
        if self.kind is not CoefficientKind.MORLET_MULTIPLY and self.kind is not CoefficientKind.GAUSS_COS:
            raise ValueError("shifted coefficients only exist for Gaussian envelopes")
        a = dict(zip(self.grid.cos_orders, self.cos_coeffs))
        P = max(a)
        orders = np.arange(-P, P + 1)
        ap = np.array([a.get(abs(p), 0.0) * (1.0 if p == 0 else 0.5) for p in orders])
        return orders, ap


def _solve_gram(B: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Normal-equation solve of ``min |B c - y|``; all-zero columns get coefficient 0."""
    coeffs = np.zeros(B.shape[1], dtype=np.result_type(B, y))
    live = np.any(B != 0.0, axis=0)
    if not live.any():
        return coeffs
    Bl = B[:, live]
    gram = Bl.T @ Bl
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise FitDegenerateError(f"Gram matrix condition number {cond:.3g} exceeds {GRAM_COND_LIMIT:g}")
    rhs = Bl.T @ y
    if np.iscomplexobj(rhs):
        sol = scipy.linalg.solve(gram, rhs.real, assume_a="pos") + 1j * scipy.linalg.solve(
            gram, rhs.imag, assume_a="pos"
        )
    else:
        sol = scipy.linalg.solve(gram, rhs, assume_a="pos")
    coeffs[live] = sol
    return coeffs


def fit_mmse(
    target,
    grid: HarmonicGrid,
    kind: CoefficientKind = CoefficientKind.GAUSS_COS,
    meta: dict | None = None,
) -> CoefficientSet:
    """Minimum mean square error fit of ``target`` sampled on ``[-K, K]``.

    Complex targets give complex coefficients (real and imaginary parts are
    fitted independently on the same basis).
    """
    target = np.asarray(target)
    if target.shape != (2 * grid.K + 1,):
        raise ValueError(f"target must have {2 * grid.K + 1} samples on [-K, K]")
    if not np.all(np.isfinite(target)):
        raise ValueError("target must be finite")
    if grid.n_basis > 2 * grid.K + 1:
        raise ValueError("more basis functions than fit nodes")
    B = grid.design(grid.nodes)
    c = _solve_gram(B, target)
    nc = len(grid.cos_orders)
    cs = CoefficientSet(kind, grid, c[:nc], c[nc:], 0.0, dict(meta or {}))
    cs.fit_rmse = relative_rmse(cs.evaluate(grid.nodes), target)
    return cs


def gauss_grid(K: int, P: int, beta: float | None = None) -> HarmonicGrid:
    return HarmonicGrid(K, beta, cos_orders=tuple(range(P + 1)))


def fit_gaussian(
    params: GaussianParams,
    P: int,
    beta: float | None = None,
    derivative: int = 0,
) -> CoefficientSet:
    """Fit ``G`` (``a_p``), ``G_D`` (``b_p``, sines of order 1..P) or ``G_DD`` (``d_p``)."""
    K = params.K
    meta = {"sigma": params.sigma, "P": P, "derivative": derivative}
    if derivative == 0:
        grid = gauss_grid(K, P, beta)
        return fit_mmse(gauss(params, grid.nodes), grid, CoefficientKind.GAUSS_COS, meta)
    if derivative == 1:
        grid = HarmonicGrid(K, beta, sin_orders=tuple(range(1, P + 1)))
        return fit_mmse(gauss_d(params, grid.nodes), grid, CoefficientKind.GAUSS_DERIV_SIN, meta)
    if derivative == 2:
        grid = gauss_grid(K, P, beta)
        return fit_mmse(gauss_dd(params, grid.nodes), grid, CoefficientKind.GAUSS_DERIV2_COS, meta)
    raise ValueError("derivative order must be 0, 1 or 2")


def realized_kernel(cs: CoefficientSet, n, alpha: float = 0.0, n0: int = 0, cos_coeffs=None, sin_coeffs=None):
    """Kernel actually applied by an SFT (``alpha = 0``) or ASFT reconstruction.

    With attenuation the reconstruction reads components at ``n + n0`` and
    scales by ``exp(-alpha n0 / 2)`` (``= exp(-alpha^2 / 4 gamma)``), so tap
    ``j`` is ``exp(-alpha n0 / 2) exp(alpha (j + n0)) F[j + n0]`` where ``F``
    is the fitted series (zero outside ``[-K, K]``). ``cos_coeffs`` /
    ``sin_coeffs`` override the set's own coefficients, which is how the
    derivative transforms mix ``a_p``, ``b_p`` and ``d_p``.
    """
    n = np.asarray(n)
    m = n + n0
    c = cs.cos_coeffs if cos_coeffs is None else np.asarray(cos_coeffs)
    s = cs.sin_coeffs if sin_coeffs is None else np.asarray(sin_coeffs)
    inside = np.abs(m) <= cs.grid.K
    coef = np.concatenate([c, s])
    vals = np.zeros(m.shape, dtype=np.result_type(coef, np.float64))
    vals[inside] = cs.grid.design(m[inside]) @ coef
    if alpha == 0.0 and n0 == 0:
        return vals
    weight = np.exp(alpha * m - 0.5 * alpha * n0)
    return weight * vals


def golden_section(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-4, n_coarse: int = 33):
    """Bounded minimisation: coarse grid scan, then golden-section in the best bracket.

    Returns ``(x_best, f_best)``. Deterministic for a deterministic ``f``.
    """
    xs = np.linspace(lo, hi, n_coarse)
    fs = np.array([f(x) for x in xs])
    i = int(np.argmin(fs))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_coarse - 1)]
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(abs(a), abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    best = [(fs[i], xs[i]), (fc, c), (fd, d)]
    fbest, xbest = min(best, key=lambda t: t[0])
    return float(xbest), float(fbest)


def tune_beta(
    target: Callable,
    K: int,
    P: int,
    metric: Callable[[CoefficientSet], float] | None = None,
    kind: CoefficientKind = CoefficientKind.GAUSS_COS,
    span: tuple[float, float] = (0.5, 1.5),
    rtol: float = 1e-4,
) -> tuple[float, CoefficientSet]:
    """Pick ``beta`` in ``[span[0] pi/K, span[1] pi/K]`` minimising ``metric``.

    ``target`` is a callable of integer ``k``. The default metric is the
    relative RMSE of the fit (zero outside ``[-K, K]``) against ``target``
    over ``[-3K, 3K]``.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if kind is CoefficientKind.GAUSS_DERIV_SIN:
        base = HarmonicGrid(K, None, sin_orders=tuple(range(1, P + 1)))
    else:
        base = gauss_grid(K, P)
    y = np.asarray(target(base.nodes))

    if metric is None:
        wide = np.arange(-3 * K, 3 * K + 1)
        truth = np.asarray(target(wide))

        def metric(cs):
            return relative_rmse(cs.evaluate(wide), truth)

    def objective(beta):
        try:
            return metric(fit_mmse(y, base.with_beta(beta), kind, {"P": P}))
        except FitDegenerateError:
            return math.inf

    beta, _ = golden_section(objective, span[0] * math.pi / K, span[1] * math.pi / K, rtol)
    return beta, fit_mmse(y, base.with_beta(beta), kind, {"P": P, "beta_tuned": True})


def morlet_fit_target(params: MorletParams, K: int, n0: int = 0) -> np.ndarray:
    """Series target on ``[-K, K]`` for a Morlet direct fit.

    For ``n0 > 0`` this is ``exp(alpha^2/4gamma) exp(-alpha k) psi[k - n0]``,
    written in the overflow-free form ``A e^{-gamma k^2} (e^{i xi (k - n0)/sigma} - kappa)``.
    """
    k = np.arange(-K, K + 1, dtype=np.float64)
    if n0 == 0:
        return morlet(params, k)
    env = np.exp(-params.gamma * k * k)
    return params.amplitude * env * (np.exp(1j * params.carrier * (k - n0)) - params.kappa_xi)


def fit_morlet_direct(
    params: MorletParams,
    K: int,
    P_S: int,
    P_D: int,
    beta: float | None = None,
    n0: int = 0,
) -> CoefficientSet:
    """Fit the Morlet wavelet by sinusoids of orders ``P_S .. P_S + P_D - 1``.

    Without attenuation the real part is fitted on cosines and the imaginary
    part on sines, giving real ``m_p`` and ``l_p``. With an ASFT shift the
    target picks up the carrier phase ``-xi n0 / sigma`` and both parts are
    fitted on the full cosine+sine set, so ``m_p`` and ``l_p`` become complex.
    """
    if P_S < 0 or P_D < 1:
        raise ValueError("need P_S >= 0 and P_D >= 1")
    orders = tuple(range(P_S, P_S + P_D))
    grid = HarmonicGrid(K, beta, cos_orders=orders, sin_orders=orders)
    target = morlet_fit_target(params, K, n0)
    meta = {"sigma": params.sigma, "xi": params.xi, "P_S": P_S, "P_D": P_D, "P": P_D, "n0": n0}
    if n0 == 0:
        cos_grid = HarmonicGrid(K, grid.beta, cos_orders=orders)
        sin_grid = HarmonicGrid(K, grid.beta, sin_orders=orders)
        m = _solve_gram(cos_grid.design(grid.nodes), target.real)
        l = _solve_gram(sin_grid.design(grid.nodes), target.imag)
        cs = CoefficientSet(CoefficientKind.MORLET_DIRECT, grid, m.astype(complex), 1j * l, 0.0, meta)
    else:
        cs = fit_mmse(target, grid, CoefficientKind.MORLET_DIRECT, meta)
    cs.fit_rmse = relative_rmse(cs.evaluate(grid.nodes), target)
    return cs


def fit_morlet_multiply(params: MorletParams, K: int, P_M: int, beta: float | None = None) -> CoefficientSet:
    """Gaussian-envelope fit ``a_p`` (orders 0..P_M) used by the multiplication method."""
    g = GaussianParams(params.sigma, K)
    cs = fit_gaussian(g, P_M, beta)
    cs.kind = CoefficientKind.MORLET_MULTIPLY
    cs.meta.update({"xi": params.xi, "P_M": P_M, "P": P_M})
    return cs


def morlet_rmse(params: MorletParams, approx_kernel: Callable, K: int) -> float:
    """Relative RMSE of a realised Morlet kernel against the exact one over ``[-5K, 5K]``."""
    n = np.arange(-5 * K, 5 * K + 1)
    return relative_rmse(approx_kernel(n), morlet(params, n))


def morlet_direct_kernel(params: MorletParams, cs: CoefficientSet, n0: int = 0) -> Callable:
    alpha = 2.0 * params.gamma * n0
    return lambda n: realized_kernel(cs, n, alpha, n0)


def select_optimal_ps(params: MorletParams, K: int, P_D: int, n0: int = 0, beta: float | None = None) -> int:
    """Exhaustive scan of ``P_S`` in ``[0, ceil(K xi / (pi sigma)) + P_D]``; ties go to the smaller ``P_S``."""
    if P_D < 1:
        raise ValueError("P_D must be >= 1")
    hi = math.ceil(K * params.xi / (math.pi * params.sigma)) + P_D
    n = np.arange(-5 * K, 5 * K + 1)
    truth = morlet(params, n)
    best_ps, best = 0, math.inf
    for ps in range(0, hi + 1):
        try:
            cs = fit_morlet_direct(params, K, ps, P_D, beta, n0)
        except FitDegenerateError:
            continue
        e = relative_rmse(morlet_direct_kernel(params, cs, n0)(n), truth)
        if e < best:
            best_ps, best = ps, e
    return best_ps


def _fmt(v) -> str:
    v = complex(v)
    return f"{v.real!r} {v.imag!r}"


def save_coefficients(cs: CoefficientSet, path) -> None:
    """Write ``cs`` as a versioned plain-text record (floats in repr precision)."""
    lines = [
        f"{FORMAT_HEADER} {FORMAT_VERSION}",
        f"kind {cs.kind.value}",
        f"K {cs.grid.K}",
        f"beta {cs.grid.beta!r}",
        f"fit_rmse {cs.fit_rmse!r}",
    ]
    for key in sorted(cs.meta):
        lines.append(f"meta {key} {cs.meta[key]!r}")
    for p, v in zip(cs.grid.cos_orders, cs.cos_coeffs):
        lines.append(f"coef cos {p} {_fmt(v)}")
    for p, v in zip(cs.grid.sin_orders, cs.sin_coeffs):
        lines.append(f"coef sin {p} {_fmt(v)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_coefficients(path) -> CoefficientSet:
    with open(path, encoding="utf-8") as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if rows[0][0] != FORMAT_HEADER or int(rows[0][1]) != FORMAT_VERSION:
        raise ValueError(f"not a version-{FORMAT_VERSION} coefficient file: {path}")
    head, meta, cos, sin = {}, {}, [], []
    for row in rows[1:]:
        if row[0] == "meta":
            meta[row[1]] = ast.literal_eval(" ".join(row[2:]))
        elif row[0] == "coef":
            val = complex(float(row[3]), float(row[4]))
            (cos if row[1] == "cos" else sin).append((int(row[2]), val))
        else:
            head[row[0]] = row[1]
    grid = HarmonicGrid(int(head["K"]), float(head["beta"]), tuple(p for p, _ in cos), tuple(p for p, _ in sin))

    def pack(items: Sequence):
        arr = np.array([v for _, v in items], dtype=complex)
        return arr.real.copy() if arr.size and not np.any(arr.imag) and kind is not CoefficientKind.MORLET_DIRECT else arr

    kind = CoefficientKind(head["kind"])
    return CoefficientSet(kind, grid, pack(cos), pack(sin), float(head["fit_rmse"]), meta)

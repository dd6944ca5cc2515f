"""Experiment procedures: Gaussian fit-error table, Morlet method sweep, truncation baseline.

Everything here runs in double precision so that only approximation error
is measured.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import fourier_approx as fa
from .kernels import GaussianParams, MorletParams, gauss, morlet
from .metrics import RmseReport, relative_rmse
from .smoothers import gauss_spec

GAUSS_SPAN = 3  # Gaussian errors are measured over [-3K, 3K]
MORLET_SPAN = 5  # Morlet errors over [-5K, 5K]

TABLE1_K = 256
TABLE1_N0 = 10
TABLE1_P = (2, 3, 4, 5, 6)
# published reference values (percent), rows keyed by (transform, P): e(G), e(G_D), e(G_DD)
TABLE1_REFERENCE = {
    ("SFT", 2): (1.0, 5.1, 8.2),
    ("SFT", 3): (0.15, 0.90, 2.77),
    ("SFT", 4): (0.038, 0.24, 0.54),
    ("SFT", 5): (0.0059, 0.043, 0.16),
    ("SFT", 6): (0.0015, 0.011, 0.031),
    ("ASFT", 2): (1.1, 5.4, 8.5),
    ("ASFT", 3): (0.17, 1.02, 3.10),
    ("ASFT", 4): (0.046, 0.30, 0.63),
    ("ASFT", 5): (0.017, 0.037, 0.12),
    ("ASFT", 6): (0.0021, 0.016, 0.041),
}

MORLET_SIGMA = 60.0
MORLET_XIS = (1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)


def k_grid(sigma: float, step: int = 4) -> list[int]:
    """Candidate half-widths ``K`` in ``[2 sigma, 4 sigma]``."""
    return list(range(int(math.ceil(2 * sigma)), int(math.floor(4 * sigma)) + 1, step))


# ----------------------------------------------------------------------------
# truncation baseline


def truncation_baseline(K: int = TABLE1_K, sigma: float | None = None) -> RmseReport:
    """Error of a Gaussian cut to ``[-3 sigma, 3 sigma]``, measured over ``[-3K, 3K]``."""
    sigma = K / 3.0 if sigma is None else sigma
    g = GaussianParams(sigma, K)
    n = np.arange(-GAUSS_SPAN * K, GAUSS_SPAN * K + 1)
    truth = gauss(g, n)
    approx = np.where(np.abs(n) <= 3.0 * sigma, truth, 0.0)
    return RmseReport("GCT3", "gauss", "convolution", 0, False, (-GAUSS_SPAN * K, GAUSS_SPAN * K),
                      relative_rmse(approx, truth), K=K, sigma=sigma)


# ----------------------------------------------------------------------------
# Gaussian table


@dataclass
class GaussTuning:
    transform: str
    P: int
    sigma: float
    beta: float
    error: float


def _gauss_error(sigma: float, beta: float, P: int, K: int, n0: int) -> float:
    """e(G) of the realised (A)SFT kernel for a given ``(sigma, beta)``."""
    g = GaussianParams(sigma, K)
    try:
        cs = fa.fit_gaussian(g, P, beta, 0)
    except fa.FitDegenerateError:
        return math.inf
    n = np.arange(-GAUSS_SPAN * K, GAUSS_SPAN * K + 1)
    alpha = 2.0 * g.gamma * n0
    return relative_rmse(fa.realized_kernel(cs, n, alpha, n0), gauss(g, n))


def tune_gauss(
    P: int,
    K: int = TABLE1_K,
    n0: int = 0,
    sigma: float | None = None,
    sigma_range: tuple[float, float] = (40.0, 100.0),
    beta_span: tuple[float, float] = (0.8, 1.3),
) -> GaussTuning:
    """Choose ``beta`` (and ``sigma`` unless fixed) minimising e(G) of the realised kernel.

    With ``sigma`` free, an integer grid over ``sigma_range`` is scanned and the
    best cell refined by golden section; ``beta`` is re-tuned at each ``sigma``.
    """

    def best_beta(s):
        return fa.golden_section(
            lambda b: _gauss_error(s, b, P, K, n0),
            beta_span[0] * math.pi / K,
            beta_span[1] * math.pi / K,
            rtol=1e-5,
            n_coarse=17,
        )

    transform = "ASFT" if n0 > 0 else "SFT"
    if sigma is not None:
        b, e = best_beta(sigma)
        return GaussTuning(transform, P, float(sigma), b, e)
    lo, hi = sigma_range
    if n0 > 0:
        lo = max(lo, 4.0 * n0)  # the shift must stay within sigma / 4
    grid = np.arange(lo, hi + 0.5, 1.0)
    errs = [best_beta(s)[1] for s in grid]
    i = int(np.argmin(errs))
    s_best, _ = fa.golden_section(
        lambda s: best_beta(s)[1], grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)], rtol=1e-3, n_coarse=5
    )
    b, e = best_beta(s_best)
    return GaussTuning(transform, P, s_best, b, e)


def gauss_table_row(tuning: GaussTuning, K: int = TABLE1_K, n0: int = 0) -> list[RmseReport]:
    """e(G), e(G_D), e(G_DD) of the realised transforms at a tuned ``(sigma, beta)``."""
    n = np.arange(-GAUSS_SPAN * K, GAUSS_SPAN * K + 1)
    spec = gauss_spec(tuning.sigma, tuning.P, 2, K, n0, tuning.beta)
    out = []
    for deriv, name in enumerate(("G", "GD", "GDD")):
        sub = gauss_spec(tuning.sigma, tuning.P, deriv, K, n0, tuning.beta) if deriv < 2 else spec
        err = relative_rmse(sub.realized_kernel(n), sub.true_kernel(n))
        out.append(
            RmseReport(
                name,
                "gauss",
                "direct",
                tuning.P,
                n0 > 0,
                (-GAUSS_SPAN * K, GAUSS_SPAN * K),
                err,
                K=K,
                beta=tuning.beta,
                sigma=tuning.sigma,
            )
        )
    return out


def table1_experiment(
    K: int = TABLE1_K,
    n0: int = TABLE1_N0,
    Ps=TABLE1_P,
    sigma: float | None = None,
) -> list[RmseReport]:
    """Fit errors of G, G_D and G_DD for each ``P`` under SFT and ASFT (shift ``n0``).

    ``sigma=None`` tunes ``sigma`` jointly with ``beta`` per row, which is what
    makes sub-truncation errors reachable at a fixed ``K``; a fixed ``sigma``
    (e.g. ``K / 3``) bottoms out at the truncation error.
    """
    reports = []
    for shift in (0, n0):
        for P in Ps:
            tuning = tune_gauss(P, K, shift, sigma)
            reports.extend(gauss_table_row(tuning, K, shift))
    return reports


def table1_layout(reports: list[RmseReport]) -> list[tuple[str, int, float, float, float]]:
    """Rows ``(transform, P, e(G), e(G_D), e(G_DD))``."""
    rows = {}
    for r in reports:
        key = ("ASFT" if r.asft else "SFT", r.P)
        rows.setdefault(key, {})[r.abbreviation] = r.rmse_percent
    return [(t, P, v["G"], v["GD"], v["GDD"]) for (t, P), v in rows.items()]


def within_band(value: float, reference: float, rel: float = 0.30, absolute: float = 0.02) -> bool:
    """True when ``value`` is within ``rel`` relative or ``absolute`` percentage points, whichever is looser."""
    return abs(value - reference) <= max(rel * abs(reference), absolute)


# ----------------------------------------------------------------------------
# Morlet sweep


def _morlet_error(mp: MorletParams, approx: np.ndarray) -> float:
    n = np.arange(-MORLET_SPAN * mp.K, MORLET_SPAN * mp.K + 1)
    return relative_rmse(approx, morlet(mp, n))


def morlet_direct_error(sigma: float, xi: float, K: int, P_D: int, P_S: int | None = None, n0: int = 0):
    """``(rmse, P_S)`` of the direct fit at half-width ``K``; ``P_S=None`` picks the best."""
    mp = MorletParams(sigma, xi, K)
    if P_S is None:
        P_S = fa.select_optimal_ps(mp, K, P_D, n0)
    cs = fa.fit_morlet_direct(mp, K, P_S, P_D, None, n0)
    return fa.morlet_rmse(mp, fa.morlet_direct_kernel(mp, cs, n0), K), P_S


def multiply_kernel(mp: MorletParams, cs: fa.CoefficientSet, n, n0: int = 0) -> np.ndarray:
    """Realised kernel of the multiplication method: fitted envelope times the carrier."""
    n = np.asarray(n)
    alpha = 2.0 * mp.gamma * n0
    env = fa.realized_kernel(cs, n, alpha, n0) * math.sqrt(math.pi / mp.gamma)
    return mp.amplitude * env * (np.exp(1j * mp.carrier * n) - mp.kappa_xi)


def morlet_multiply_error(sigma: float, xi: float, K: int, P_M: int, n0: int = 0) -> float:
    mp = MorletParams(sigma, xi, K)
    cs = fa.fit_morlet_multiply(mp, K, P_M)
    return fa.morlet_rmse(mp, lambda n: multiply_kernel(mp, cs, n, n0), K)


def morlet_truncation_error(sigma: float, xi: float) -> float:
    """Morlet wavelet cut to ``[-3 sigma, 3 sigma]``, measured over ``[-5K, 5K]`` with ``K = ceil(3 sigma)``."""
    K = int(math.ceil(3 * sigma))
    mp = MorletParams(sigma, xi, K)
    n = np.arange(-MORLET_SPAN * K, MORLET_SPAN * K + 1)
    truth = morlet(mp, n)
    return relative_rmse(np.where(np.abs(n) <= 3 * sigma, truth, 0.0), truth)


def morlet_rmse_sweep(
    sigma: float = MORLET_SIGMA,
    xis=MORLET_XIS,
    method: str = "direct",
    P: int = 6,
    n0: int = 0,
    K_values=None,
    P_S: int | None = None,
) -> list[RmseReport]:
    """Best RMSE over ``K`` per ``xi`` for one method and order count.

    ``method`` is ``"direct"`` (``P`` = P_D, P_S auto-selected unless given),
    ``"multiply"`` (``P`` = P_M) or ``"truncated"``.
    """
    K_values = k_grid(sigma) if K_values is None else list(K_values)
    reports = []
    for xi in xis:
        if method == "truncated":
            K = int(math.ceil(3 * sigma))
            reports.append(RmseReport("MCT3", "morlet", "convolution", 0, False, (-5 * K, 5 * K),
                                      morlet_truncation_error(sigma, xi), xi=xi, K=K, sigma=sigma))
            continue
        best = (math.inf, None, None)
        for K in K_values:
            if method == "direct":
                e, ps = morlet_direct_error(sigma, xi, K, P, P_S, n0)
            elif method == "multiply":
                e, ps = morlet_multiply_error(sigma, xi, K, P, n0), None
            else:
                raise ValueError(f"unknown method {method!r}")
            if e < best[0]:
                best = (e, K, ps)
        e, K, ps = best
        tag = "D" if method == "direct" else "M"
        shift = f"S{n0}" if n0 else ""
        reports.append(
            RmseReport(f"M{tag}{shift}P{P}", "morlet", method, P, n0 > 0, (-5 * K, 5 * K), e,
                       P_S=ps, xi=xi, K=K, beta=math.pi / K, sigma=sigma)
        )
    return reports


# ----------------------------------------------------------------------------
# CSV

CSV_COLUMNS = ("abbreviation", "P", "P_S", "xi", "K", "beta", "rmse_percent")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_reports_csv(reports, fh, extra_columns: tuple[str, ...] = ()) -> None:
    w = csv.writer(fh, lineterminator="\n")
    cols = CSV_COLUMNS + tuple(extra_columns)
    w.writerow(cols)
    for r in reports:
        row = r.as_row()
        w.writerow([_cell(row[c]) for c in cols])

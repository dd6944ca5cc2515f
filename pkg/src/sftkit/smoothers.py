"""Gaussian smoothing, Gaussian derivatives and Morlet transforms assembled from SFT/ASFT components.

Every transform is reduced to a list of terms ``(frequency, C, S)`` and
evaluated as

    out[n] = exp(-alpha n0 / 2) * sum_terms (C c[n + n0] + S s[n + n0])

where ``c``/``s`` are the (attenuated) components at that frequency. With
``alpha = 2 gamma n0`` the prefactor equals ``exp(-alpha^2 / 4 gamma)`` and the
read-ahead by ``n0`` turns the attenuation back into the centred kernel.
The same term list gives the kernel the transform actually applies
(:meth:`TransformSpec.realized_kernel`), which is what the exactness checks
compare against.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import fourier_approx as fa
from .kernels import GaussianParams, MorletParams, gauss, gauss_d, gauss_dd, morlet, truncated_convolution
from .metrics import relative_rmse
from .sft_engine import SftConfig, Strategy, sft_z
from .signal import Precision, Signal


class TransformKind(enum.Enum):
    GAUSS = "gauss"
    GAUSS_D = "gauss_d"
    GAUSS_DD = "gauss_dd"
    MORLET_DIRECT = "morlet_direct"
    MORLET_MULTIPLY = "morlet_multiply"


@dataclass(frozen=True)
class Term:
    order: int | None
    omega: float | None
    C: complex
    S: complex


@dataclass
class TransformSpec:
    kind: TransformKind
    gaussian: GaussianParams
    coeffs: dict
    morlet: MorletParams | None = None
    n0: int = 0
    strategy: Strategy = Strategy.KERNEL_INTEGRAL
    precision: Precision = Precision.DOUBLE
    abbreviation: str = ""
    convolution: bool = False  # GCT3 / MCT3: direct truncated convolution

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("n0 must be non-negative")
        if self.n0 > self.gaussian.sigma / 4.0:
            raise ValueError(f"n0={self.n0} exceeds sigma/4={self.gaussian.sigma / 4.0:g}; tail-neglect assumption fails")
        self.strategy = Strategy(self.strategy)
        self.precision = Precision(self.precision)
        if self.kind in (TransformKind.MORLET_DIRECT, TransformKind.MORLET_MULTIPLY) and self.morlet is None:
            raise ValueError("Morlet transforms need MorletParams")

    @property
    def K(self) -> int:
        return self.gaussian.K

    @property
    def alpha(self) -> float:
        return 2.0 * self.gaussian.gamma * self.n0

    @property
    def asft(self) -> bool:
        return self.n0 > 0

    @property
    def prefactor(self) -> float:
        return math.exp(-0.5 * self.alpha * self.n0)

    @property
    def complex_output(self) -> bool:
        return self.kind in (TransformKind.MORLET_DIRECT, TransformKind.MORLET_MULTIPLY)

    def terms(self) -> list[Term]:
        a = self.alpha
        kind = self.kind
        if kind is TransformKind.GAUSS:
            _need(self.coeffs, "a", fa.CoefficientKind.GAUSS_COS)
            return _cos_terms(self.coeffs["a"], self.coeffs["a"].cos_coeffs)
        if kind is TransformKind.GAUSS_D:
            _need(self.coeffs, "b", fa.CoefficientKind.GAUSS_DERIV_SIN)
            terms = _sin_terms(self.coeffs["b"], self.coeffs["b"].sin_coeffs)
            if a:
                _need(self.coeffs, "a", fa.CoefficientKind.GAUSS_COS)
                terms += _cos_terms(self.coeffs["a"], a * self.coeffs["a"].cos_coeffs)
            return terms
        if kind is TransformKind.GAUSS_DD:
            _need(self.coeffs, "d", fa.CoefficientKind.GAUSS_DERIV2_COS)
            d = self.coeffs["d"]
            if not a:
                return _cos_terms(d, d.cos_coeffs)
            _need(self.coeffs, "a", fa.CoefficientKind.GAUSS_COS)
            _need(self.coeffs, "b", fa.CoefficientKind.GAUSS_DERIV_SIN)
            ac = self.coeffs["a"]
            if d.grid.cos_orders != ac.grid.cos_orders:
                raise ValueError("d_p and a_p must share orders")
            return _cos_terms(d, d.cos_coeffs + a * a * ac.cos_coeffs) + _sin_terms(
                self.coeffs["b"], 2.0 * a * self.coeffs["b"].sin_coeffs
            )
        if kind is TransformKind.MORLET_DIRECT:
            _need(self.coeffs, "m", fa.CoefficientKind.MORLET_DIRECT)
            cs = self.coeffs["m"]
            if int(cs.meta.get("n0", 0)) != self.n0:
                raise ValueError("Morlet direct coefficients were fitted for a different n0")
            return _cos_terms(cs, cs.cos_coeffs) + _sin_terms(cs, cs.sin_coeffs)
        if kind is TransformKind.MORLET_MULTIPLY:
            _need(self.coeffs, "a", fa.CoefficientKind.MORLET_MULTIPLY)
            cs = self.coeffs["a"]
            mp = self.morlet
            amp = mp.amplitude * math.sqrt(math.pi / mp.gamma)
            rot = amp * np.exp(-1j * mp.carrier * self.n0)
            orders, ap = cs.shifted_coeffs()
            beta = cs.grid.beta
            terms = [Term(None, mp.carrier + beta * p, rot * c, 1j * rot * c) for p, c in zip(orders, ap)]
            terms += [Term(int(p), None, -amp * mp.kappa_xi * c, 0.0) for p, c in zip(cs.grid.cos_orders, cs.cos_coeffs)]
            return terms
        raise ValueError(f"unknown transform {kind}")

    def beta(self) -> float:
        return next(iter(self.coeffs.values())).grid.beta

    def realized_kernel(self, n) -> np.ndarray:
        """Tap values of the kernel this spec applies, at integer offsets ``n``."""
        n = np.asarray(n)
        if self.convolution:
            return np.where(np.abs(n) <= self.K, self.true_kernel(n), 0.0)
        m = (n + self.n0).astype(np.float64)
        beta = self.beta()
        total = np.zeros(n.shape, dtype=complex)
        for t in self.terms():
            w = beta * t.order if t.omega is None else t.omega
            total += t.C * np.cos(w * m) + t.S * np.sin(w * m)
        total = np.where(np.abs(n + self.n0) <= self.K, total, 0.0)
        if self.alpha:
            total = total * np.exp(self.alpha * m - 0.5 * self.alpha * self.n0)
        return total if self.complex_output else total.real

    def kernel_support(self) -> tuple[int, int]:
        return -self.K - self.n0, self.K - self.n0

    def true_kernel(self, n) -> np.ndarray:
        g = self.gaussian
        if self.kind is TransformKind.GAUSS:
            return gauss(g, n)
        if self.kind is TransformKind.GAUSS_D:
            return gauss_d(g, n)
        if self.kind is TransformKind.GAUSS_DD:
            return gauss_dd(g, n)
        return morlet(self.morlet, n)

    def fit_rmse(self) -> float:
        """Relative RMSE (%) of the realised kernel over ``[-3K, 3K]`` (Gaussian) or ``[-5K, 5K]`` (Morlet)."""
        w = 5 * self.K if self.complex_output else 3 * self.K
        n = np.arange(-w, w + 1)
        return relative_rmse(self.realized_kernel(n), self.true_kernel(n))


def _need(coeffs: dict, key: str, kind):
    if key not in coeffs:
        raise ValueError(f"transform needs '{key}' coefficients")
    if coeffs[key].kind is not kind:
        raise ValueError(f"coefficients '{key}' have kind {coeffs[key].kind.value}, expected {kind.value}")


def _cos_terms(cs: fa.CoefficientSet, values) -> list[Term]:
    return [Term(int(p), None, v, 0.0) for p, v in zip(cs.grid.cos_orders, values)]


def _sin_terms(cs: fa.CoefficientSet, values) -> list[Term]:
    return [Term(int(p), None, 0.0, v) for p, v in zip(cs.grid.sin_orders, values)]


@dataclass
class TransformResult:
    values: np.ndarray
    meta: dict = field(default_factory=dict)


def _run(sig: Signal, spec: TransformSpec, components=None) -> TransformResult:
    N = len(sig)
    meta = {
        "spec": spec.abbreviation or spec.kind.value,
        "strategy": spec.strategy.value,
        "precision": spec.precision.value,
    }
    if spec.convolution:
        K = spec.K
        taps = spec.true_kernel(np.arange(-K, K + 1))
        values = truncated_convolution(sig, taps)
        meta["achieved_rmse_estimate"] = spec.fit_rmse()
        return TransformResult(values, meta)

    prec = spec.precision
    out = np.zeros(N, dtype=prec.complex_dtype)
    cdt = prec.complex_dtype.type
    base = SftConfig(
        spec.K, p=0, beta=spec.beta(), alpha=spec.alpha, n0=spec.n0 or None, strategy=spec.strategy, precision=prec
    )
    for t in spec.terms():
        cfg = base.with_order(t.order) if t.omega is None else base.with_omega(t.omega)
        z = (components or sft_z)(sig, cfg, start=spec.n0, count=N)
        # C c + S s with c = Re z, s = -Im z
        if t.C != 0:
            out += cdt(t.C) * z.real
        if t.S != 0:
            out -= cdt(t.S) * z.imag
    if spec.alpha:
        out *= cdt(spec.prefactor)
    values = out if spec.complex_output else out.real.copy()
    meta["achieved_rmse_estimate"] = spec.fit_rmse()
    return TransformResult(values, meta)


def apply(sig: Signal, spec: TransformSpec, components=None) -> TransformResult:
    """Evaluate any transform spec (SFT, ASFT or truncated convolution).

    ``components(sig, cfg, start, count)`` may replace the engine's complex
    ``c - i s`` evaluation, e.g. with the sliding-sum path.
    """
    return _run(sig, spec, components)


def gauss_smooth_sft(sig: Signal, spec: TransformSpec) -> TransformResult:
    if spec.asft or spec.convolution:
        raise ValueError("gauss_smooth_sft needs a plain SFT spec")
    if spec.kind not in (TransformKind.GAUSS, TransformKind.GAUSS_D, TransformKind.GAUSS_DD):
        raise ValueError("not a Gaussian transform")
    return _run(sig, spec)


def gauss_smooth_asft(sig: Signal, spec: TransformSpec) -> TransformResult:
    if spec.kind is not TransformKind.GAUSS:
        raise ValueError("gauss_smooth_asft smooths with the Gaussian itself")
    return _run(sig, spec)


def gauss_derivs_asft(sig: Signal, spec: TransformSpec) -> TransformResult:
    if spec.kind not in (TransformKind.GAUSS_D, TransformKind.GAUSS_DD):
        raise ValueError("gauss_derivs_asft needs a derivative transform")
    return _run(sig, spec)


def morlet_direct(sig: Signal, spec: TransformSpec) -> TransformResult:
    if spec.kind is not TransformKind.MORLET_DIRECT:
        raise ValueError("spec is not a Morlet direct transform")
    return _run(sig, spec)


def morlet_multiply(sig: Signal, spec: TransformSpec) -> TransformResult:
    if spec.kind is not TransformKind.MORLET_MULTIPLY:
        raise ValueError("spec is not a Morlet multiplication transform")
    return _run(sig, spec)


# ----------------------------------------------------------------------------
# spec builders


def gauss_spec(
    sigma: float,
    P: int,
    derivative: int = 0,
    K: int | None = None,
    n0: int = 0,
    beta: float | None = None,
    strategy: Strategy = Strategy.KERNEL_INTEGRAL,
    precision: Precision = Precision.DOUBLE,
    abbreviation: str = "",
) -> TransformSpec:
    """Gaussian (``derivative=0``), first- or second-derivative smoothing spec.

    All coefficient sets share one ``beta`` (default ``pi / K``).
    """
    g = GaussianParams(sigma, K)
    kind = (TransformKind.GAUSS, TransformKind.GAUSS_D, TransformKind.GAUSS_DD)[derivative]
    coeffs = {"a": fa.fit_gaussian(g, P, beta, 0)}
    if derivative >= 1:
        coeffs["b"] = fa.fit_gaussian(g, P, beta, 1)
    if derivative == 2:
        coeffs["d"] = fa.fit_gaussian(g, P, beta, 2)
    return TransformSpec(kind, g, coeffs, None, n0, strategy, precision, abbreviation or f"G{'D' * derivative}P{P}")


def morlet_direct_spec(
    sigma: float,
    xi: float,
    P_D: int,
    P_S: int | None = None,
    K: int | None = None,
    n0: int = 0,
    strategy: Strategy = Strategy.KERNEL_INTEGRAL,
    precision: Precision = Precision.DOUBLE,
    abbreviation: str = "",
) -> TransformSpec:
    mp = MorletParams(sigma, xi, K)
    if P_S is None:
        P_S = fa.select_optimal_ps(mp, mp.K, P_D, n0)
    cs = fa.fit_morlet_direct(mp, mp.K, P_S, P_D, None, n0)
    return TransformSpec(
        TransformKind.MORLET_DIRECT, mp.gaussian(), {"m": cs}, mp, n0, strategy, precision, abbreviation or f"MDP{P_D}"
    )


def morlet_multiply_spec(
    sigma: float,
    xi: float,
    P_M: int,
    K: int | None = None,
    n0: int = 0,
    strategy: Strategy = Strategy.KERNEL_INTEGRAL,
    precision: Precision = Precision.DOUBLE,
    abbreviation: str = "",
) -> TransformSpec:
    mp = MorletParams(sigma, xi, K)
    cs = fa.fit_morlet_multiply(mp, mp.K, P_M)
    return TransformSpec(
        TransformKind.MORLET_MULTIPLY, mp.gaussian(), {"a": cs}, mp, n0, strategy, precision, abbreviation or f"MMP{P_M}"
    )


def truncated_spec(sigma: float, xi: float | None = None) -> TransformSpec:
    """GCT3 / MCT3: direct convolution with the kernel cut to ``[-3 sigma, 3 sigma]``."""
    K3 = max(1, int(math.floor(3.0 * sigma)))
    if xi is None:
        return TransformSpec(TransformKind.GAUSS, GaussianParams(sigma, K3), {}, abbreviation="GCT3", convolution=True)
    mp = MorletParams(sigma, xi, K3)
    return TransformSpec(
        TransformKind.MORLET_DIRECT, mp.gaussian(), {}, mp, abbreviation="MCT3", convolution=True
    )


# Table of named filters. S<n> marks the ASFT variant with shift n0 = n.
TABLE2_ABBREVIATIONS = (
    "GDP6",
    "MDP5", "MDP6", "MDP7", "MDP9", "MDP11",
    "MDS5P5", "MDS5P7", "MDS5P9", "MDS5P11",
    "MMP2", "MMP3", "MMP4", "MMP5",
    "MMS5P2", "MMS5P3", "MMS5P4", "MMS5P5",
    "GCT3", "MCT3",
)

_ABBREV = re.compile(r"^(?P<t>[GM])(?P<m>[DM])(?:S(?P<shift>\d+))?P(?P<P>\d+)$")


@dataclass(frozen=True)
class Abbreviation:
    transform: str  # "gauss" or "morlet"
    method: str  # "direct", "multiply" or "convolution"
    P: int | None
    n0: int

    @property
    def asft(self) -> bool:
        return self.n0 > 0


def parse_abbreviation(abbrev: str) -> Abbreviation:
    """Decode filter names such as ``GDP6``, ``MDS5P7``, ``MMP3`` or ``GCT3``.

    Grammar: ``<G|M><D|M>[S<n0>]P<P>`` for Gaussian/Morlet, direct/multiply,
    optional ASFT shift ``n0`` and order count; ``GCT3``/``MCT3`` are the
    truncated-convolution references. Gaussian filters only exist in the
    direct form.
    """
    if abbrev == "GCT3":
        return Abbreviation("gauss", "convolution", None, 0)
    if abbrev == "MCT3":
        return Abbreviation("morlet", "convolution", None, 0)
    m = _ABBREV.match(abbrev)
    if not m or (m["t"] == "G" and m["m"] == "M"):
        raise ValueError(f"unknown filter abbreviation {abbrev!r}")
    return Abbreviation(
        "gauss" if m["t"] == "G" else "morlet",
        "direct" if m["m"] == "D" else "multiply",
        int(m["P"]),
        int(m["shift"]) if m["shift"] else 0,
    )


def spec_from_abbreviation(
    abbrev: str,
    sigma: float,
    xi: float | None = None,
    K: int | None = None,
    P_S: int | None = None,
    derivative: int | None = None,
    strategy: Strategy = Strategy.KERNEL_INTEGRAL,
    precision: Precision = Precision.DOUBLE,
) -> TransformSpec:
    """Factory keyed by filter name; Morlet names need ``xi``."""
    ab = parse_abbreviation(abbrev)
    if ab.transform == "morlet" and xi is None:
        raise ValueError(f"{abbrev} is a Morlet filter and needs xi")
    if ab.method == "convolution":
        return truncated_spec(sigma, xi if ab.transform == "morlet" else None)
    if ab.transform == "gauss":
        return gauss_spec(sigma, ab.P, derivative or 0, K, ab.n0, None, strategy, precision, abbrev)
    if ab.method == "direct":
        return morlet_direct_spec(sigma, xi, ab.P, P_S, K, ab.n0, strategy, precision, abbrev)
    return morlet_multiply_spec(sigma, xi, ab.P, K, ab.n0, strategy, precision, abbrev)

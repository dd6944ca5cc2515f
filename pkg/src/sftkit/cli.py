"""Command-line interface: coefficient fits, transforms, error tables, sweeps and benchmarks.

Exit codes: 0 success, 1 runtime or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import evaluation as ev
from . import fourier_approx as fa
from .kernels import GaussianParams, MorletParams, gauss, gauss_d, gauss_dd, truncated_convolution
from .metrics import relative_rmse
from .parallel import (
    SlidingSumPlan,
    Variant,
    method_cost,
    sliding_sum_blocked8,
    sliding_sum_components,
    sliding_sum_flat,
)
from .sft_engine import Strategy
from .signal import Precision, Signal, TestSignal, make_test_signal
from .smoothers import apply, gauss_spec, spec_from_abbreviation, truncated_spec

# defaults follow the N and sigma axes of the scaling experiments
BENCH_NS = tuple(100 * 2**k for k in range(11))  # 100 .. 102400
BENCH_SIGMAS = tuple(16.0 * 2**k for k in range(10))  # 16 .. 8192
BENCH_FIXED_N = 102400
BENCH_FIXED_SIGMA = 16.0
REFERENCE_SPEEDUP = 413.6


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Validated, serialisable form of one CLI invocation."""

    command: str
    input: str | None = None
    generate: str | None = None
    N: int = 1024
    output: str | None = None
    kernel: str = "gauss"
    method: str = "direct"
    abbrev: str | None = None
    sigma: float | None = None
    xi: float | None = None
    K: int | None = None
    P: int | None = None
    P_S: int | None = None
    P_D: int | None = None
    n0: int = 0
    derivative: int = 0
    auto_ps: bool = False
    tune_beta: bool = False
    oracle: bool = False
    strategy: str = "kernel"
    precision: str = "double"
    variant: str | None = None
    workers: int = 1
    seed: int = 0
    L: int | None = None
    sweep: str = "sigma"
    Ns: list[int] = field(default_factory=list)
    sigmas: list[float] = field(default_factory=list)
    xis: list[float] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)
    reps: int = 5
    warmups: int = 2

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        return cls(**json.loads(text))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> RunConfig:
        names = set(cls.__dataclass_fields__)
        kw = {k: v for k, v in vars(ns).items() if k in names and v is not None}
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        c = self.command
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.sigma is not None and self.sigma <= 0:
            raise UsageError("--sigma must be positive")
        if c == "fit":
            if self.sigma is None:
                raise UsageError("fit needs --sigma")
            if self.kernel == "gauss" and self.P is None:
                raise UsageError("fit --kernel gauss needs --P")
            if self.kernel == "morlet":
                if self.xi is None:
                    raise UsageError("fit --kernel morlet needs --xi")
                if self.method == "direct" and self.P_D is None:
                    raise UsageError("the direct Morlet fit needs --PD")
                if self.method == "direct" and self.P_S is None and not self.auto_ps:
                    raise UsageError("give --PS or --auto-PS")
                if self.method == "multiply" and self.P is None:
                    raise UsageError("the multiply Morlet fit needs --P")
        elif c == "transform":
            if self.abbrev is None or self.sigma is None:
                raise UsageError("transform needs --abbrev and --sigma")
            if (self.input is None) == (self.generate is None):
                raise UsageError("give exactly one of --input or --generate")
            if self.variant is not None and self.strategy != "kernel":
                raise UsageError("--variant runs the kernel-integral sums; use --strategy kernel")
        elif c == "sliding-sum-trace":
            if self.L is None:
                raise UsageError("sliding-sum-trace needs --L")
        elif c == "bench":
            if self.reps < 3:
                raise UsageError("--reps must be >= 3")


# ----------------------------------------------------------------------------
# helpers


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _close_out(fh):
    if fh is not sys.stdout:
        fh.close()


def _num(v) -> str:
    return repr(float(v))


def read_signal(path: str) -> Signal:
    """One sample per line; blank lines are skipped."""
    try:
        with open(path) as fh:
            vals = [float(line) for line in fh if line.strip()]
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    return Signal(np.array(vals))


def _signal(cfg: RunConfig) -> Signal:
    if cfg.input is not None:
        return read_signal(cfg.input)
    return make_test_signal(TestSignal(cfg.generate), cfg.N, seed=cfg.seed)


# ----------------------------------------------------------------------------
# commands


def cmd_fit(cfg: RunConfig, out) -> None:
    K = cfg.K
    if cfg.kernel == "gauss":
        g = GaussianParams(cfg.sigma, K)
        target = (gauss, gauss_d, gauss_dd)[cfg.derivative]
        kind = (fa.CoefficientKind.GAUSS_COS, fa.CoefficientKind.GAUSS_DERIV_SIN, fa.CoefficientKind.GAUSS_DERIV2_COS)[
            cfg.derivative
        ]
        if cfg.tune_beta:
            beta, _ = fa.tune_beta(lambda k: target(g, k), g.K, cfg.P, kind=kind)
        else:
            beta = None
        cs = fa.fit_gaussian(g, cfg.P, beta, cfg.derivative)
        n = np.arange(-3 * g.K, 3 * g.K + 1)
        rmse = relative_rmse(cs.evaluate(n), target(g, n))
        extra = {}
    else:
        mp = MorletParams(cfg.sigma, cfg.xi, K)
        if cfg.method == "direct":
            ps = fa.select_optimal_ps(mp, mp.K, cfg.P_D, cfg.n0) if cfg.P_S is None else cfg.P_S
            cs = fa.fit_morlet_direct(mp, mp.K, ps, cfg.P_D, None, cfg.n0)
            rmse = fa.morlet_rmse(mp, fa.morlet_direct_kernel(mp, cs, cfg.n0), mp.K)
            extra = {"P_S": ps}
        else:
            cs = fa.fit_morlet_multiply(mp, mp.K, cfg.P)
            rmse = fa.morlet_rmse(mp, lambda n: ev.multiply_kernel(mp, cs, n, cfg.n0), mp.K)
            extra = {}
    if cfg.output:
        fa.save_coefficients(cs, cfg.output)
    print(f"K {cs.grid.K}", file=out)
    print(f"beta {cs.grid.beta!r}", file=out)
    for k, v in extra.items():
        print(f"{k} {v}", file=out)
    print(f"fit_rmse_percent {cs.fit_rmse!r}", file=out)
    print(f"rmse_percent {rmse!r}", file=out)


def _spec(cfg: RunConfig):
    return spec_from_abbreviation(
        cfg.abbrev,
        cfg.sigma,
        cfg.xi,
        cfg.K,
        cfg.P_S,
        cfg.derivative,
        Strategy(cfg.strategy),
        Precision(cfg.precision),
    )


def cmd_transform(cfg: RunConfig, out) -> None:
    sig = _signal(cfg)
    spec = _spec(cfg)
    comps = sliding_sum_components(cfg.variant, cfg.workers) if cfg.variant else None
    y = np.asarray(apply(sig, spec, comps).values)
    cplx = np.iscomplexobj(y)
    cols = ["n", "re", "im"] if cplx else ["n", "value"]
    if cfg.oracle:
        taps = spec.true_kernel(np.arange(-spec.K, spec.K + 1))
        o = truncated_convolution(sig, taps)
        scale = float(np.max(np.abs(o))) or 1.0
        rel = np.abs(y - o) / scale
        cols += ["oracle_re", "oracle_im"] if cplx else ["oracle"]
        cols.append("rel_error")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for i in range(len(sig)):
        row = [i] + ([_num(y[i].real), _num(y[i].imag)] if cplx else [_num(y[i])])
        if cfg.oracle:
            row += [_num(o[i].real), _num(o[i].imag)] if cplx else [_num(o[i])]
            row.append(_num(rel[i]))
        w.writerow(row)
    if cfg.oracle:
        print(f"max_rel_error {float(rel.max())!r}", file=sys.stderr)


def cmd_rmse_table(cfg: RunConfig, out) -> None:
    K = cfg.K or ev.TABLE1_K
    n0 = cfg.n0 or ev.TABLE1_N0
    reports = ev.table1_experiment(K, n0, sigma=cfg.sigma)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["transform", "P", "sigma", "beta_K_over_pi", "e_G", "e_GD", "e_GDD", "ref_G", "ref_GD", "ref_GDD", "within_band"])
    by_row = {}
    for r in reports:
        by_row.setdefault(("ASFT" if r.asft else "SFT", r.P), []).append(r)
    for (t, P), rs in by_row.items():
        vals = [r.rmse_percent for r in rs]
        ref = ev.TABLE1_REFERENCE.get((t, P), (math.nan,) * 3)
        ok = all(ev.within_band(v, q) for v, q in zip(vals, ref))
        w.writerow([t, P, _num(rs[0].sigma), _num(rs[0].beta * K / math.pi)] + [_num(v) for v in vals]
                   + [_num(q) for q in ref] + [int(ok)])


def cmd_morlet_sweep(cfg: RunConfig, out) -> None:
    sigma = cfg.sigma or ev.MORLET_SIGMA
    xis = cfg.xis or list(ev.MORLET_XIS)
    P = cfg.P if cfg.P is not None else (cfg.P_D if cfg.P_D is not None else 6)
    reports = ev.morlet_rmse_sweep(sigma, xis, cfg.method, P, cfg.n0, P_S=cfg.P_S)
    ev.write_reports_csv(reports, out)


def _median_ns(fn, reps: int, warmups: int) -> int:
    for _ in range(warmups):
        fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    return int(np.median(times))


def bench_rows(cfg: RunConfig):
    """Yield one result dict per (method, N, sigma) grid point."""
    methods = cfg.methods or ["sft", "truncated"]
    if cfg.sweep == "N":
        grid = [(N, cfg.sigmas[0] if cfg.sigmas else BENCH_FIXED_SIGMA) for N in (cfg.Ns or BENCH_NS)]
    else:
        grid = [(cfg.Ns[0] if cfg.Ns else BENCH_FIXED_N, s) for s in (cfg.sigmas or BENCH_SIGMAS)]
    prec = Precision(cfg.precision)
    P = cfg.P or 6
    comps = sliding_sum_components(cfg.variant, cfg.workers) if cfg.variant else None
    for method in methods:
        for N, sigma in grid:
            sig = make_test_signal(TestSignal.SEEDED_NOISE, N, seed=cfg.seed)
            if method == "sft":
                spec = gauss_spec(sigma, P, 0, None, 0, None, Strategy(cfg.strategy), prec)
                cost = method_cost("sft", N, sigma, P, K=spec.K)
                fn = lambda sig=sig, spec=spec: apply(sig, spec, comps)
            elif method == "truncated":
                spec = truncated_spec(sigma)
                cost = method_cost("truncated", N, sigma, P)
                fn = lambda sig=sig, spec=spec: apply(sig, spec)
            else:
                raise UsageError(f"unknown bench method {method!r}")
            yield {
                "method": method,
                "N": N,
                "sigma": sigma,
                "precision": prec.value,
                "workers": cfg.workers,
                "median_ns": _median_ns(fn, cfg.reps, cfg.warmups),
                "mults": cost.mults,
                "adds": cost.adds,
                "depth": cost.depth,
            }


BENCH_COLUMNS = ("method", "N", "sigma", "precision", "workers", "median_ns", "mults", "adds", "depth")


def cmd_bench(cfg: RunConfig, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    rows = []
    for row in bench_rows(cfg):
        rows.append(row)
        w.writerow([row[c] for c in BENCH_COLUMNS])
        out.flush()
    last = {r["method"]: r for r in rows}
    if "sft" in last and "truncated" in last and last["sft"]["median_ns"] > 0:
        speedup = last["truncated"]["median_ns"] / last["sft"]["median_ns"]
        print(
            f"speedup at N={last['sft']['N']}, sigma={last['sft']['sigma']}: {speedup:.1f}x "
            f"(reference figure on GPU hardware: {REFERENCE_SPEEDUP}x)",
            file=sys.stderr,
        )


def cmd_sliding_sum_trace(cfg: RunConfig, out) -> None:
    rng = np.random.default_rng(cfg.seed)
    f = rng.integers(-100, 100, cfg.N)
    variant = Variant(cfg.variant or "flat")
    plan = SlidingSumPlan(cfg.N, cfg.L, variant)
    if variant is Variant.FLAT:
        _, trace = sliding_sum_flat(f, cfg.L, cfg.workers, return_trace=True)
    else:
        _, trace = sliding_sum_blocked8(f, cfg.L, cfg.workers)
    print(f"# N={plan.N} L={plan.L} R={plan.R} N8={plan.N8} variant={variant.value}", file=sys.stderr)
    trace.to_csv(out)


COMMANDS = {
    "fit": cmd_fit,
    "transform": cmd_transform,
    "rmse-table": cmd_rmse_table,
    "morlet-sweep": cmd_morlet_sweep,
    "bench": cmd_bench,
    "sliding-sum-trace": cmd_sliding_sum_trace,
}


# ----------------------------------------------------------------------------
# parser


def _csv_list(conv):
    def parse(text):
        try:
            return [conv(v) for v in text.split(",") if v]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma", type=float)
    common.add_argument("--xi", type=float)
    common.add_argument("--K", type=int)
    common.add_argument("--P", type=int)
    common.add_argument("--PS", dest="P_S", type=int)
    common.add_argument("--PD", dest="P_D", type=int)
    common.add_argument("--n0", type=int)
    common.add_argument("--precision", choices=["single", "double"])
    common.add_argument("--strategy", choices=["kernel", "rec1", "rec2"])
    common.add_argument("--variant", choices=["flat", "blocked8"])
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--output", "-o")

    p = argparse.ArgumentParser(prog="sftkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", parents=[common], help="fit kernel coefficients")
    f.add_argument("--kernel", choices=["gauss", "morlet"], default="gauss")
    f.add_argument("--method", choices=["direct", "multiply"], default="direct")
    f.add_argument("--derivative", type=int, choices=[0, 1, 2])
    f.add_argument("--auto-PS", dest="auto_ps", action="store_true")
    f.add_argument("--tune-beta", dest="tune_beta", action="store_true")

    t = sub.add_parser("transform", parents=[common], help="run a named transform on a signal")
    t.add_argument("--abbrev", required=True)
    t.add_argument("--input", "-i")
    t.add_argument("--generate", choices=[k.value for k in TestSignal])
    t.add_argument("--N", type=int)
    t.add_argument("--derivative", type=int, choices=[0, 1, 2])
    t.add_argument("--oracle", action="store_true")

    sub.add_parser("rmse-table", parents=[common], help="Gaussian fit-error table")

    m = sub.add_parser("morlet-sweep", parents=[common], help="Morlet RMSE against xi")
    m.add_argument("--method", choices=["direct", "multiply", "truncated"], default="direct")
    m.add_argument("--xis", type=_csv_list(float))

    b = sub.add_parser("bench", parents=[common], help="timing sweep against truncated convolution")
    b.add_argument("--sweep", choices=["N", "sigma"], default="sigma")
    b.add_argument("--Ns", type=_csv_list(int))
    b.add_argument("--sigmas", type=_csv_list(float))
    b.add_argument("--methods", type=_csv_list(str))
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--warmups", type=int, default=2)

    s = sub.add_parser("sliding-sum-trace", parents=[common], help="per-round trace of the sliding sum")
    s.add_argument("--N", type=int, default=1024)
    s.add_argument("--L", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        cfg = RunConfig.from_namespace(ns)
    except UsageError as exc:
        parser.error(str(exc))
    out = _open_out(cfg.output) if cfg.command != "fit" else sys.stdout
    try:
        COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"sftkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, fa.FitDegenerateError) as exc:
        print(f"sftkit: error: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not sys.stdout:
            _close_out(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

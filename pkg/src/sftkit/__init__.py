"""Gaussian smoothing, Gaussian derivatives and Morlet wavelet transforms built on
sliding Fourier transforms, with a log-depth parallel sliding sum."""

from .evaluation import morlet_rmse_sweep, table1_experiment, truncation_baseline
from .fourier_approx import (
    CoefficientSet,
    FitDegenerateError,
    HarmonicGrid,
    fit_gaussian,
    fit_morlet_direct,
    fit_morlet_multiply,
    load_coefficients,
    save_coefficients,
    select_optimal_ps,
    tune_beta,
)
from .kernels import GaussianParams, MorletParams, gauss, gauss_d, gauss_dd, morlet, truncated_convolution
from .metrics import RmseReport, relative_rmse
from .parallel import (
    SlidingSumPlan,
    Variant,
    cost_model,
    sft_via_sliding_sum,
    sliding_sum_blocked8,
    sliding_sum_flat,
)
from .sft_engine import SftConfig, Strategy, asft_components, sft_components, sft_z
from .signal import BoundaryPolicy, Precision, Signal, TestSignal, make_test_signal
from .smoothers import TransformSpec, apply, gauss_spec, morlet_direct_spec, morlet_multiply_spec, spec_from_abbreviation

__version__ = "0.1.0"

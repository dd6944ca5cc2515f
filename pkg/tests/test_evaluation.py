import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sftkit.evaluation import (
    CSV_COLUMNS,
    gauss_table_row,
    k_grid,
    morlet_rmse_sweep,
    morlet_truncation_error,
    table1_layout,
    truncation_baseline,
    tune_gauss,
    within_band,
    write_reports_csv,
)
from sftkit.metrics import RmseReport, relative_rmse


def test_identical_is_zero():
    t = np.sin(np.arange(50))
    assert relative_rmse(t, t) == 0.0


def test_zero_approx_is_hundred():
    t = np.cos(np.arange(50) * 0.3) + 2
    assert relative_rmse(np.zeros_like(t), t) == pytest.approx(100.0)


def test_hand_computed():
    assert relative_rmse([1.0, 2.0], [1.0, 1.0]) == pytest.approx(100.0 * math.sqrt(1 / 2))


def test_complex_values():
    t = np.exp(1j * np.arange(10))
    assert relative_rmse(t * 1.01, t) == pytest.approx(1.0)


def test_zero_truth_rejected():
    with pytest.raises(ValueError):
        relative_rmse([1.0], [0.0])


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        relative_rmse([1.0, 2.0], [1.0])


@given(
    arrays(np.float64, 20, elements=st.floats(-10, 10)),
    arrays(np.float64, 20, elements=st.floats(-10, 10)),
    st.floats(0.01, 100).flatmap(lambda c: st.sampled_from([c, -c])),
)
def test_scale_invariant(a, t, c):
    if np.sum(t**2) < 1e-6:
        t = t + 1.0
    assert relative_rmse(c * a, c * t) == pytest.approx(relative_rmse(a, t), rel=1e-9, abs=1e-9)


def test_report_rejects_negative():
    with pytest.raises(ValueError):
        RmseReport("G", "gauss", "direct", 2, False, (-1, 1), -0.1)


def test_truncation_baseline():
    rep = truncation_baseline()
    assert rep.interval == (-768, 768)
    assert abs(rep.rmse_percent - 0.46) <= 0.05


def test_k_grid_bounds():
    g = k_grid(60.0)
    assert g[0] == 120 and g[-1] == 240 and all(b - a == 4 for a, b in zip(g, g[1:]))


def test_within_band():
    assert within_band(1.25, 1.0) and not within_band(1.35, 1.0)
    assert within_band(0.021, 0.002) and not within_band(0.03, 0.002)


@pytest.mark.parametrize("P", [2, 3, 4])
def test_error_ordering(P):
    # any sensible (sigma, beta) gives e(G) < e(G_D) < e(G_DD)
    row = gauss_table_row(tune_gauss(P, 256, 0, sigma=70.0), 256, 0)
    e = [r.rmse_percent for r in row]
    assert e[0] < e[1] < e[2]


def test_tuned_sigma_beats_fixed():
    fixed = tune_gauss(4, 256, 0, sigma=256 / 3)
    free = tune_gauss(4, 256, 0, sigma_range=(60.0, 72.0))
    assert free.error < fixed.error
    assert fixed.error > 0.4  # the fixed K/3 width is limited by truncation


def test_layout_rows():
    row = gauss_table_row(tune_gauss(3, 256, 10, sigma=70.0), 256, 10)
    (t, P, eg, egd, egdd), = table1_layout(row)
    assert (t, P) == ("ASFT", 3) and eg < egd < egdd


def test_morlet_small_xi_prefers_direct():
    K = range(120, 241, 12)
    d = morlet_rmse_sweep(60.0, (2.0,), "direct", 5, K_values=K)[0]
    m = morlet_rmse_sweep(60.0, (2.0,), "multiply", 2, K_values=K)[0]
    assert d.rmse_percent < m.rmse_percent


def test_morlet_direct_vs_multiply_xi10():
    K = range(180, 241, 4)
    d = morlet_rmse_sweep(60.0, (10.0,), "direct", 7, K_values=K)[0]
    m = morlet_rmse_sweep(60.0, (10.0,), "multiply", 3, K_values=K)[0]
    assert 0.5 < d.rmse_percent / m.rmse_percent < 2.0


@pytest.mark.parametrize("method,P", [("direct", 7), ("multiply", 3)])
def test_morlet_sft_vs_asft(method, P):
    K = range(180, 241, 4)
    a = morlet_rmse_sweep(60.0, (10.0,), method, P, n0=0, K_values=K)[0].rmse_percent
    b = morlet_rmse_sweep(60.0, (10.0,), method, P, n0=10, K_values=K)[0].rmse_percent
    assert max(a, b) / min(a, b) < 1.5


def test_morlet_truncation_is_a_floor_reference():
    assert 0 < morlet_truncation_error(60.0, 10.0) < 1.0
    rep = morlet_rmse_sweep(60.0, (4.0,), "truncated")[0]
    assert rep.abbreviation == "MCT3" and rep.K == 180


def test_csv_columns():
    reps = morlet_rmse_sweep(60.0, (6.0,), "direct", 5, K_values=[180])
    buf = io.StringIO()
    write_reports_csv(reps, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    cells = lines[1].split(",")
    assert cells[0] == "MDP5" and cells[4] == "180"
    assert float(cells[-1]) == reps[0].rmse_percent

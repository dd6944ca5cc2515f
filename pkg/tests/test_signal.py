import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sftkit.signal import BoundaryPolicy, Precision, Signal, TestSignal, extended_range, extended_sample, make_test_signal


def test_clamp_left_edge():
    assert extended_sample(Signal([1, 2, 3], BoundaryPolicy.CLAMP), -5) == 1


def test_zero_right_edge():
    assert extended_sample(Signal([1, 2, 3], BoundaryPolicy.ZERO), 3) == 0


def test_interior_identity():
    assert extended_sample(Signal([1, 2, 3], BoundaryPolicy.CLAMP), 1) == 2


def test_default_boundary_is_clamp():
    assert Signal([1.0]).boundary is BoundaryPolicy.CLAMP


@pytest.mark.parametrize("bad", [[], [1.0, np.nan], [np.inf]])
def test_rejects_empty_or_nonfinite(bad):
    with pytest.raises(ValueError):
        Signal(bad)


def test_samples_are_read_only():
    sig = Signal([1.0, 2.0])
    with pytest.raises(ValueError):
        sig.samples[0] = 5.0


def test_generators():
    np.testing.assert_array_equal(make_test_signal(TestSignal.CONSTANT, 4).samples, [1, 1, 1, 1])
    np.testing.assert_array_equal(make_test_signal(TestSignal.IMPULSE, 5).samples, [0, 0, 1, 0, 0])
    a = make_test_signal(TestSignal.SEEDED_NOISE, 3, seed=42).samples
    b = make_test_signal(TestSignal.SEEDED_NOISE, 3, seed=42).samples
    assert a.tobytes() == b.tobytes()
    assert np.all(np.abs(make_test_signal("noise", 1000, seed=1).samples) <= 1)
    chirp = make_test_signal("chirp", 64).samples
    assert chirp[0] == 0.0 and np.all(np.abs(chirp) <= 1)


def test_zero_length_generator():
    with pytest.raises(ValueError):
        make_test_signal(TestSignal.CONSTANT, 0)


def test_precision_dtypes():
    assert Precision.SINGLE.real_dtype == np.float32
    assert Precision.DOUBLE.complex_dtype == np.complex128


@given(
    st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30),
    st.sampled_from(list(BoundaryPolicy)),
    st.integers(-50, 80),
)
def test_extension_rules(values, policy, n):
    sig = Signal(values, policy)
    N = len(values)
    got = extended_sample(sig, n)
    if 0 <= n < N:
        assert got == values[n]
    elif policy is BoundaryPolicy.ZERO:
        assert got == 0.0
    else:
        assert got == (values[0] if n < 0 else values[-1])
    # vectorised path agrees with the scalar one
    assert extended_range(sig, n, n + 1)[0] == got


@given(st.floats(-10, 10), st.integers(1, 20), st.integers(-100, 100))
def test_clamped_constant_is_constant(c, N, n):
    assert extended_sample(Signal([c] * N), n) == c

import numpy as np
import pytest
import scipy.fft
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from treeadapt.transforms import dct, dft, dft_magnitudes, dst

vectors = arrays(np.float64, st.integers(2, 12), elements=st.floats(-100, 100))


@pytest.mark.parametrize("kind", [1, 2, 3])
@pytest.mark.parametrize("d", [2, 3, 5, 8, 13])
def test_against_direct_sums(kind, d):
    x = np.random.default_rng(d * kind).normal(size=d)
    np.testing.assert_allclose(dct(kind, x), oracles.dct(kind, list(x)), atol=1e-12)
    np.testing.assert_allclose(dst(kind, x), oracles.dst(kind, list(x)), atol=1e-12)


@pytest.mark.parametrize("kind", [1, 2, 3])
def test_half_of_scipy_unnormalized(kind):
    x = np.random.default_rng(kind).normal(size=(4, 9))
    np.testing.assert_allclose(dct(kind, x), scipy.fft.dct(x, type=kind) / 2, atol=1e-12)
    np.testing.assert_allclose(dst(kind, x), scipy.fft.dst(x, type=kind) / 2, atol=1e-12)


def test_constant_input_only_dc():
    out = dct(2, np.full(6, 2.0))
    assert out[0] == pytest.approx(12.0)
    np.testing.assert_allclose(out[1:], 0, atol=1e-12)


def test_dct_round_trip_scale():
    # DCT-III(DCT-II(x)) = (N/2) x for these un-normalized forms
    x = np.random.default_rng(5).normal(size=7)
    np.testing.assert_allclose(dct(3, dct(2, x)), 7 / 2 * x, atol=1e-12)


def test_length_rules():
    assert dct(2, [3.0])[0] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        dct(1, [1.0])
    with pytest.raises(ValueError):
        dct(4, [1.0, 2.0])
    np.testing.assert_allclose(dst(1, [2.0]), oracles.dst(1, [2.0]))


def test_zero_vector():
    for kind in (1, 2, 3):
        assert not np.any(dst(kind, np.zeros(5)))


@settings(max_examples=40)
@given(vectors, st.integers(1, 3))
def test_linearity(x, kind):
    y = np.roll(x, 1) * 0.5
    np.testing.assert_allclose(dst(kind, x + y), dst(kind, x) + dst(kind, y), atol=1e-9)
    np.testing.assert_allclose(dct(kind, x + y), dct(kind, x) + dct(kind, y), atol=1e-9)


def test_dft_direct_and_symmetry():
    x = np.random.default_rng(8).normal(size=8)
    np.testing.assert_allclose(dft(x), oracles.dft(list(x)), atol=1e-9)
    mags = dft_magnitudes(x)
    np.testing.assert_allclose(mags[1:], mags[1:][::-1], atol=1e-12)
    np.testing.assert_allclose(dft_magnitudes([1, 1, 1, 1]), [4, 0, 0, 0], atol=1e-12)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import chebyshev, dft_loop, gaussian_fourier
from tomolab.harmonics import (
    angular_decompose,
    angular_synthesize,
    chebyshev_T,
    chebyshev_T_ext,
    chebyshev_T_recursive,
    dft_1d,
    dft_1d_direct,
    dft_2d,
    idft_1d,
    idft_2d,
    image_from_spectrum,
    image_spectrum,
    image_spectrum_direct,
    spectrum_freqs,
)

vectors = st.integers(2, 40).flatmap(lambda n: arrays(float, n, elements=st.floats(-1e3, 1e3)))


@given(vectors)
def test_dft_matches_loop(x):
    assert np.allclose(dft_1d(x), dft_loop(x), atol=1e-9)
    assert np.allclose(dft_1d_direct(x), dft_loop(x), atol=1e-9)


@given(vectors)
def test_inverse_and_parseval(x):
    a = dft_1d(x)
    assert np.allclose(idft_1d(a).real, x, atol=1e-9)
    # averaging normalization: mean |f|^2 = sum |a_k|^2
    assert np.sum(np.abs(a) ** 2) == pytest.approx(np.mean(x**2), rel=1e-9, abs=1e-12)


def test_single_sample_rejected():
    with pytest.raises(ValueError):
        dft_1d([1.0])


def test_2d_round_trip(rng):
    x = rng.standard_normal((12, 12))
    assert np.allclose(idft_2d(dft_2d(x)).real, x)


def test_angular_series_with_offset_angles():
    theta = 0.3 + 2 * np.pi * np.arange(32) / 32
    r = np.linspace(0.1, 1, 5)
    f = r[:, None] ** 2 * np.cos(3 * theta)[None, :] + r[:, None] * np.sin(theta)[None, :]
    spec = angular_decompose(f, r, theta, K=8)
    assert np.allclose(spec.harmonic(3), r**2 / 2)
    assert np.allclose(spec.harmonic(1), r / 2j)
    assert np.allclose(spec.harmonic(2), 0)
    assert np.allclose(angular_synthesize(spec, theta).real, f)


def test_nyquist_limit():
    theta = 2 * np.pi * np.arange(8) / 8
    with pytest.raises(ValueError):
        angular_decompose(np.ones((4, 8)), np.arange(4) + 1.0, theta, K=4)


@given(st.integers(0, 12), st.floats(-1, 1))
def test_chebyshev_forms_agree(k, x):
    assert chebyshev_T(k, x) == pytest.approx(chebyshev(k, x), abs=1e-9)
    assert chebyshev_T_recursive(k, x) == pytest.approx(chebyshev(k, x), abs=1e-9)


@given(st.integers(0, 10), st.floats(1.0, 3.0))
def test_chebyshev_outside_interval(k, x):
    ref = chebyshev(k, x)
    assert chebyshev_T_ext(k, x) == pytest.approx(ref, rel=1e-9)
    assert chebyshev_T_ext(k, -x) == pytest.approx(chebyshev(k, -x), rel=1e-9)


def test_chebyshev_T_refuses_outside():
    with pytest.raises(ValueError):
        chebyshev_T(2, 1.5)


def test_image_spectrum_of_gaussian():
    n, s, c = 128, 0.2, (0.1, -0.15)
    a = -1 + (np.arange(n) + 0.5) * 2 / n
    x1, x2 = np.meshgrid(a, a, indexing="ij")
    vals = np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / s**2)
    spec = image_spectrum(vals)
    xi = spectrum_freqs(n)
    k1, k2 = np.meshgrid(xi, xi, indexing="ij")
    exact = gaussian_fourier(k1, k2, s, c)
    low = np.hypot(k1, k2) < 40
    # the only discrepancy is the Gaussian tail cut at the square
    assert np.abs(spec - exact)[low].max() < 1e-9
    direct = image_spectrum_direct(vals, k1[low][:50], k2[low][:50])
    assert np.allclose(direct, spec[low][:50], atol=1e-12)
    assert np.allclose(image_from_spectrum(spec, n).real, vals, atol=1e-12)

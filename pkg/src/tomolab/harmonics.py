"""Discrete Fourier machinery and Chebyshev polynomials.

Normalization follows the averaging convention
``a_k = (1/N) sum_j f_j exp(-i k 2 pi j / N)``, the discrete counterpart of
``(1/2pi) int e^{-ik theta} f(theta) d theta``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AngularSpectrum",
    "TorusSpectrum",
    "dft_1d",
    "idft_1d",
    "dft_1d_direct",
    "dft_2d",
    "idft_2d",
    "fft_freqs",
    "angular_decompose",
    "angular_synthesize",
    "chebyshev_T",
    "chebyshev_T_recursive",
    "chebyshev_T_ext",
    "spectrum_freqs",
    "image_spectrum",
    "image_from_spectrum",
    "image_spectrum_direct",
]


def dft_1d(values, axis=-1):
    """Coefficients a_k for k = 0..N-1 (numpy FFT ordering)."""
    values = np.asarray(values)
    n = values.shape[axis]
    if n < 2:
        raise ValueError(f"DFT needs at least 2 samples, got {n}")
    return np.fft.fft(values, axis=axis) / n


def idft_1d(coeffs, axis=-1):
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[axis]
    if n < 2:
        raise ValueError(f"DFT needs at least 2 samples, got {n}")
    return np.fft.ifft(coeffs, axis=axis) * n


def dft_1d_direct(values):
    """O(N^2) reference sum, same normalization as :func:`dft_1d`."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    if n < 2:
        raise ValueError(f"DFT needs at least 2 samples, got {n}")
    j = np.arange(n)
    kernel = np.exp(-2j * np.pi * np.outer(j, j) / n)
    return kernel @ values / n


def dft_2d(values):
    values = np.asarray(values)
    return np.fft.fft2(values) / values.size


def idft_2d(coeffs):
    coeffs = np.asarray(coeffs)
    return np.fft.ifft2(coeffs) * coeffs.size


def fft_freqs(n):
    """Signed integer frequencies in numpy FFT order."""
    return np.fft.fftfreq(n, d=1.0 / n).astype(int)


@dataclass
class AngularSpectrum:
    """Per-radius angular Fourier coefficients a_k(r_i), |k| <= K.

    ``coeffs[i, K + k]`` holds a_k(radii[i]).
    """

    radii: np.ndarray
    K: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.radii.size, 2 * self.K + 1):
            raise ValueError(
                f"coefficient table must be ({self.radii.size}, {2 * self.K + 1}), got {self.coeffs.shape}"
            )

    def harmonic(self, k):
        if abs(k) > self.K:
            return np.zeros(self.radii.size, dtype=complex)
        return self.coeffs[:, self.K + k]

    @property
    def ks(self):
        return np.arange(-self.K, self.K + 1)


@dataclass
class TorusSpectrum:
    """Fourier coefficients on the N x N torus lattice in numpy FFT order."""

    N: int
    coeffs: np.ndarray

    def coefficient(self, k):
        return self.coeffs[k[0] % self.N, k[1] % self.N]


def _check_uniform_theta(theta):
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    expected = theta[0] + 2.0 * np.pi * np.arange(n) / n
    if n < 2 or not np.allclose(theta, expected, rtol=0.0, atol=1e-10):
        raise ValueError("angular samples must be uniform on [theta_0, theta_0 + 2 pi)")
    return theta


def angular_decompose(samples, radii, theta, K=None):
    """Angular Fourier coefficients of polar samples.

    Parameters
    ----------
    samples : array, shape (M, Ntheta)
        ``samples[i, j] = f(radii[i], theta[j])``.
    radii : array, shape (M,)
    theta : array, shape (Ntheta,)
        Uniform on [0, 2 pi) (a constant offset is allowed and compensated).
    K : int, optional
        Largest harmonic kept, default ``Ntheta // 2 - 1``.

    Returns
    -------
    AngularSpectrum
    """
    samples = np.asarray(samples)
    theta = _check_uniform_theta(theta)
    nt = theta.size
    if K is None:
        K = nt // 2 - 1
    if K > nt // 2 - 1:
        raise ValueError(f"K = {K} exceeds the Nyquist limit {nt // 2 - 1} for {nt} angles")
    full = dft_1d(samples, axis=1)
    ks = np.arange(-K, K + 1)
    coeffs = full[:, ks % nt] * np.exp(-1j * ks * theta[0])[None, :]
    if np.isrealobj(samples):
        # exact conjugate symmetry for real data
        pos = coeffs[:, K + 1 :]
        coeffs[:, :K] = np.conj(pos[:, ::-1])
        coeffs[:, K] = coeffs[:, K].real
    return AngularSpectrum(np.asarray(radii, dtype=float), K, coeffs)


def angular_synthesize(spectrum, theta):
    """Evaluate sum_k a_k(r) e^{ik theta} on a uniform theta grid."""
    theta = _check_uniform_theta(theta)
    nt = theta.size
    if spectrum.K > nt // 2 - 1:
        raise ValueError(f"K = {spectrum.K} exceeds the Nyquist limit {nt // 2 - 1} for {nt} angles")
    table = np.zeros((spectrum.radii.size, nt), dtype=complex)
    ks = spectrum.ks
    table[:, ks % nt] = spectrum.coeffs * np.exp(1j * ks * theta[0])[None, :]
    return idft_1d(table, axis=1)


def chebyshev_T(k, x):
    """T_|k|(x) = cos(|k| arccos x) for |x| <= 1."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("chebyshev_T is defined here for |x| <= 1; use chebyshev_T_ext outside")
    return np.cos(abs(int(k)) * np.arccos(x))


def chebyshev_T_recursive(k, x):
    """Three-term recursion T_k = 2x T_{k-1} - T_{k-2}; reference implementation."""
    x = np.asarray(x, dtype=float)
    k = abs(int(k))
    t_prev, t = np.ones_like(x), x.copy()
    if k == 0:
        return t_prev
    for _ in range(k - 1):
        t_prev, t = t, 2.0 * x * t - t_prev
    return t


def chebyshev_T_ext(k, x):
    """T_|k| on the whole real line: cosine form inside [-1, 1], cosh form outside."""
    x = np.asarray(x, dtype=float)
    k = abs(int(k))
    out = np.empty_like(x)
    inside = np.abs(x) <= 1.0
    out[inside] = np.cos(k * np.arccos(x[inside]))
    xo = x[~inside]
    out[~inside] = np.sign(xo) ** k * np.cosh(k * np.arccosh(np.abs(xo)))
    return out


# -- continuous-transform helpers for images on [-1, 1]^2 --------------------
#
# A lattice of n pixels zero-padded by ``pad`` spans a period of 2*pad, so the
# frequency lattice has spacing pi/pad:  xi_m = pi*m/pad.  The transform
# F(xi) = int f(x) exp(-i xi.x) dx is approximated by the pixel sum.


def spectrum_freqs(n, pad=2):
    """Angular frequencies xi_m (numpy FFT order) for an n-pixel axis padded by ``pad``."""
    q = pad * n
    return np.pi / pad * fft_freqs(q)


def image_spectrum(values, pad=2):
    """Pixel-sum approximation of F(xi) on the padded frequency lattice."""
    values = np.asarray(values)
    n = values.shape[0]
    q = pad * n
    spacing = 2.0 / n
    x0 = -1.0 + spacing / 2.0
    xi = spectrum_freqs(n, pad)
    spec = np.fft.fft2(values, s=(q, q)) * spacing**2
    phase = np.exp(-1j * xi * x0)
    return spec * phase[:, None] * phase[None, :]


def image_from_spectrum(spec, n, pad=2):
    """Inverse of :func:`image_spectrum`, cropped back to the n x n lattice."""
    q = pad * n
    if spec.shape != (q, q):
        raise ValueError(f"spectrum must be {q} x {q} for n={n}, pad={pad}")
    spacing = 2.0 / n
    x0 = -1.0 + spacing / 2.0
    xi = spectrum_freqs(n, pad)
    phase = np.exp(1j * xi * x0)
    vals = np.fft.ifft2(spec * phase[:, None] * phase[None, :]) * q * q / (2.0 * pad) ** 2
    return vals[:n, :n]


def image_spectrum_direct(values, xi1, xi2):
    """Direct pixel sum of f(x) exp(-i xi.x) dx at arbitrary frequencies (reference)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    spacing = 2.0 / n
    x = -1.0 + (np.arange(n) + 0.5) * spacing
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    e1 = np.exp(-1j * np.outer(xi1, x))
    e2 = np.exp(-1j * np.outer(xi2, x))
    return np.einsum("ki,ij,kj->k", e1, values, e2) * spacing**2

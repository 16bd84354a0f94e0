"""The flat torus: periodization, periodic-geodesic X-ray transforms, Fourier recovery.

Torus coordinates are ``y = pi * (x + 1 - spacing/2)`` mod 2 pi, which puts
pixel i of an n-pixel image on lattice point ``2 pi i / n``.  The unit disc
lands strictly inside one period.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np

from .grid import ImageGrid
from .harmonics import TorusSpectrum, dft_1d, dft_2d, fft_freqs, idft_2d

__all__ = [
    "TorusField",
    "periodize",
    "unperiodize",
    "reduce_direction",
    "orbit_labels",
    "torus_xray",
    "field_evaluator",
    "FieldEvaluator",
    "SinogramTorusEvaluator",
    "torus_fourier_recover",
    "direction_for",
]


@dataclass
class TorusField:
    """Complex samples on the lattice (2 pi i / N, 2 pi j / N)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"TorusField needs a square array, got {self.values.shape}")

    @property
    def N(self):
        return self.values.shape[0]

    def spectrum(self):
        return TorusSpectrum(self.N, dft_2d(self.values))

    @classmethod
    def from_spectrum(cls, spectrum):
        return cls(idft_2d(spectrum.coeffs))

    @classmethod
    def from_function(cls, func, N):
        y = 2.0 * np.pi * np.arange(N) / N
        y1, y2 = np.meshgrid(y, y, indexing="ij")
        return cls(func(y1, y2) * np.ones_like(y1))

    def integral(self):
        """Torus quadrature of the field (lattice cell area (2 pi / N)^2)."""
        return complex(self.values.sum() * (2.0 * np.pi / self.N) ** 2)


def periodize(f):
    """Single-tile periodic copy of a supported image."""
    if not f.supported:
        raise ValueError("periodize needs an ImageGrid with the support flag set")
    return TorusField(f.values.astype(complex))


def unperiodize(spectrum, real=True):
    """Synthesize a torus spectrum and restrict it to the unit disc."""
    vals = idft_2d(spectrum.coeffs)
    if real:
        vals = vals.real
    img = ImageGrid(np.zeros(vals.shape))
    return ImageGrid(np.where(img.radius() < 1.0, vals, 0.0))


def reduce_direction(w):
    w1, w2 = int(w[0]), int(w[1])
    if w1 == 0 and w2 == 0:
        raise ValueError("the zero direction has no X-ray transform")
    d = gcd(w1, w2)
    return w1 // d, w2 // d


def orbit_labels(N, w):
    """Label ``(a w2 - b w1) mod N`` of each lattice point; constant on the orbits of w."""
    w1, w2 = reduce_direction(w)
    a = np.arange(N)
    return np.mod(a[:, None] * w2 - a[None, :] * w1, N)


def _orbit_means(field, w):
    N = field.N
    labels = orbit_labels(N, w)
    vals = field.values.ravel()
    flat = labels.ravel()
    re = np.bincount(flat, weights=vals.real, minlength=N)
    im = np.bincount(flat, weights=vals.imag, minlength=N)
    return (re + 1j * im) / N, labels


def torus_xray(field, w):
    """Average of the field along the closed geodesic t -> y + 2 pi t w, t in [0, 1).

    With w reduced, the N samples t = m/N land on the N lattice points of
    the orbit, and the equal-weight sum is the exact discrete average.
    """
    means, labels = _orbit_means(field, w)
    return TorusField(means[labels])


class FieldEvaluator:
    """``w -> I_w field`` for a known torus field."""

    def __init__(self, field):
        self.field = field
        self.N = field.N

    def profile(self, w):
        """Geodesic averages indexed by orbit label."""
        return _orbit_means(self.field, w)[0]

    def __call__(self, w):
        return torus_xray(self.field, w)


def field_evaluator(field):
    return FieldEvaluator(field)


class SinogramTorusEvaluator:
    """Torus X-ray transforms of the periodized image assembled from planar line integrals.

    A closed geodesic with reduced direction w covers, in planar coordinates,
    the parallel lines at offsets spaced 2/|w| apart; its average is the sum
    of their line integrals divided by 2|w|.
    """

    def __init__(self, g, N):
        self.g = g
        self.N = int(N)

    def profile(self, w):
        """Geodesic averages indexed by orbit label."""
        w1, w2 = reduce_direction(w)
        N = self.N
        norm = np.hypot(w1, w2)
        n1, n2 = w2 / norm, -w1 / norm
        theta = np.arctan2(n2, n1)
        spacing = 2.0 / N
        c = np.arange(N)
        base = 2.0 * c / (N * norm) + (-1.0 + spacing / 2.0) * (n1 + n2)
        reach = 1.0 + 2.0 * self.g.delta
        j_lo = int(np.floor((-reach - base.max()) * norm / 2.0))
        j_hi = int(np.ceil((reach - base.min()) * norm / 2.0))
        j = np.arange(j_lo, j_hi + 1)
        p = base[:, None] + 2.0 * j[None, :] / norm
        vals = self.g.evaluate(p, np.full(p.shape, theta))
        return vals.sum(axis=1) / (2.0 * norm)

    def __call__(self, w):
        labels = orbit_labels(self.N, w)
        return TorusField(self.profile(w)[labels].astype(complex))


def direction_for(k):
    """Reduced w with k . w = 0; (1, 0) for k = 0."""
    k1, k2 = int(k[0]), int(k[1])
    if k1 == 0 and k2 == 0:
        return (1, 0)
    w = reduce_direction((-k2, k1))
    # w and -w give the same transform; keep one representative
    if w[0] < 0 or (w[0] == 0 and w[1] < 0):
        w = (-w[0], -w[1])
    return w


def torus_fourier_recover(evaluate, N, k_max):
    """Fourier coefficients |k_i| <= k_max read off the torus X-ray transforms.

    Parameters
    ----------
    evaluate : callable
        ``evaluate(w)`` returns the TorusField ``I_w f``.  Evaluators that
        also expose ``profile(w)`` (the values per orbit label) take a
        1D-transform shortcut.
    N : int
        Lattice size.
    k_max : int
        Must satisfy ``k_max < N / 2``.

    Returns
    -------
    TorusSpectrum
        Coefficients outside the box are zero.
    """
    N = int(N)
    if not 0 <= k_max < N / 2:
        raise ValueError(f"k_max = {k_max} must satisfy 0 <= k_max < N/2 = {N / 2}")
    groups = {}
    ks = range(-k_max, k_max + 1)
    for k1 in ks:
        for k2 in ks:
            groups.setdefault(direction_for((k1, k2)), []).append((k1, k2))
    coeffs = np.zeros((N, N), dtype=complex)
    profile = getattr(evaluate, "profile", None)
    for w in sorted(groups):
        if profile is None:
            spec = dft_2d(evaluate(w).values)
            for k1, k2 in groups[w]:
                coeffs[k1 % N, k2 % N] = spec[k1 % N, k2 % N]
            continue
        # the field is P[(a w2 - b w1) mod N]; its coefficient at
        # k = m (w2, -w1) is the 1D coefficient of P at m
        spec = dft_1d(profile(w))
        for k1, k2 in groups[w]:
            m = k1 // w[1] if w[1] else -k2 // w[0]
            coeffs[k1 % N, k2 % N] = spec[m % N]
    return TorusSpectrum(N, coeffs)


def band_limited_field(N, k_max, rng):
    """Random real trigonometric polynomial with |k_i| <= k_max (test helper)."""
    coeffs = np.zeros((N, N), dtype=complex)
    ks = np.arange(-k_max, k_max + 1) % N
    block = rng.standard_normal((ks.size, ks.size)) + 1j * rng.standard_normal((ks.size, ks.size))
    coeffs[np.ix_(ks, ks)] = block
    # Hermitian symmetrization gives a real field
    f = fft_freqs(N)
    coeffs = 0.5 * (coeffs + np.conj(coeffs[np.ix_(-f % N, -f % N)]))
    return TorusField.from_spectrum(TorusSpectrum(N, coeffs))

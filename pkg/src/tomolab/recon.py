"""Reconstruction engines: Cormack, circular averages, FBP, Fourier slice, torus.

Also the exterior (support-theorem) reconstruction and the limited-angle
frequency recovery with its coverage map.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .abel import RadialProfile, abel_inverse, interp_local_cubic
from .grid import ImageGrid
from .harmonics import (
    AngularSpectrum,
    angular_decompose,
    angular_synthesize,
    image_from_spectrum,
    image_spectrum,
    spectrum_freqs,
)
from .projector import TWO_PI, Sinogram, backproject_values, sinogram_theta

__all__ = [
    "FBP_SCALE",
    "CORMACK_MAX_GAIN",
    "EXTERIOR_MAX_GAIN",
    "DirectionMask",
    "FrequencyCoverage",
    "LimitedAngleResult",
    "recon_cormack",
    "recon_radon",
    "radon_point",
    "recon_fbp",
    "fbp_filtered",
    "calibrate_fbp",
    "recon_fourier_slice",
    "slice_spectrum",
    "recon_torus",
    "recon_exterior",
    "dperp",
    "recon_limited_angle",
]

# Ramp-filter scale fitted by calibrate_fbp on the reference Gaussian
# (sigma 0.3 at the origin, n=256, Nr=400, Ntheta=360) and frozen here.
FBP_SCALE = 0.0791170086498094

# Kernel gain ceiling used by the Cormack engines (see abel_inverse).
CORMACK_MAX_GAIN = 1e6

# The exterior kernels grow like T_k(1/R); beyond this cap the pixel-scale
# harmonics of the data dominate.
EXTERIOR_MAX_GAIN = 1e3

PAD = 2

# backprojection window half-width used by FBP
FBP_EXTENT = 2


def _default_n(g, n):
    if n is None:
        n = g.n_r + (g.n_r % 2)
    if n < 2 or n % 2:
        raise ValueError(f"output size must be a positive even integer, got {n}")
    return int(n)


# -- Cormack ---------------------------------------------------------------


def _cormack_profiles(g, K):
    """Angular harmonics b_k(s) of the data at s = |r_i| > 0, folded over r -> -r.

    g(-s, theta) = g(s, theta + pi), so the negative-offset half contributes
    (-1)^k times its own harmonic; both halves are averaged.
    """
    if g.n_r % 2:
        raise ValueError("Cormack reconstruction needs an even number of offsets")
    nt = g.n_theta
    if K is None:
        K = nt // 2 - 1
    if K > nt // 2 - 1:
        raise ValueError(f"K = {K} exceeds the Nyquist limit {nt // 2 - 1} for {nt} angles")
    half = g.n_r // 2
    s = g.r[half:]
    pos = angular_decompose(g.values[half:], s, g.theta, K)
    neg = angular_decompose(g.values[:half][::-1], s, g.theta, K)
    sign = (-1.0) ** np.abs(pos.ks)
    coeffs = 0.5 * (pos.coeffs + sign[None, :] * neg.coeffs)
    return AngularSpectrum(s, K, coeffs)


def _resample_profile(s, b, k, radii):
    """Local cubic interpolation of data harmonics onto the Abel grid.

    The data grid is extended by its mirror image at -s (parity (-1)^k) and
    by a zero at s = 1 + delta, where all line integrals vanish.
    """
    step = s[1] - s[0]
    ext_s = np.concatenate([[-s[1], -s[0]], s, [s[-1] + step]])
    sign = (-1.0) ** abs(k)
    ext_b = np.concatenate([[sign * b[1], sign * b[0]], b, [0.0]])
    return interp_local_cubic(ext_s, ext_b, radii)


def _polar_to_cartesian(radii, theta, table, n, inner=None):
    """Bilinear resampling of polar samples ``table[i, j] = f(radii[i], theta[j])``.

    Values beyond ``radii[-1]`` are zero.  Below ``radii[0]`` the first ring
    is used (or ``inner``, the value at the origin, if given, interpolated
    linearly towards the first ring).
    """
    img = ImageGrid.zeros(n, supported=False)
    x1, x2 = img.mesh()
    rho = np.hypot(x1, x2)
    phi = np.mod(np.arctan2(x2, x1), TWO_PI)
    nt = theta.size
    pos = np.mod(phi - theta[0], TWO_PI) / (TWO_PI / nt)
    j0 = np.floor(pos).astype(np.intp) % nt
    wt = pos - np.floor(pos)
    j1 = (j0 + 1) % nt
    if inner is not None:
        radii = np.concatenate([[0.0], radii])
        table = np.concatenate([np.full((1, nt), inner), table])
    h = radii[1] - radii[0]
    u = np.clip((rho - radii[0]) / h, 0.0, radii.size - 1.0)
    i0 = np.minimum(u.astype(np.intp), radii.size - 2)
    wr = u - i0
    ring0 = table[i0, j0] * (1 - wt) + table[i0, j1] * wt
    ring1 = table[i0 + 1, j0] * (1 - wt) + table[i0 + 1, j1] * wt
    out = ring0 * (1 - wr) + ring1 * wr
    out[rho > radii[-1]] = 0.0
    return out


def _cormack_core(g, M, K, max_gain, r_min=0.0):
    spec = _cormack_profiles(g, K)
    K = spec.K
    radii = np.arange(1, M + 1) / M
    keep = radii > r_min
    radii = radii[keep]
    if radii.size < 4:
        raise ValueError("too few radial samples outside the excluded radius")
    s = spec.radii
    data_keep = s > r_min
    coeffs = np.zeros((radii.size, 2 * K + 1), dtype=complex)
    resolved = np.ones(radii.size, dtype=bool)
    for k in range(K + 1):
        b = spec.harmonic(k)
        if r_min > 0:
            # only data beyond r_min may enter: interpolate within that band
            vals = interp_local_cubic(
                np.concatenate([s[data_keep], [s[-1] + (s[1] - s[0])]]),
                np.concatenate([b[data_keep], [0.0]]),
                radii,
            )
        else:
            vals = _resample_profile(s, b, k, radii)
        h = abel_inverse(k, RadialProfile(radii, vals), max_gain=max_gain)
        coeffs[:, K + k] = h.values
        if k:
            coeffs[:, K - k] = np.conj(h.values)
        resolved &= h.resolved | (np.abs(h.values) == 0)
    return AngularSpectrum(radii, K, coeffs)


def recon_cormack(g, n=None, M=None, K=None, max_gain=CORMACK_MAX_GAIN):
    """Harmonic-by-harmonic inversion through the generalized Abel transforms.

    Parameters
    ----------
    g : Sinogram
    n : int, optional
        Output lattice size (default: Nr rounded to even).
    M : int, optional
        Radial samples on (0, 1] for the Abel inversion (default Nr/2).
    K : int, optional
        Highest harmonic (default Ntheta/2 - 1).
    max_gain : float
        Kernel amplification ceiling passed to abel_inverse.

    Returns
    -------
    ImageGrid
    """
    n = _default_n(g, n)
    M = M or g.n_r // 2
    h = _cormack_core(g, M, K, max_gain)
    theta = sinogram_theta(g.n_theta)
    table = angular_synthesize(h, theta).real
    h0 = h.harmonic(0).real
    # even extension of the k=0 profile to the origin
    origin = (4.0 * h0[0] - h0[1]) / 3.0
    return ImageGrid(_polar_to_cartesian(h.radii, theta, table, n, inner=origin))


def recon_exterior(g, R, n=None, M=None, K=None, max_gain=EXTERIOR_MAX_GAIN):
    """Cormack reconstruction on {R < |x| <= 1} from lines with |r| > R only.

    Samples at |r| <= R are never read.  Pixels with |x| <= R are NaN.
    """
    R = float(R)
    if not 0.0 < R < 1.0:
        raise ValueError(f"exterior radius must lie in (0, 1), got {R}")
    n = _default_n(g, n)
    M = M or g.n_r // 2
    h = _cormack_core(g, M, K, max_gain, r_min=R)
    theta = sinogram_theta(g.n_theta)
    table = angular_synthesize(h, theta).real
    out = _polar_to_cartesian(h.radii, theta, table, n)
    rho = ImageGrid.zeros(n, supported=False).radius()
    out[rho <= R] = np.nan
    return ImageGrid(out)


# -- circular averages -----------------------------------------------------


def _radon_weights(h, r_max):
    """Correlation weights turning a sinogram column into the radial integral.

    With F(r) the circular average and r_m = m h, the rule
    ``-(1/pi) [h/2 F''(0) + sum_{m>=1} h (F(r_{m+1}) - F(r_{m-1})) / (2h r_m)]``
    is linear in the column; offset k of the returned array multiplies
    g(p + k h).  The leading index is k = -1.
    """
    m_max = int(np.ceil(r_max / h))
    c = np.zeros(m_max + 3)  # k = -1 .. m_max + 1
    c[0] += 0.5 / h
    c[1] -= 1.0 / h
    c[2] += 0.5 / h
    m = np.arange(1, m_max + 1)
    np.add.at(c, m + 2, 1.0 / (2.0 * m * h))
    np.add.at(c, m, -1.0 / (2.0 * m * h))
    return -c / np.pi


def recon_radon(g, n=None, r_max=2.0):
    """Pointwise inversion from circular averages of the sinogram.

    For each pixel the circular average ``F(r)`` of the lines tangent to the
    circle of radius r about x is differentiated and integrated against 1/r.
    The r-grid step equals the offset spacing, so the per-pixel rule factors
    into one filter per angle followed by backprojection; :func:`radon_point`
    evaluates the rule directly and agrees to rounding.
    """
    n = _default_n(g, n)
    h = 2.0 * g.delta
    weights = _radon_weights(h, r_max)
    m_max = weights.size - 3
    # lattice extended so that every pixel's p = x . v_theta is covered
    ext = int(np.ceil((np.sqrt(2.0) + 0.1) / h))
    lo = ext
    hi = ext + m_max + 2
    col = np.zeros((lo + g.n_r + hi, g.n_theta))
    col[lo : lo + g.n_r] = g.values
    # G(q_i) = sum_k c_k g(q_{i+k}): correlation = convolution with reversed weights
    filt = fftconvolve(col, weights[::-1, None], mode="full", axes=0)
    # full-mode index i + (len - 1) - 1 corresponds to output node i with k starting at -1
    offset = weights.size - 2
    G = filt[offset : offset + col.shape[0]]
    q = -1.0 + g.delta + h * (np.arange(col.shape[0]) - lo)
    img = ImageGrid.zeros(n, supported=False)
    x1, x2 = img.mesh()
    acc = np.zeros((n, n))
    for j, th in enumerate(g.theta):
        p = x1 * np.cos(th) + x2 * np.sin(th)
        acc += np.interp(p, q, G[:, j])
    return ImageGrid(acc / g.n_theta)


def radon_point(g, x, r_max=2.0):
    """Reference per-point evaluation of :func:`recon_radon` at ``x``."""
    h = 2.0 * g.delta
    m_max = int(np.ceil(r_max / h))
    r = h * np.arange(-1, m_max + 2)
    theta = g.theta
    p = x[0] * np.cos(theta) + x[1] * np.sin(theta)
    F = g.evaluate(p[None, :] + r[:, None], theta[None, :]).mean(axis=1)
    # F[i] is the average at r_{i-1}
    second = (F[2] - 2.0 * F[1] + F[0]) / (h * h)
    m = np.arange(1, m_max + 1)
    deriv = (F[m + 2] - F[m]) / (2.0 * h)
    total = h * (0.5 * second + np.sum(deriv / (m * h)))
    return -total / np.pi


# -- filtered backprojection -----------------------------------------------


def fbp_filtered(g, n=None, scale=1.0, extent=FBP_EXTENT):
    """Backproject, then apply the ramp ``scale * |xi|`` and crop to [-1, 1]^2.

    The backprojection decays only like 1/|x|, so it is sampled on
    [-extent, extent]^2 before the x2 zero padding; cutting it at the unit
    square biases the filtered image.
    """
    n = _default_n(g, n)
    spacing = 2.0 / n
    m = extent * n
    axis = -extent + (np.arange(m) + 0.5) * spacing
    b = backproject_values(g, axis)
    q = PAD * m
    xi = TWO_PI * np.fft.fftfreq(q, d=spacing)
    ramp = np.hypot(xi[:, None], xi[None, :])
    out = np.fft.ifft2(np.fft.fft2(b, s=(q, q)) * (scale * ramp)).real
    s = (m - n) // 2
    return out[s : s + n, s : s + n]


def calibrate_fbp(phantom, g):
    """Least-squares scale c with ``c * fbp_filtered(g)`` closest to the phantom on the disc."""
    raw = fbp_filtered(g, phantom.n)
    mask = phantom.disc_mask(1.0)
    a = raw[mask]
    return float(np.dot(a, phantom.values[mask]) / np.dot(a, a))


def recon_fbp(g, n=None, scale=FBP_SCALE):
    """Filtered backprojection with the frozen ramp scale."""
    return ImageGrid(fbp_filtered(g, n, scale))


# -- Fourier slice ---------------------------------------------------------


def slice_spectrum(g, pad=PAD):
    """Continuous 1D transform of each column at rho_m = m pi / pad, m = 0..Nr*pad/2.

    Column j sampled this way equals F f(rho v_theta_j) by the slice theorem.
    Returns ``(rho, table)`` with ``table[m, j]``.
    """
    P = pad * g.n_r
    h = 2.0 * g.delta
    spec = np.fft.fft(g.values, n=P, axis=0) * h
    m = np.arange(P // 2 + 1)
    rho = np.pi / pad * m
    r0 = g.r[0]
    return rho, spec[m] * np.exp(-1j * rho * r0)[:, None]


def _grid_polar_spectrum(rho, theta, table, n, available=None):
    """Bilinear transfer of polar spectrum samples onto the padded cartesian lattice.

    ``available`` flags usable angle columns; a cartesian frequency is
    covered iff both bracketing columns are usable.  Returns ``(spec, covered)``.
    """
    xi = spectrum_freqs(n, PAD)
    k1, k2 = np.meshgrid(xi, xi, indexing="ij")
    rad = np.hypot(k1, k2)
    phi = np.mod(np.arctan2(k2, k1), TWO_PI)
    nt = theta.size
    pos = phi / (TWO_PI / nt)
    j0 = np.floor(pos).astype(np.intp) % nt
    wt = pos - np.floor(pos)
    j1 = (j0 + 1) % nt
    step = rho[1] - rho[0]
    u = rad / step
    inside = u <= rho.size - 1
    u = np.minimum(u, rho.size - 1)
    i0 = np.minimum(u.astype(np.intp), rho.size - 2)
    wr = u - i0
    ring0 = table[i0, j0] * (1 - wt) + table[i0, j1] * wt
    ring1 = table[i0 + 1, j0] * (1 - wt) + table[i0 + 1, j1] * wt
    spec = ring0 * (1 - wr) + ring1 * wr
    covered = np.ones(spec.shape, dtype=bool)
    if available is not None:
        covered = available[j0] & available[j1]
        covered[rad == 0.0] = bool(available.any())
    spec = np.where(covered & inside, spec, 0.0)
    return spec, covered


def recon_fourier_slice(g, n=None):
    """Direct Fourier reconstruction: polar slices gridded onto a cartesian spectrum."""
    n = _default_n(g, n)
    rho, table = slice_spectrum(g)
    spec, _ = _grid_polar_spectrum(rho, g.theta, table, n)
    return ImageGrid(image_from_spectrum(spec, n, PAD).real)


# -- torus -----------------------------------------------------------------


def recon_torus(source, N=None, k_max=None):
    """Reconstruction through periodization and the torus X-ray transforms.

    ``source`` is an ImageGrid (exact torus transforms of its periodization)
    or a Sinogram (torus transforms assembled from planar line integrals).
    """
    from .torus import (
        SinogramTorusEvaluator,
        field_evaluator,
        periodize,
        torus_fourier_recover,
        unperiodize,
    )

    if isinstance(source, Sinogram):
        N = N or source.n_r + (source.n_r % 2)
        evaluate = SinogramTorusEvaluator(source, N)
    elif isinstance(source, ImageGrid):
        if N is not None and N != source.n:
            raise ValueError(f"N = {N} does not match the image size {source.n}")
        N = source.n
        evaluate = field_evaluator(periodize(source))
    else:
        raise TypeError(f"recon_torus needs an ImageGrid or a Sinogram, got {type(source).__name__}")
    if k_max is None:
        k_max = N // 2 - 1
    spectrum = torus_fourier_recover(evaluate, N, k_max)
    return unperiodize(spectrum)


# -- limited angle ---------------------------------------------------------


def _normalize_arcs(arcs):
    """Closed arcs on the circle as sorted, merged intervals within [0, 4 pi)."""
    out = []
    for a, b in arcs:
        a, b = float(a), float(b)
        if b < a:
            raise ValueError(f"arc ({a}, {b}) has negative width")
        if b - a >= TWO_PI:
            return [(0.0, TWO_PI)]
        a0 = np.mod(a, TWO_PI)
        out.append((a0, a0 + (b - a)))
    out.sort()
    merged = []
    for a, b in out:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    if len(merged) > 1 and merged[-1][1] >= merged[0][0] + TWO_PI:
        a, b = merged.pop(0)
        merged[-1] = (merged[-1][0], max(merged[-1][1], b + TWO_PI))
    return merged


@dataclass
class DirectionMask:
    """Admissible X-ray directions as closed arcs ``(alpha, beta)`` of angles."""

    arcs: list

    def __post_init__(self):
        if not self.arcs:
            raise ValueError("DirectionMask needs at least one arc")
        self.arcs = _normalize_arcs(self.arcs)

    @classmethod
    def full(cls):
        return cls([(0.0, TWO_PI)])

    @classmethod
    def centered(cls, center, width):
        return cls([(center - width / 2.0, center + width / 2.0)])

    @property
    def measure(self):
        return float(sum(b - a for a, b in self.arcs))

    def contains(self, angle, tol=1e-12):
        angle = np.mod(np.asarray(angle, dtype=float), TWO_PI)
        hit = np.zeros(angle.shape, dtype=bool)
        for a, b in self.arcs:
            for shift in (0.0, TWO_PI):
                hit |= (angle + shift >= a - tol) & (angle + shift <= b + tol)
        return hit

    def contains_line(self, angle, tol=1e-12):
        """Whether the unoriented line with direction ``angle`` is admissible."""
        return self.contains(angle, tol) | self.contains(np.asarray(angle) + np.pi, tol)


@dataclass
class FrequencyCoverage:
    """Covered flags for a frequency grid ``(xi1, xi2)``: xi orthogonal to some admissible direction."""

    xi1: np.ndarray
    xi2: np.ndarray
    covered: np.ndarray

    @property
    def fraction(self):
        return float(self.covered.mean())


def dperp(D, xi1, xi2, tol=1e-12):
    """Frequencies orthogonal to some direction in ``D``.

    A frequency at angle phi is orthogonal to the directions phi +- pi/2;
    the origin is always covered.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    phi = np.arctan2(xi2, xi1)
    covered = D.contains_line(phi + np.pi / 2.0, tol)
    covered |= (xi1 == 0) & (xi2 == 0)
    return FrequencyCoverage(xi1, xi2, covered)


@dataclass
class LimitedAngleResult:
    image: ImageGrid
    coverage: FrequencyCoverage
    spectrum: np.ndarray
    report: dict = field(default_factory=dict)


def recon_limited_angle(g, D, n=None, reference=None):
    """Fourier-slice reconstruction from the columns whose lines have directions in D.

    Frequencies not bracketed by two usable columns stay zero and are
    reported uncovered; nothing is extrapolated.  With a ``reference``
    image the report adds spectral errors on the covered set and the
    reference energy that falls outside it.
    """
    n = _default_n(g, n)
    theta = g.theta
    # line direction of column theta is theta + pi/2
    available = D.contains_line(theta + np.pi / 2.0)
    if not available.any():
        raise ValueError("no sinogram column has an admissible direction")
    rho, table = slice_spectrum(g)
    spec, covered = _grid_polar_spectrum(rho, theta, table, n, available)
    xi = spectrum_freqs(n, PAD)
    k1, k2 = np.meshgrid(xi, xi, indexing="ij")
    coverage = FrequencyCoverage(k1, k2, covered)
    image = ImageGrid(image_from_spectrum(spec, n, PAD).real)
    report = {
        "columns_used": int(available.sum()),
        "columns_total": int(theta.size),
        "covered_fraction": coverage.fraction,
    }
    if reference is not None:
        ref = image_spectrum(reference.values, PAD)
        on = covered & (np.hypot(k1, k2) <= np.pi * n / 2)
        report["covered_rel_error"] = float(np.linalg.norm((spec - ref)[on]) / np.linalg.norm(ref[on]))
        report["uncovered_energy_fraction"] = float(np.sum(np.abs(ref[~covered]) ** 2) / np.sum(np.abs(ref) ** 2))
    return LimitedAngleResult(image, coverage, spec, report)

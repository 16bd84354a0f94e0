"""Forward X-ray and Doppler transforms, backprojection, Beer-Lambert ingestion."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .grid import ImageGrid, VectorFieldGrid

__all__ = [
    "Sinogram",
    "DopplerSinogram",
    "sinogram_r",
    "sinogram_theta",
    "xray_forward",
    "doppler_forward",
    "backproject",
    "backproject_values",
    "normal_operator",
    "intensities_to_sinogram",
    "write_sinogram_csv",
    "read_sinogram_csv",
]

TWO_PI = 2.0 * np.pi


def sinogram_r(n_r):
    """Detector offsets: n_r cell centers on [-1, 1], i.e. -1 + delta + 2 delta i."""
    delta = 1.0 / n_r
    return -1.0 + delta + 2.0 * delta * np.arange(n_r)


def sinogram_theta(n_theta):
    return TWO_PI * np.arange(n_theta) / n_theta


@dataclass
class Sinogram:
    """Line integrals g(r_i, theta_j) on the full circle of normal angles.

    ``values`` has shape (Nr, Ntheta); ``step`` records the quadrature step
    used along each chord (0 when unknown).
    """

    values: np.ndarray
    step: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"sinogram must be 2D, got shape {self.values.shape}")
        if self.values.shape[0] < 2 or self.values.shape[1] < 2:
            raise ValueError(f"sinogram needs at least 2 offsets and 2 angles, got {self.values.shape}")

    @property
    def n_r(self):
        return self.values.shape[0]

    @property
    def n_theta(self):
        return self.values.shape[1]

    @property
    def delta(self):
        return 1.0 / self.n_r

    @property
    def r(self):
        return sinogram_r(self.n_r)

    @property
    def theta(self):
        return sinogram_theta(self.n_theta)

    def padded_column(self, j):
        """Column j with a zero node appended at each end (zero extension)."""
        return np.concatenate([[0.0], self.values[:, j], [0.0]])

    def padded_r(self):
        d = self.delta
        return np.concatenate([[-1.0 - d], self.r, [1.0 + d]])

    def evaluate(self, r, theta):
        """Linear interpolation in r and theta (periodic), zero for |r| beyond the lattice."""
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        nt = self.n_theta
        pos = np.mod(theta, TWO_PI) / (TWO_PI / nt)
        j0 = np.floor(pos).astype(np.intp)
        wt = pos - j0
        j0 %= nt
        j1 = (j0 + 1) % nt
        table = np.zeros((self.n_r + 2, nt))
        table[1:-1] = self.values
        # fractional index on the padded r lattice
        u = (r + 1.0 + self.delta) / (2.0 * self.delta)
        inside = (u >= 0) & (u <= self.n_r + 1)
        u = np.clip(u, 0, self.n_r + 1)
        i0 = np.minimum(u.astype(np.intp), self.n_r)
        fu = u - i0
        col0 = table[i0, j0] * (1 - fu) + table[i0 + 1, j0] * fu
        col1 = table[i0, j1] * (1 - fu) + table[i0 + 1, j1] * fu
        return np.where(inside, col0 * (1 - wt) + col1 * wt, 0.0)

    def __add__(self, other):
        return type(self)(self.values + other.values, self.step)

    def __mul__(self, scalar):
        return type(self)(self.values * scalar, self.step)

    __rmul__ = __mul__


class DopplerSinogram(Sinogram):
    """Integrals of f . gamma' along the lines, oriented by (-sin theta, cos theta)."""


def _chord_nodes(n_r, step):
    """Midpoint nodes along every chord, padded to a common length.

    Returns offsets ``t`` (n_r, m_max) and weights ``w`` with zeros in the padding.
    """
    r = sinogram_r(n_r)
    half = np.sqrt(np.clip(1.0 - r * r, 0.0, None))
    counts = np.maximum(np.ceil(2.0 * half / step).astype(int), 1)
    m_max = counts.max()
    m = np.arange(m_max)[None, :]
    h = (2.0 * half / counts)[:, None]
    t = -half[:, None] + (m + 0.5) * h
    w = np.where(m < counts[:, None], h, 0.0)
    t = np.where(m < counts[:, None], t, 0.0)
    return r, t, w


def _padded_flat(vals):
    n = vals.shape[0]
    padded = np.zeros((n + 2, n + 2))
    padded[1:-1, 1:-1] = vals
    return padded.ravel()


def _check_step(n, step):
    spacing = 2.0 / n
    if step is None:
        return spacing / 2.0
    if not 0 < step <= spacing / 2.0 * (1 + 1e-12):
        raise ValueError(f"quadrature step {step} must lie in (0, spacing/2 = {spacing / 2.0}]")
    return float(step)


@njit(cache=True)
def _chord_kernel(flats, factors, n, r, t, w, cos_t, sin_t, out):
    inv_h = n / 2.0
    stride = n + 2
    n_comp = flats.shape[0]
    for j in range(cos_t.size):
        c = cos_t[j]
        s = sin_t[j]
        for i in range(r.size):
            acc = 0.0
            for m in range(t.shape[1]):
                wm = w[i, m]
                if wm == 0.0:
                    break
                p1 = r[i] * c - t[i, m] * s
                p2 = r[i] * s + t[i, m] * c
                u = min(max((p1 + 1.0) * inv_h + 0.5, 0.0), n + 1.0)
                v = min(max((p2 + 1.0) * inv_h + 0.5, 0.0), n + 1.0)
                iu = min(int(u), n)
                iv = min(int(v), n)
                fu = u - iu
                fv = v - iv
                base = iu * stride + iv
                val = 0.0
                for q in range(n_comp):
                    fac = factors[q, j]
                    if fac != 0.0:
                        fl = flats[q]
                        val += fac * ((fl[base] * (1 - fu) + fl[base + stride] * fu) * (1 - fv)
                                      + (fl[base + 1] * (1 - fu) + fl[base + stride + 1] * fu) * fv)
                acc += val * wm
            out[i, j] = acc


def _line_integrals(components, factors, n_r, n_theta, step):
    """Chord quadrature of sum_q factors[q, j] * component_q along every line."""
    n = components[0].shape[0]
    flats = np.stack([_padded_flat(c) for c in components])
    r, t, w = _chord_nodes(n_r, step)
    theta = sinogram_theta(n_theta)
    out = np.zeros((n_r, n_theta))
    _chord_kernel(flats, np.ascontiguousarray(factors, dtype=float), n, r, t, w,
                  np.cos(theta), np.sin(theta), out)
    return out


def xray_forward(f, n_r, n_theta, step=None):
    """Line integrals of ``f`` over the (r, theta) lattice.

    Parameters
    ----------
    f : ImageGrid
        Must carry the support flag.
    n_r, n_theta : int
        Offsets on [-1, 1] and angles on [0, 2 pi).
    step : float, optional
        Midpoint-rule step along each chord, at most half the pixel spacing
        (the default).

    Returns
    -------
    Sinogram
    """
    if not f.supported:
        raise ValueError("xray_forward needs an ImageGrid with the support flag set")
    step = _check_step(f.n, step)
    vals = _line_integrals([f.values], np.ones((1, n_theta)), n_r, n_theta, step)
    return Sinogram(vals, step)


def doppler_forward(F, n_r, n_theta, step=None):
    """Integrals of F . (-sin theta, cos theta) along each line."""
    if not F.supported:
        raise ValueError("doppler_forward needs a VectorFieldGrid with the support flag set")
    step = _check_step(F.n, step)
    theta = sinogram_theta(n_theta)
    factors = np.stack([-np.sin(theta), np.cos(theta)])
    vals = _line_integrals([F.f1.values, F.f2.values], factors, n_r, n_theta, step)
    return DopplerSinogram(vals, step)


def backproject(g, n=None):
    """Adjoint of the X-ray transform: integral over theta of g(x . v_theta, theta).

    Trapezoid rule on the periodic angle grid, linear interpolation in r with
    zero extension.  Output lattice defaults to ``n = Nr`` rounded to even.
    """
    if n is None:
        n = g.n_r + (g.n_r % 2)
    img = ImageGrid.zeros(n, supported=False)
    return ImageGrid(backproject_values(g, img.axis()))


def backproject_values(g, axis):
    """Backprojection sampled on the tensor grid ``axis x axis`` (any extent)."""
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    rr = g.padded_r()
    acc = np.zeros(x1.shape)
    for j, th in enumerate(g.theta):
        p = x1 * np.cos(th) + x2 * np.sin(th)
        acc += np.interp(p, rr, g.padded_column(j), left=0.0, right=0.0)
    return acc * (TWO_PI / g.n_theta)


def normal_operator(f, n_r=None, n_theta=None, step=None):
    """Backprojection of the forward transform, I* I f, on the lattice of ``f``."""
    n_r = n_r or f.n
    n_theta = n_theta or 2 * f.n
    return backproject(xray_forward(f, n_r, n_theta, step), n=f.n)


def intensities_to_sinogram(I0, intensities):
    """Beer-Lambert: attenuation line integral ``ln(I0) - ln(I)``."""
    I0 = float(I0)
    vals = intensities.values if isinstance(intensities, Sinogram) else np.asarray(intensities, dtype=float)
    if I0 <= 0:
        raise ValueError("reference intensity I0 must be positive")
    if np.any(vals <= 0):
        raise ValueError("intensities must be positive; a nonpositive reading is not a measurement")
    if np.any(vals > I0):
        raise ValueError("intensities must not exceed the reference intensity I0")
    step = intensities.step if isinstance(intensities, Sinogram) else 0.0
    return Sinogram(np.log(I0) - np.log(vals), step)


def write_sinogram_csv(g, path):
    """Header ``Nr Ntheta delta step``, then Nr rows of Ntheta values."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{g.n_r} {g.n_theta} {g.delta!r} {float(g.step)!r}\n")
        for row in g.values:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_sinogram_csv(path, cls=Sinogram):
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"{path}:1: header must be 'Nr Ntheta delta step'")
    try:
        n_r, n_theta = int(head[0]), int(head[1])
        delta, step = float(head[2]), float(head[3])
    except ValueError:
        raise ValueError(f"{path}:1: malformed header {lines[0]!r}") from None
    if not np.isclose(delta, 1.0 / n_r):
        raise ValueError(f"{path}:1: delta {delta} inconsistent with Nr = {n_r}")
    if len(lines) - 1 != n_r:
        raise ValueError(f"{path}: expected {n_r} rows, found {len(lines) - 1}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != n_theta:
            raise ValueError(f"{path}:{lineno}: expected {n_theta} columns, found {len(fields)}")
        rows.append([float(x) for x in fields])
    return cls(np.array(rows), step)

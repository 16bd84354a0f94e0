"""Vector-field tomography: Helmholtz splitting, solenoidal recovery, potentials."""

from dataclasses import dataclass

import numpy as np

from .bundle import BundleGrid, integral_function
from .grid import ImageGrid, VectorFieldGrid
from .projector import Sinogram
from .recon import recon_fourier_slice

__all__ = [
    "HelmholtzParts",
    "helmholtz_decompose",
    "periodic_helmholtz",
    "periodic_divergence",
    "solenoidal_recover",
    "potential_recover",
    "gradient_field",
    "rotated_gradient_field",
    "KernelError",
]

PAD = 2


class KernelError(ValueError):
    """The field is not a gradient of a boundary-vanishing potential."""


def _wavenumbers(m, spacing):
    k = 2.0 * np.pi * np.fft.fftfreq(m, d=spacing)
    if m % 2 == 0:
        # a real field has no derivative at the Nyquist frequency
        k[m // 2] = 0.0
    return k[:, None], k[None, :]


def periodic_helmholtz(f1, f2, spacing):
    """Spectral Helmholtz splitting of a periodic field.

    Returns ``(h, psi, grad, sol)`` with ``grad = grad h`` and
    ``sol = (-d2 psi, d1 psi)``; both potentials have zero mean.
    """
    m = f1.shape[0]
    k1, k2 = _wavenumbers(m, spacing)
    F1, F2 = np.fft.fft2(f1), np.fft.fft2(f2)
    lap = -(k1 * k1 + k2 * k2)
    lap[lap == 0] = 1.0
    H = (1j * k1 * F1 + 1j * k2 * F2) / lap
    P = (1j * k1 * F2 - 1j * k2 * F1) / lap
    H[0, 0] = P[0, 0] = 0.0
    grad = (np.fft.ifft2(1j * k1 * H).real, np.fft.ifft2(1j * k2 * H).real)
    h = np.fft.ifft2(H).real
    psi = np.fft.ifft2(P).real
    sol = (f1 - grad[0], f2 - grad[1])
    return h, psi, grad, sol


def periodic_divergence(f1, f2, spacing):
    k1, k2 = _wavenumbers(f1.shape[0], spacing)
    return np.fft.ifft2(1j * k1 * np.fft.fft2(f1) + 1j * k2 * np.fft.fft2(f2)).real


@dataclass
class HelmholtzParts:
    gradient: VectorFieldGrid
    solenoidal: VectorFieldGrid
    h: ImageGrid
    psi: ImageGrid
    divergence_max: float
    padded: tuple = None


def _embed(vals, m):
    out = np.zeros((m, m))
    s = (m - vals.shape[0]) // 2
    out[s : s + vals.shape[0], s : s + vals.shape[0]] = vals
    return out


def _crop(vals, n):
    s = (vals.shape[0] - n) // 2
    return vals[s : s + n, s : s + n]


def helmholtz_decompose(F):
    """Gradient plus divergence-free splitting of a supported field.

    The field is embedded in a x2 zero-padded periodic lattice and split
    spectrally there.  Potentials are shifted so their mean over the
    padding ring is zero; results are cropped back to the input lattice,
    and the padded parts are kept on ``padded``.
    """
    if not F.supported:
        raise ValueError("helmholtz_decompose needs a supported VectorFieldGrid")
    n = F.n
    m = PAD * n
    spacing = 2.0 / n
    f1, f2 = _embed(F.f1.values, m), _embed(F.f2.values, m)
    h, psi, grad, sol = periodic_helmholtz(f1, f2, spacing)
    ring = np.ones((m, m), dtype=bool)
    s = (m - n) // 2
    ring[s : s + n, s : s + n] = False
    h = h - h[ring].mean()
    psi = psi - psi[ring].mean()
    div = periodic_divergence(*sol, spacing)
    return HelmholtzParts(
        gradient=VectorFieldGrid(ImageGrid(_crop(grad[0], n)), ImageGrid(_crop(grad[1], n))),
        solenoidal=VectorFieldGrid(ImageGrid(_crop(sol[0], n)), ImageGrid(_crop(sol[1], n))),
        h=ImageGrid(_crop(h, n)),
        psi=ImageGrid(_crop(psi, n)),
        divergence_max=float(np.abs(div).max()),
        padded=(grad, sol),
    )


def gradient_field(h):
    """Central-difference gradient of an image (zero beyond the lattice)."""
    d = h.spacing
    v = np.pad(h.values, 1)
    d1 = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * d)
    d2 = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * d)
    return d1, d2


def rotated_gradient_field(psi):
    """(-d2 psi, d1 psi) by central differences."""
    d1, d2 = gradient_field(psi)
    return -d2, d1


def _cumulative_r(d):
    """s(r_i): integral of the piecewise-linear column from its zero node at -1 - delta up to r_i."""
    h = 2.0 * d.delta
    padded = np.vstack([np.zeros((1, d.n_theta)), d.values])
    steps = 0.5 * (padded[1:] + padded[:-1]) * h
    return np.cumsum(steps, axis=0)


def solenoidal_recover(d, n=None):
    """Stream function and divergence-free field from Doppler data.

    The Doppler integral of (-d2 psi, d1 psi) along the line (r, theta) is
    the r-derivative of the line integral of psi, so integrating each column
    in r gives the scalar sinogram of psi, reconstructed by Fourier slice.

    Returns
    -------
    psi : ImageGrid
    field : VectorFieldGrid
    """
    if not isinstance(d, Sinogram):
        raise TypeError(f"solenoidal_recover needs a DopplerSinogram, got {type(d).__name__}")
    s = Sinogram(_cumulative_r(d), d.step)
    psi = recon_fourier_slice(s, n)
    f1, f2 = rotated_gradient_field(psi)
    return psi, VectorFieldGrid(ImageGrid(f1), ImageGrid(f2))


def potential_recover(F, grid=None, tol=1e-2):
    """Potential h with F = grad h, read off the fiber-independent integral function.

    For such F the ray integral from x to the circle is -h(x) in every
    direction.  ``tol`` bounds the fiber oscillation relative to max |u|;
    larger oscillation means F has nonzero Doppler data.

    Raises
    ------
    KernelError
        When the integral function depends on the direction.
    """
    if grid is None:
        grid = BundleGrid(F.n, 64)
    u = integral_function(F, grid)
    mask = grid.mask
    vals = u.values[mask]
    scale = np.abs(vals).max()
    osc = float((vals.max(axis=1) - vals.min(axis=1)).max())
    if scale > 0 and osc > tol * scale:
        raise KernelError(
            f"integral function varies by {osc:.3g} across directions (max |u| = {scale:.3g}); "
            "the field has nonzero Doppler data"
        )
    h = np.zeros((grid.n, grid.n))
    h[mask] = -vals.mean(axis=1)
    return ImageGrid(h)


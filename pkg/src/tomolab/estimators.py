"""Estimator wrappers with the fit/transform interface of scikit-learn."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .grid import ImageGrid, VectorFieldGrid
from .metrics import rel_l2
from .projector import DopplerSinogram, doppler_forward, xray_forward
from .recon import (
    FBP_SCALE,
    fbp_filtered,
    recon_cormack,
    recon_fourier_slice,
    recon_radon,
    recon_torus,
)
from .validation import check_even, check_image_batch, check_positive, check_sinogram_batch

__all__ = ["XRayProjector", "DopplerProjector", "Reconstructor", "SolenoidalReconstructor", "METHODS"]

METHODS = ("cormack", "radon", "fbp", "fourier", "torus")


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


def _stack(items, single):
    arr = np.stack(items)
    return arr[0] if single else arr


class XRayProjector(TransformerMixin, BaseEstimator):
    """Images to sinograms.

    ``transform`` accepts one image (n, n), a stack (m, n, n) or ImageGrids,
    and returns arrays of shape (Nr, Ntheta) or (m, Nr, Ntheta).
    """

    def __init__(self, n_r=400, n_theta=360, step=None):
        self.n_r = n_r
        self.n_theta = n_theta
        self.step = step

    def fit(self, X, y=None):
        check_positive(self.n_r, "n_r")
        check_even(self.n_theta, "n_theta")
        images, _ = check_image_batch(X, supported=True)
        self.n_ = images[0].n
        return self

    def transform(self, X):
        _check_fitted(self, "n_")
        images, single = check_image_batch(X, supported=True)
        for img in images:
            if img.n != self.n_:
                raise ValueError(f"image size {img.n} differs from the fitted size {self.n_}")
        return _stack([xray_forward(img, self.n_r, self.n_theta, self.step).values for img in images], single)


class DopplerProjector(TransformerMixin, BaseEstimator):
    """Vector fields, given as (2, n, n) arrays or VectorFieldGrids, to Doppler sinograms."""

    def __init__(self, n_r=400, n_theta=360, step=None):
        self.n_r = n_r
        self.n_theta = n_theta
        self.step = step

    @staticmethod
    def _fields(X):
        if isinstance(X, VectorFieldGrid):
            return [X], True
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 3 and arr.shape[0] == 2:
            arr, single = arr[None], True
        elif arr.ndim == 4 and arr.shape[1] == 2:
            single = False
        else:
            raise ValueError(f"expected a (2, n, n) field or a stack of them, got shape {arr.shape}")
        fields = [VectorFieldGrid(ImageGrid(a[0], True), ImageGrid(a[1], True)) for a in arr]
        return fields, single

    def fit(self, X, y=None):
        check_positive(self.n_r, "n_r")
        check_even(self.n_theta, "n_theta")
        fields, _ = self._fields(X)
        self.n_ = fields[0].n
        return self

    def transform(self, X):
        _check_fitted(self, "n_")
        fields, single = self._fields(X)
        return _stack([doppler_forward(F, self.n_r, self.n_theta, self.step).values for F in fields], single)


class Reconstructor(TransformerMixin, BaseEstimator):
    """Sinograms to images by one of the reconstruction engines.

    Parameters
    ----------
    method : {"cormack", "radon", "fbp", "fourier", "torus"}
    n : int, optional
        Output lattice size (default Nr rounded up to even).
    k_max : int, optional
        Torus frequency box, below n/2.
    scale : float, optional
        FBP ramp scale.  When None, ``fit`` with reference images ``y``
        calibrates it by least squares; without ``y`` the stored constant
        is used.
    """

    def __init__(self, method="fbp", n=None, k_max=None, scale=None):
        self.method = method
        self.n = n
        self.k_max = k_max
        self.scale = scale

    def _check_params(self, g):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        n = self.n if self.n is not None else g.n_r + (g.n_r % 2)
        check_even(n, "n")
        if self.method == "torus" and self.k_max is not None and not 0 <= self.k_max < n / 2:
            raise ValueError(f"k_max = {self.k_max} must satisfy 0 <= k_max < N/2 = {n / 2}")
        return n

    def fit(self, X, y=None):
        sinos, _ = check_sinogram_batch(X)
        n = self._check_params(sinos[0])
        self.scale_ = FBP_SCALE if self.scale is None else float(self.scale)
        if self.method == "fbp" and y is not None and self.scale is None:
            refs, _ = check_image_batch(y)
            if len(refs) != len(sinos):
                raise ValueError(f"{len(sinos)} sinograms but {len(refs)} reference images")
            num = den = 0.0
            for g, ref in zip(sinos, refs):
                mask = ref.disc_mask(1.0)
                raw = fbp_filtered(g, ref.n)[mask]
                num += float(np.dot(raw, ref.values[mask]))
                den += float(np.dot(raw, raw))
            self.scale_ = num / den
        self.n_ = n
        return self

    def _one(self, g):
        m = self.method
        if m == "cormack":
            return recon_cormack(g, self.n_)
        if m == "radon":
            return recon_radon(g, self.n_)
        if m == "fbp":
            return ImageGrid(fbp_filtered(g, self.n_, self.scale_))
        if m == "fourier":
            return recon_fourier_slice(g, self.n_)
        return recon_torus(g, self.n_, self.k_max)

    def transform(self, X):
        _check_fitted(self, "n_")
        sinos, single = check_sinogram_batch(X)
        return _stack([self._one(g).values for g in sinos], single)

    def score(self, X, y):
        """Negative mean relative L2 error on the disc |x| < 0.8 (higher is better)."""
        est = self.transform(X)
        refs, single = check_image_batch(y)
        est = [est] if single else list(est)
        mask = refs[0].disc_mask(0.8)
        return -float(np.mean([rel_l2(e, r, mask) for e, r in zip(est, refs)]))


class SolenoidalReconstructor(TransformerMixin, BaseEstimator):
    """Doppler sinograms to divergence-free fields, returned as (2, n, n) arrays."""

    def __init__(self, n=None):
        self.n = n

    def fit(self, X, y=None):
        sinos, _ = check_sinogram_batch(X, DopplerSinogram)
        n = self.n if self.n is not None else sinos[0].n_r + (sinos[0].n_r % 2)
        self.n_ = check_even(n, "n")
        return self

    def transform(self, X):
        from .vector import solenoidal_recover

        _check_fitted(self, "n_")
        sinos, single = check_sinogram_batch(X, DopplerSinogram)
        out = []
        for d in sinos:
            _, F = solenoidal_recover(d, self.n_)
            out.append(np.stack([F.f1.values, F.f2.values]))
        return _stack(out, single)

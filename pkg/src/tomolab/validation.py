"""Input checks shared by the estimators and the command line."""

import numpy as np

from .grid import ImageGrid, VectorFieldGrid
from .projector import Sinogram

__all__ = [
    "check_image",
    "check_image_batch",
    "check_sinogram",
    "check_sinogram_batch",
    "check_even",
    "check_positive",
    "parse_arcs",
]


def check_positive(value, name, integer=True):
    if integer:
        if int(value) != value:
            raise ValueError(f"{name} must be an integer, got {value!r}")
        value = int(value)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def check_even(value, name, minimum=2):
    value = check_positive(value, name)
    if value % 2 or value < minimum:
        raise ValueError(f"{name} must be an even integer >= {minimum}, got {value}")
    return value


def check_image(X, supported=None):
    """An ImageGrid from an ImageGrid or a square 2D array.

    ``supported=True`` sets the support flag (and so checks the margin).
    """
    if isinstance(X, ImageGrid):
        if supported and not X.supported:
            return ImageGrid(X.values, supported=True)
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return ImageGrid(arr, supported=bool(supported))


def check_image_batch(X, supported=None):
    """A list of ImageGrids from one image, a list, or an (m, n, n) array."""
    if isinstance(X, (ImageGrid, VectorFieldGrid)):
        return [X], True
    if isinstance(X, (list, tuple)):
        return [check_image(x, supported) for x in X], False
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        return [check_image(arr, supported)], True
    if arr.ndim == 3:
        return [check_image(a, supported) for a in arr], False
    raise ValueError(f"expected an image or a stack of images, got shape {arr.shape}")


def check_sinogram(X, cls=Sinogram):
    if isinstance(X, Sinogram):
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D sinogram (Nr, Ntheta), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sinogram contains non-finite values")
    return cls(arr)


def check_sinogram_batch(X, cls=Sinogram):
    if isinstance(X, Sinogram):
        return [X], True
    if isinstance(X, (list, tuple)):
        return [check_sinogram(x, cls) for x in X], False
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        return [check_sinogram(arr, cls)], True
    if arr.ndim == 3:
        return [check_sinogram(a, cls) for a in arr], False
    raise ValueError(f"expected a sinogram or a stack of sinograms, got shape {arr.shape}")


def parse_arcs(text):
    """``"a1:b1,a2:b2"`` (radians) to a list of (a, b) pairs."""
    arcs = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a, b = part.split(":")
            arcs.append((float(a), float(b)))
        except ValueError:
            raise ValueError(f"malformed arc {part!r}; expected start:end in radians") from None
    if not arcs:
        raise ValueError("no arcs given")
    return arcs

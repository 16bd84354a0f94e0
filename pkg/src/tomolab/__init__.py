"""Integral-geometry tomography on the unit disc: forward transforms and reconstruction engines."""

from .estimators import DopplerProjector, Reconstructor, SolenoidalReconstructor, XRayProjector
from .grid import ImageGrid, VectorFieldGrid, make_phantom
from .projector import DopplerSinogram, Sinogram, doppler_forward, xray_forward
from .recon import (
    DirectionMask,
    recon_cormack,
    recon_exterior,
    recon_fbp,
    recon_fourier_slice,
    recon_limited_angle,
    recon_radon,
    recon_torus,
)

__version__ = "0.1.0"

__all__ = [
    "ImageGrid",
    "VectorFieldGrid",
    "make_phantom",
    "Sinogram",
    "DopplerSinogram",
    "xray_forward",
    "doppler_forward",
    "DirectionMask",
    "recon_cormack",
    "recon_radon",
    "recon_fbp",
    "recon_fourier_slice",
    "recon_torus",
    "recon_exterior",
    "recon_limited_angle",
    "XRayProjector",
    "DopplerProjector",
    "Reconstructor",
    "SolenoidalReconstructor",
]

"""Periodic-box discretization, Fourier transforms and norm primitives."""

from .grid import (
    Grid3,
    ScalarField,
    SpectralScalar,
    SpectralVector,
    VectorField,
)
from .sphere import LEBEDEV_SIZES, SphereGrid
from .transforms import (
    fourier_at,
    moment_transform,
    moment_transform2,
    norm_l2,
    shell_average,
    spectral_gradient,
    spectral_sup,
    to_physical,
    to_physical_complex,
    to_spectral,
    trilinear_sample,
    weighted_norm,
)

__all__ = [
    "Grid3",
    "ScalarField",
    "SpectralScalar",
    "SpectralVector",
    "VectorField",
    "SphereGrid",
    "LEBEDEV_SIZES",
    "to_spectral",
    "to_physical",
    "to_physical_complex",
    "spectral_gradient",
    "norm_l2",
    "spectral_sup",
    "weighted_norm",
    "shell_average",
    "trilinear_sample",
    "moment_transform",
    "moment_transform2",
    "fourier_at",
]

"""Pseudo-spectral Navier-Stokes solver, inverse-scattering operator toolkit,
and numerical auditor for the a-priori estimates tying the two together."""

from . import audit, core, flow, harness, scatter
from ._accel import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["core", "flow", "audit", "scatter", "harness", "KERNEL_BACKEND", "__version__"]

"""Operator calculus for the inverse-scattering side: Cauchy projections,
Born amplitudes, the (I - T_-D) machinery, Rollnik functionals and grid
bound states."""

from .born import (
    AmplitudeTable,
    PotentialSample,
    born_amplitude,
    born_series_amplitude,
    centered_transform_at,
    green_cell_average,
    optical_residual,
)
from .bound import BoundStateSet, blaschke, blaschke_function, bound_states
from .line import LineFunction, cauchy_project, default_battery, plemelj_selftest
from .operators import (
    D_CONVENTION,
    LineExtendedTable,
    d_operator_norm,
    neumann_solve,
    op_D,
    op_N,
    reconstruct_potential,
    ta_norm,
    wavefunction_minus,
)
from .rollnik import birman_schwinger_bound, rollnik_norm

__all__ = [
    "AmplitudeTable",
    "PotentialSample",
    "born_amplitude",
    "born_series_amplitude",
    "centered_transform_at",
    "green_cell_average",
    "optical_residual",
    "BoundStateSet",
    "bound_states",
    "blaschke",
    "blaschke_function",
    "LineFunction",
    "cauchy_project",
    "plemelj_selftest",
    "default_battery",
    "D_CONVENTION",
    "LineExtendedTable",
    "op_N",
    "op_D",
    "d_operator_norm",
    "ta_norm",
    "neumann_solve",
    "wavefunction_minus",
    "reconstruct_potential",
    "rollnik_norm",
    "birman_schwinger_bound",
]

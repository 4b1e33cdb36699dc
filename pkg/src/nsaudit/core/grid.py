"""Periodic-box grid and the field containers living on it.

A cube of side ``length`` with ``n`` points per axis approximates whole
space; fields are expected to decay before the boundary.  Physical samples
sit at x in {0, dx, ..., L-dx}^3 measured from the box corner, moments are
weighted about the box center.  Spectral data is indexed by the wavenumber
set (2*pi/L)*{-n/2, ..., n/2-1}^3 in FFT layout.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid3:
    n: int
    length: float

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid needs n >= 8 and even, got n={self.n}")
        if not (self.length > 0):
            raise ValueError(f"box length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**3

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def k_nyquist(self) -> float:
        """Largest representable wavenumber magnitude along one axis."""
        return self.dk * (self.n // 2 - 1)

    @property
    def center(self) -> np.ndarray:
        return np.full(3, self.length / 2.0)

    @cached_property
    def k_axis(self) -> np.ndarray:
        """1-d wavenumbers in FFT layout; the k=0 mode appears exactly once."""
        return self.dk * np.fft.fftfreq(self.n, d=1.0 / self.n)

    def k_components(self):
        """Three broadcastable wavenumber arrays (kx, ky, kz)."""
        k = self.k_axis
        return (
            k[:, None, None],
            k[None, :, None],
            k[None, None, :],
        )

    def k_components_deriv(self):
        """Wavenumbers for odd-derivative multipliers: the partnerless
        Nyquist mode is zeroed so real fields stay real."""
        k = self.k_axis.copy()
        k[self.n // 2] = 0.0
        return (
            k[:, None, None],
            k[None, :, None],
            k[None, None, :],
        )

    @cached_property
    def k_squared(self) -> np.ndarray:
        kx, ky, kz = self.k_components()
        return kx**2 + ky**2 + kz**2

    @cached_property
    def x_axis(self) -> np.ndarray:
        return self.dx * np.arange(self.n)

    def x_components(self):
        x = self.x_axis
        return (
            x[:, None, None],
            x[None, :, None],
            x[None, None, :],
        )

    def centered_offsets(self):
        """(x - c) per axis, broadcastable; c is the box center."""
        x = self.x_axis - self.length / 2.0
        return (
            x[:, None, None],
            x[None, :, None],
            x[None, None, :],
        )

    def points(self) -> np.ndarray:
        """All grid points as an (n^3, 3) array, x index fastest in axis order."""
        X, Y, Z = np.meshgrid(self.x_axis, self.x_axis, self.x_axis, indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def _check_shape(grid, values):
    want = (grid.n,) * 3
    if values.shape != want:
        raise ValueError(f"field shape {values.shape} does not match grid {want}")


class ScalarField:
    """Real samples of a scalar on the grid."""

    def __init__(self, grid: Grid3, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        _check_shape(grid, values)
        if not np.all(np.isfinite(values)):
            raise ValueError("scalar field contains non-finite values")
        self.grid = grid
        self.values = values

    def boundary_mass_fraction(self) -> float:
        """L2 mass in the outermost one-cell shell relative to the total."""
        v2 = self.values**2
        total = v2.sum()
        if total == 0.0:
            return 0.0
        interior = v2[1:-1, 1:-1, 1:-1].sum()
        return float((total - interior) / total)

    def decays(self, tol: float = 0.01) -> bool:
        return self.boundary_mass_fraction() < tol


class SpectralScalar:
    """Continuum-normalized Fourier coefficients of a scalar field.

    coeffs[k] approximates q~(k) = integral q(x) e^{i(k,x)} dx, stored on the
    FFT-layout wavenumber grid.
    """

    def __init__(self, grid: Grid3, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        _check_shape(grid, coeffs)
        self.grid = grid
        self.coeffs = coeffs

    def hermitian_defect(self) -> float:
        """Relative deviation from coeffs(-k) = conj(coeffs(k))."""
        c = self.coeffs
        mirrored = c[_mirror_index(self.grid.n)]
        scale = np.max(np.abs(c))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(c - np.conj(mirrored))) / scale)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= tol

    def shifted(self) -> np.ndarray:
        """Coefficients reordered to monotone wavenumbers (fftshift layout)."""
        return np.fft.fftshift(self.coeffs)


def _mirror_index(n):
    idx = (-np.arange(n)) % n
    return np.ix_(idx, idx, idx)


class VectorField:
    """Three scalar components sharing one grid."""

    def __init__(self, components):
        comps = list(components)
        if len(comps) != 3:
            raise ValueError("vector field needs exactly 3 components")
        g = comps[0].grid
        if any(c.grid is not g and c.grid != g for c in comps):
            raise ValueError("vector components must share one grid")
        self.grid = g
        self.components = comps

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]


class SpectralVector:
    """Three spectral components sharing one grid."""

    def __init__(self, components):
        comps = list(components)
        if len(comps) != 3:
            raise ValueError("spectral vector needs exactly 3 components")
        g = comps[0].grid
        if any(c.grid is not g and c.grid != g for c in comps):
            raise ValueError("spectral components must share one grid")
        self.grid = g
        self.components = comps

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def raw(self):
        """The three coefficient arrays (no copies)."""
        return [c.coeffs for c in self.components]

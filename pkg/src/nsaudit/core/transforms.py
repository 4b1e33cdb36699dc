"""Fourier transforms and the norm / moment / shell-average primitives.

Sign convention: the forward transform carries a positive exponent,
q~(k) = integral q(x) e^{i(k,x)} dx, so the discrete form is
dx^3 * sum_x q(x) e^{i(k,x)} and derivatives map to multiplication
by -i*k.  The inverse carries (2*pi)^-3 with a negative exponent.

All reductions run in fixed (C-order) sequence, so results are
deterministic; operations are pure functions of their inputs.
"""

import warnings

import numpy as np

from .grid import Grid3, ScalarField, SpectralScalar, SpectralVector, VectorField

#: relative Hermitian-symmetry tolerance when a real field is demanded
HERMITIAN_TOL = 1e-12


def to_spectral(f: ScalarField) -> SpectralScalar:
    """Forward transform; coeffs(k) = dx^3 * sum_x f(x) e^{i(k,x)}."""
    g = f.grid
    # positive-exponent DFT == n^3 * numpy inverse FFT
    coeffs = g.cell_volume * g.n**3 * np.fft.ifftn(f.values)
    return SpectralScalar(g, coeffs)


def to_physical(q_hat: SpectralScalar, require_real: bool = True) -> ScalarField:
    """Inverse transform; raises if a real field is demanded of asymmetric data."""
    g = q_hat.grid
    if require_real:
        defect = q_hat.hermitian_defect()
        if defect > HERMITIAN_TOL:
            raise ValueError(
                f"spectral data violates Hermitian symmetry (defect {defect:.3e}); "
                "cannot produce a real field"
            )
    values = np.fft.fftn(q_hat.coeffs) / g.length**3
    return ScalarField(g, values.real)


def to_physical_complex(coeffs: np.ndarray, grid: Grid3) -> np.ndarray:
    """Inverse transform of raw coefficients, keeping the complex part."""
    return np.fft.fftn(coeffs) / grid.length**3


def spectral_gradient(q_hat: SpectralScalar, axis: int) -> SpectralScalar:
    """d/dx_axis in spectral space: multiply by -i*k_axis. axis is 1, 2 or 3.

    The partnerless Nyquist mode is zeroed (odd multiplier), preserving
    Hermitian symmetry.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    k = q_hat.grid.k_components_deriv()[axis - 1]
    return SpectralScalar(q_hat.grid, -1j * k * q_hat.coeffs)


def norm_l2(q) -> float:
    """(integral |q|^2 dx)^(1/2), physical or spectral; the two agree (Parseval)."""
    if isinstance(q, ScalarField):
        return float(np.sqrt(q.grid.cell_volume * np.sum(q.values**2)))
    if isinstance(q, SpectralScalar):
        g = q.grid
        return float(np.sqrt(np.sum(np.abs(q.coeffs) ** 2) / g.length**3))
    if isinstance(q, (VectorField, SpectralVector)):
        return float(np.sqrt(sum(norm_l2(c) ** 2 for c in q)))
    raise TypeError(f"norm_l2 does not accept {type(q).__name__}")


def moment_transform(f_values: np.ndarray, grid: Grid3) -> list:
    """Transforms of i*(x-c)_j * f, i.e. the k-gradient of the centered transform.

    Input is a physical array (real or complex); returns three coefficient
    arrays d/dk_j of q~(k) e^{-i(k,c)} up to the removed center phase.
    """
    offs = grid.centered_offsets()
    scale = grid.cell_volume * grid.n**3
    return [scale * np.fft.ifftn(1j * offs[j] * f_values) for j in range(3)]


def moment_transform2(f_values: np.ndarray, grid: Grid3) -> list:
    """Second k-derivative components (upper triangle: xx, yy, zz, xy, xz, yz)."""
    offs = grid.centered_offsets()
    scale = grid.cell_volume * grid.n**3
    pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
    return [scale * np.fft.ifftn(-offs[a] * offs[b] * f_values) for a, b in pairs]


def _hessian_magnitude_sq(h6):
    """|tensor|^2 from 6 upper-triangle components (off-diagonals doubled)."""
    out = np.zeros(h6[0].shape, dtype=float)
    for i, h in enumerate(h6):
        w = 1.0 if i < 3 else 2.0
        out += w * np.abs(h) ** 2
    return out


def spectral_sup(q_hat: SpectralScalar, m: int) -> float:
    """sup over the grid of the m-th k-derivative magnitude of q~ (m = 0, 1, 2).

    Derivatives are taken of the center-referenced transform: the weight is
    x - c, so the value is translation-consistent with the moment norms.
    """
    if m == 0:
        return float(np.max(np.abs(q_hat.coeffs)))
    phys = to_physical_complex(q_hat.coeffs, q_hat.grid)
    if m == 1:
        grads = moment_transform(phys, q_hat.grid)
        mag = np.sqrt(sum(np.abs(gc) ** 2 for gc in grads))
        return float(np.max(mag))
    if m == 2:
        hess = moment_transform2(phys, q_hat.grid)
        return float(np.max(np.sqrt(_hessian_magnitude_sq(hess))))
    raise ValueError(f"m must be 0, 1 or 2, got {m}")


def weighted_norm(f: ScalarField, m: int, warn: bool = True) -> float:
    """integral |x-c|^(2m) |f|^2 dx by midpoint quadrature (m = 1 or 2)."""
    if m not in (1, 2):
        raise ValueError(f"m must be 1 or 2, got {m}")
    if warn and not f.decays():
        warnings.warn(
            "field carries more than 1% of its L2 mass in the boundary shell; "
            "moment weights assume decay",
            stacklevel=2,
        )
    ox, oy, oz = f.grid.centered_offsets()
    r2 = ox**2 + oy**2 + oz**2
    w = r2 if m == 1 else r2**2
    return float(f.grid.cell_volume * np.sum(w * f.values**2))


def trilinear_sample(q_hat: SpectralScalar, kvecs: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of q~ at arbitrary wavevectors; 0 outside the cube.

    kvecs: (..., 3).  Interpolates the fftshift-ordered coefficient cube.
    """
    g = q_hat.grid
    cube = q_hat.shifted()
    kv = np.asarray(kvecs, dtype=float)
    shape = kv.shape[:-1]
    pts = kv.reshape(-1, 3)
    # fractional index into the shifted cube: k = dk*(idx - n/2)
    fi = pts / g.dk + g.n / 2.0
    lo = np.floor(fi).astype(int)
    frac = fi - lo
    out = np.zeros(len(pts), dtype=complex)
    n = g.n
    for corner in range(8):
        off = np.array([(corner >> 2) & 1, (corner >> 1) & 1, corner & 1])
        idx = lo + off
        valid = np.all((idx >= 0) & (idx < n), axis=1)
        w = np.ones(len(pts))
        for j in range(3):
            w *= np.where(off[j] == 1, frac[:, j], 1.0 - frac[:, j])
        ii = np.where(valid)[0]
        if len(ii):
            out[ii] += w[ii] * cube[idx[ii, 0], idx[ii, 1], idx[ii, 2]]
    return out.reshape(shape)


def shell_average(q_hat: SpectralScalar, k: np.ndarray, sphere=None) -> complex:
    """Spherical-shell average (1/(2|k|^2)) * surface integral of q~(k-l) over |l| = |k|.

    The delta reduction int g(l) delta(|k|^2-|l|^2) dl = (1/(2|k|)) * surface
    integral over |l|=|k| is applied, then Lebedev quadrature with trilinear
    interpolation of q~ off-grid.
    """
    from .sphere import SphereGrid

    kv = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(kv))
    if kn == 0.0:
        raise ValueError("shell_average requires |k| > 0")
    if kn > q_hat.grid.k_nyquist:
        raise ValueError(
            f"|k|={kn:.4g} beyond grid Nyquist {q_hat.grid.k_nyquist:.4g}"
        )
    sph = sphere if sphere is not None else SphereGrid.lebedev(26)
    samples = trilinear_sample(q_hat, kv[None, :] - kn * sph.nodes)
    return complex(0.5 * np.sum(sph.weights * samples))


def fourier_at(f: ScalarField, kvecs: np.ndarray) -> np.ndarray:
    """q~ evaluated at arbitrary wavevectors by the direct sum (off-grid exact).

    Same normalization as to_spectral; used where bitwise agreement between
    table builders and single-point evaluations matters.
    """
    g = f.grid
    pts = g.points()
    kv = np.atleast_2d(np.asarray(kvecs, dtype=float))
    phases = np.exp(1j * (kv @ pts.T))
    vals = g.cell_volume * (phases @ f.values.ravel())
    return vals if np.asarray(kvecs).ndim > 1 else vals[0]

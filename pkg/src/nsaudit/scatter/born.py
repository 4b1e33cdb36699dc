"""Scattering amplitudes of grid potentials: first Born and the iterated series.

Phases are referenced to the box center, so the first Born amplitude of an
origin-centered potential is the real continuum transform at the momentum
transfer k*(theta - theta'); the corner-referenced transform differs by the
unimodular factor e^{i kappa . c}.  The outgoing resolvent kernel
e^{ik|x-y|}/(4*pi*|x-y|) is applied by direct quadrature over the
potential's support (singular cell replaced by its analytic average over a
grid cell), chunked through the compiled kernel backend when available.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import _accel
from ..core.grid import Grid3, ScalarField
from ..core.sphere import SphereGrid
from ..errors import NsauditError

# cube-cell averages of the singular kernel pieces, from refinement-converged
# quadrature of the unit cube (see tests/test_kernels.py for the re-derivation)
CUBE_INV_R = 2.3800773663      # integral over unit cube of 1/|r|
CUBE_ABS_R = 0.4802959794      # integral over unit cube of |r|
CUBE_PAIR_INV_R2 = 5.6337151582  # integral over unit cube pair of 1/|x-y|^2


def green_cell_average(k: float, h: float) -> complex:
    """Analytic mean of e^{ik|r|}/(4*pi*|r|) over a cube of side h about 0.

    Expansion e^{ikr}/r = 1/r + ik - k^2 r / 2 + O(k^3 r^2) averaged term by
    term; the O(k^3 h^2) remainder is far below quadrature error for the
    resolvable k range.
    """
    return (
        CUBE_INV_R / (4.0 * np.pi * h)
        + 1j * k / (4.0 * np.pi)
        - k * k * h * CUBE_ABS_R / (8.0 * np.pi)
    )


class PotentialSample:
    """Real potential on the grid with cached support and Rollnik data."""

    def __init__(self, q: ScalarField, support_rel_tol: float = 1e-12):
        self.q = q
        self.grid = q.grid
        absq = np.abs(q.values)
        mx = absq.max()
        mask = absq >= support_rel_tol * mx if mx > 0 else absq > 0
        self._support_idx = np.where(mask.ravel())[0]
        pts = q.grid.points() - q.grid.center
        self.support_points = pts[self._support_idx]
        self.support_values = q.values.ravel()[self._support_idx]
        if len(self._support_idx):
            self.support_radius = float(
                np.max(np.linalg.norm(self.support_points, axis=1)))
        else:
            self.support_radius = 0.0
        self.decay_ok = q.decays()
        self._rollnik_cache = {}

    def scaled(self, factor: float) -> "PotentialSample":
        return PotentialSample(ScalarField(self.grid, factor * self.q.values))


@dataclass
class AmplitudeTable:
    """Sampled amplitude A[k, theta_out, theta_in] on k-grid x sphere^2."""

    k_grid: np.ndarray          # positive, uniform, k_i = (i+1)*dk
    sphere: SphereGrid
    values: np.ndarray          # (nk, m, m) complex
    born_order: int
    potential_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nk, m = len(self.k_grid), self.sphere.size
        if self.values.shape != (nk, m, m):
            raise ValueError("amplitude table shape mismatch")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("amplitude table contains non-finite values")
        dk = self.k_grid[0]
        if np.max(np.abs(self.k_grid - dk * np.arange(1, nk + 1))) > 1e-9 * dk:
            raise ValueError("k grid must be uniform starting at dk")

    @property
    def dk(self) -> float:
        return float(self.k_grid[0])

    @property
    def k_max(self) -> float:
        return float(self.k_grid[-1])

    def k_index(self, k: float) -> int:
        idx = int(round(k / self.dk)) - 1
        if idx < 0 or idx >= len(self.k_grid) or abs(self.k_grid[idx] - k) > 1e-9 * self.dk:
            raise NsauditError(f"k={k:.6g} is not on the table grid")
        return idx

    def swap_symmetry_defect(self) -> float:
        """Relative deviation from A(th', th) = conj(A(th, th')) (real potentials)."""
        sw = np.conj(np.swapaxes(self.values, 1, 2))
        scale = np.max(np.abs(self.values))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(self.values - sw)) / scale)


def _resolvable(grid: Grid3, k: float) -> bool:
    return k * grid.length / (2 * np.pi) < grid.n / 3.0


def centered_transform_at(q: PotentialSample, kappa: np.ndarray) -> complex:
    """dx^3 * sum_x q(x) e^{i kappa . (x - c)} over the support (direct sum)."""
    phase = np.exp(1j * (q.support_points @ np.asarray(kappa, dtype=float)))
    return complex(q.grid.cell_volume * np.dot(q.support_values, phase))


def born_amplitude(q: PotentialSample, k: float, theta_out, theta_in) -> complex:
    """First Born amplitude -(1/4*pi) q~_c(k*(theta_in - theta_out)).

    q~_c is the center-referenced transform; for an even centered potential
    this is the real closed-form transform at the momentum transfer.
    """
    if not (k > 0) or not _resolvable(q.grid, k):
        raise NsauditError(
            f"k={k:.6g} outside the resolvable range (needs 0 < k*L/2pi < n/3)")
    kappa = k * (np.asarray(theta_in, float) - np.asarray(theta_out, float))
    return -centered_transform_at(q, kappa) / (4.0 * np.pi)


def _born1_table(q: PotentialSample, k_grid, sphere) -> np.ndarray:
    """Order-1 table via the same code path as born_amplitude (bitwise equal)."""
    m = sphere.size
    out = np.empty((len(k_grid), m, m), dtype=complex)
    for ik, k in enumerate(k_grid):
        for a in range(m):
            for b in range(m):
                out[ik, a, b] = born_amplitude(q, k, sphere.nodes[a], sphere.nodes[b])
    return out


def born_series_amplitude(q: PotentialSample, k_grid, sphere: SphereGrid,
                          order: int = 2) -> AmplitudeTable:
    """Iterated Lippmann-Schwinger amplitude table.

    Psi_{m+1} = phi0 + G0+[q Psi_m] with the outgoing kernel applied by direct
    quadrature over the support; the amplitude is assembled from the last
    iterate.  order=1 reduces exactly (bitwise) to born_amplitude.
    """
    if order < 1:
        raise ValueError("born order must be >= 1")
    k_grid = np.asarray(k_grid, dtype=float)
    for k in k_grid:
        if not _resolvable(q.grid, k):
            raise NsauditError(f"k={k:.6g} beyond the resolvable range")
    rollnik_ind = q._rollnik_cache.get("direct")
    if rollnik_ind is not None and rollnik_ind / (4 * np.pi) ** 2 >= 1.0:
        import warnings

        warnings.warn("Born contraction heuristic violated: Rollnik/(4pi)^2 >= 1")
    if order == 1:
        values = _born1_table(q, k_grid, sphere)
        return AmplitudeTable(k_grid, sphere, values, 1)
    g = q.grid
    vol = g.cell_volume
    pts = q.support_points
    qv = q.support_values
    nt = sphere.size
    values = np.empty((len(k_grid), nt, nt), dtype=complex)
    prev_growth = 0
    last_norm = None
    for ik, k in enumerate(k_grid):
        phases_in = np.exp(1j * k * (pts @ sphere.nodes.T))      # (N, nt)
        phases_out = np.exp(-1j * k * (pts @ sphere.nodes.T))
        self_val = green_cell_average(k, g.dx)
        psi = phases_in
        for _ in range(order - 1):
            scattered = _accel.helmholtz_apply(pts, qv[:, None] * psi, k, +1.0, self_val)
            new_psi = phases_in - vol * scattered
            nn = np.max(np.abs(new_psi - phases_in))
            if last_norm is not None and nn > last_norm:
                prev_growth += 1
                if prev_growth >= 2:
                    raise NsauditError(
                        f"Born iteration diverging at k={k:.4g} "
                        f"(increment grew twice in a row)")
            else:
                prev_growth = 0
            last_norm = nn
            psi = new_psi
        values[ik] = -(vol / (4 * np.pi)) * (phases_out.T * qv[None, :]) @ psi
    return AmplitudeTable(k_grid, sphere, values, order)


def optical_residual(table: AmplitudeTable) -> float:
    """sup over (k, theta) of |Im A(k,th,th) - (k/4pi) sum_j w_j |A(k,th_j,th)|^2|."""
    w = table.sphere.weights
    worst = 0.0
    for ik, k in enumerate(table.k_grid):
        diag = np.imag(np.diagonal(table.values[ik]))
        opt = (k / (4 * np.pi)) * np.einsum("j,jt->t", w, np.abs(table.values[ik]) ** 2)
        worst = max(worst, float(np.max(np.abs(diag - opt))))
    return worst

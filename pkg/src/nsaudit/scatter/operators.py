"""The angular-integral operators N and D, the TA norm, and the Riemann-problem
machinery that inverts (I - T_- D) to produce wave functions and potentials.

D carries the convention constant c_D = i/(2*pi): with S = I + (ik/2pi) A the
scattering operator is unitary, which both makes ||D|| <= 2 meaningful and is
the unique constant under which the one-sided projection of the amplitude jump
reproduces the Lippmann-Schwinger scattered wave at first order.  The raw
(unconventioned) value k * integral A f is exposed alongside.

Amplitude tables live on k > 0; all line operations extend them by the
real-potential reflection A(-k) = conj(A(k)), zero-pad to a power-of-two
window, and optionally taper the outer band so the extension decays.
"""

import numpy as np
from scipy.ndimage import map_coordinates

from .. import _accel
from ..errors import NotContractiveError, NsauditError
from .born import AmplitudeTable, born_series_amplitude, green_cell_average
from .line import apply_T_lines

#: convention constant of the D operator (see module docstring)
D_CONVENTION = 1j / (2.0 * np.pi)


def _node_index(sphere, theta):
    if isinstance(theta, (int, np.integer)):
        return int(theta)
    theta = np.asarray(theta, dtype=float)
    d = np.linalg.norm(sphere.nodes - theta[None, :], axis=1)
    i = int(np.argmin(d))
    if d[i] > 1e-9:
        raise NsauditError("theta is not a sphere-grid node")
    return i


def op_N(table: AmplitudeTable, k: float, theta) -> complex:
    """Quadrature of the first angular slot: N A (k, theta) = sum_j w_j A(k, th_j, theta)."""
    ik = table.k_index(k)
    it = _node_index(table.sphere, theta)
    return complex(np.dot(table.sphere.weights, table.values[ik, :, it]))


def op_D(table: AmplitudeTable, f: np.ndarray, conventioned: bool = True) -> np.ndarray:
    """(D f)(k, theta) = c_D * k * sum_j w_j A(k, th_j, theta) f(k, th_j).

    f has shape (nk, m); conventioned=False drops c_D (the raw Eq.-(8) form).
    """
    f = np.asarray(f)
    nk, m = len(table.k_grid), table.sphere.size
    if f.shape[:2] != (nk, m):
        raise NsauditError(f"operand shape {f.shape} does not match table ({nk}, {m})")
    out = np.einsum("j,kjt,kj...->kt...", table.sphere.weights, table.values, f)
    scale = table.k_grid.reshape((nk,) + (1,) * (out.ndim - 1))
    if conventioned:
        return D_CONVENTION * scale * out
    return scale * out


def d_operator_norm(table: AmplitudeTable) -> float:
    """Discretized operator norm of D on the weighted angular L2, max over k."""
    w = table.sphere.weights
    sqw = np.sqrt(w)
    worst = 0.0
    for ik, k in enumerate(table.k_grid):
        block = np.abs(D_CONVENTION) * k * (sqw[:, None] * table.values[ik].T * sqw[None, :])
        worst = max(worst, float(np.linalg.svd(block, compute_uv=False)[0]))
    return worst


class LineExtendedTable:
    """Amplitude table extended to the symmetric k-line for Cauchy operators.

    Negative wavenumbers carry the complex-conjugate reflection (real
    potentials), the k = 0 bin takes the real part of the first sample, the
    zero-padded outer band is smoothly tapered when requested.
    """

    def __init__(self, table: AmplitudeTable, pad_factor: int = 2, taper: float = 0.15):
        nk = len(table.k_grid)
        m = 64
        while m < 2 * pad_factor * nk:
            m *= 2
        self.table = table
        self.m = m
        self.dk = table.dk
        self.k_line = self.dk * (np.arange(m) - m // 2)
        nt = table.sphere.size
        A = np.zeros((m, nt, nt), dtype=complex)
        half = m // 2
        A[half + 1:half + 1 + nk] = table.values
        A[half - 1:half - 1 - nk:-1] = np.conj(table.values)
        A[half] = np.real(table.values[0])
        if taper > 0:
            kmax = table.k_max
            akl = np.abs(self.k_line)
            k0 = kmax * (1.0 - taper)
            win = np.ones(m)
            ramp = (akl >= k0) & (akl <= kmax)
            win[ramp] = 0.5 * (1 + np.cos(np.pi * (akl[ramp] - k0) / (kmax - k0)))
            win[akl > kmax] = 0.0
            A *= win[:, None, None]
        self.values = A
        self.weights = table.sphere.weights
        self.nodes = table.sphere.nodes

    def k_index(self, k: float) -> int:
        idx = self.m // 2 + int(round(k / self.dk))
        if idx < 0 or idx >= self.m:
            raise NsauditError(f"k={k:.6g} outside the extended line window")
        return idx

    def apply_D(self, f: np.ndarray) -> np.ndarray:
        out = np.einsum("mjt,mj...->mt...", self.values,
                        self.weights.reshape((1, -1) + (1,) * (f.ndim - 2)) * f)
        scale = self.k_line.reshape((self.m,) + (1,) * (f.ndim - 1))
        return D_CONVENTION * scale * out

    def apply_TmD(self, f: np.ndarray) -> np.ndarray:
        df = self.apply_D(f)
        return apply_T_lines(df, axis=0) - 0.5 * df


def ta_norm(table: AmplitudeTable, taper: float = 0.15) -> float:
    """sup over all stored samples of |T A| + |A|, T acting in k per angle pair."""
    ext = LineExtendedTable(table, taper=taper)
    ta = apply_T_lines(ext.values, axis=0)
    return float(np.max(np.abs(ta) + np.abs(ext.values)))


def neumann_solve(table, rhs: np.ndarray, tol: float = 1e-12, n_max: int = 200,
                  warn_norm: bool = True):
    """Solve (I - T_- D) g = rhs by the Neumann iteration g <- rhs + T_- D g.

    ``table`` may be an AmplitudeTable or a prebuilt LineExtendedTable; rhs
    lives on (line-k, angle[, batch]).  Returns (g, iterations, increment).
    Raises NotContractiveError when n_max is hit with growing increments.
    """
    ext = table if isinstance(table, LineExtendedTable) else LineExtendedTable(table)
    if warn_norm:
        tn = ta_norm(ext.table)
        if tn >= 1.0:
            import warnings

            warnings.warn(f"contraction indicator ||A||_TA = {tn:.3g} >= 1")
    g = rhs.copy()
    prev_inc = np.inf
    growth = 0
    for it in range(1, n_max + 1):
        step_term = ext.apply_TmD(g)
        new = rhs + step_term
        inc = float(np.max(np.abs(new - g)))
        g = new
        if inc < tol:
            return g, it, inc
        growth = growth + 1 if inc > prev_inc else 0
        prev_inc = inc
    if growth >= 1:
        raise NotContractiveError(
            f"Neumann iteration diverging: increment {inc:.3e} after {n_max} steps")
    return g, n_max, inc


def phi0_line(ext: LineExtendedTable, points: np.ndarray) -> np.ndarray:
    """Incident plane waves e^{i k theta . x} on (line-k, angle, point)."""
    pts = np.atleast_2d(points)
    args = np.einsum("tj,xj->tx", ext.nodes, pts)
    return np.exp(1j * ext.k_line[:, None, None] * args[None, :, :])


def wavefunction_minus(table: AmplitudeTable, blaschke_delta, x, z: float,
                       tol: float = 1e-12, n_max: int = 200):
    """Psi_-(sqrt(z), theta, x) = (1/Delta) (I - T_-D)^-1 T_-D phi0 + phi0.

    Returns the sphere-grid vector at the table's nearest line-k to sqrt(z);
    ``blaschke_delta`` is a callable k -> Delta(k) (1.0 for no bound states).
    """
    if not (z > 0):
        raise NsauditError("energy z must be positive")
    ext = LineExtendedTable(table)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    ph0 = phi0_line(ext, pts)
    rhs = ext.apply_TmD(ph0)
    g, _, _ = neumann_solve(ext, rhs, tol=tol, n_max=n_max, warn_norm=False)
    k = np.sqrt(z)
    ik = ext.m // 2 + int(round(k / ext.dk))
    delta = blaschke_delta(ext.k_line[ik]) if callable(blaschke_delta) else blaschke_delta
    psi = g[ik] / delta + ph0[ik]
    return psi if np.asarray(x).ndim > 1 else psi[:, 0]


class ReconstructionResult:
    def __init__(self, points, primary, alternative, flagged, refine_history):
        self.points = points          # (n, n, n, 3) target coordinates (centered)
        self.primary = primary        # (n, n, n) potential estimate
        self.alternative = alternative  # same shape, literal ratio mode
        self.flagged = flagged        # boolean mask of excluded wave nodes
        self.refine_history = refine_history  # per-pass max corrections


def _fd2_beta(k, nodes, h):
    """(Delta_FD + k^2) e^{ik theta x} / e^{ik theta x}: exact plane-wave bias."""
    return k * k - (4.0 / h**2) * np.sum(np.sin(k * nodes * h / 2.0) ** 2, axis=1)


def _richardson(zs, stack):
    vals = stack.copy()
    for lev in range(1, len(zs)):
        nxt = vals.copy()
        for i in range(len(zs) - lev):
            nxt[i] = vals[i + 1] + (vals[i] - vals[i + 1]) * zs[i + 1] / (zs[i + 1] - zs[i])
        vals = nxt
    return vals[0]


def _primary_mode(ext, gsol, ph0, z_sequence, blaschke_delta, ng, spacing,
                  node_floor, hsol=None):
    """Angular average of the ratio (Delta_x Psi + z Psi)/Psi, Richardson in z.

    With hsol given (the solve with right-hand side T_-D[-k^2 phi0]), the
    Laplacian is exact: the x dependence enters only through phi0 and every
    pipeline operator is diagonal in x, so Delta_x commutes through the
    inversion.  Otherwise second-order central differences are used with the
    exact plane-wave bias subtracted.  Returns (estimate, flagged mask).
    """
    nodes, wts = ext.nodes, ext.weights
    nt = len(wts)
    prim = []
    flagged = np.zeros((ng,) * 3, dtype=bool)
    for z in z_sequence:
        k = np.sqrt(z)
        ik = ext.k_index(k)
        delta = blaschke_delta(ext.k_line[ik]) if callable(blaschke_delta) else blaschke_delta
        psi = (gsol[ik] / delta + ph0[ik]).reshape(nt, ng, ng, ng)
        small = np.min(np.abs(psi), axis=0) < node_floor
        flagged |= small
        den = np.where(np.abs(psi) < node_floor, np.nan, psi)
        if hsol is not None:
            # (Delta + z) phi0 vanishes at k = sqrt(z); the solved part carries
            # Delta_x psi = h/Delta with h from the -k^2-weighted right side
            num = (hsol[ik] / delta + z * gsol[ik] / delta).reshape(nt, ng, ng, ng)
            ratio = num / den
        else:
            lap = sum(np.roll(psi, s, a) for s in (1, -1) for a in (1, 2, 3))
            lap = (lap - 6.0 * psi) / spacing**2
            beta = _fd2_beta(ext.k_line[ik], nodes, spacing)
            ratio = (lap + z * psi) / den - beta[:, None, None, None]
        prim.append(np.einsum("t,txyz->xyz", wts / (4 * np.pi), ratio))
    return _richardson(np.asarray(z_sequence), np.stack(prim)).real, flagged


def _alternative_mode(ext, gsol, ph0, z_sequence, blaschke_delta, ng, node_floor):
    """Literal N-averaged ratio with H0 phi0 = k^2 phi0 in the numerator."""
    wts = ext.weights
    rhs_h0 = ext.apply_TmD((ext.k_line**2)[:, None, None] * ph0)
    gh0, _, _ = neumann_solve(ext, rhs_h0, warn_norm=False)
    alt = []
    for z in z_sequence:
        ik = ext.k_index(np.sqrt(z))
        delta = blaschke_delta(ext.k_line[ik]) if callable(blaschke_delta) else blaschke_delta
        num = np.einsum("t,tx->x", wts, gh0[ik] / delta).reshape(ng, ng, ng)
        den = np.einsum("t,tx->x", wts, gsol[ik] / delta + ph0[ik]).reshape(ng, ng, ng)
        alt.append(num / np.where(np.abs(den) < node_floor, np.nan, den))
    return _richardson(np.asarray(z_sequence), np.stack(alt)).real


def _solve_pair(ext, ph0, exact: bool):
    """g from rhs T_-D phi0, plus (when exact) h from rhs T_-D[-k^2 phi0]."""
    g, _, _ = neumann_solve(ext, ext.apply_TmD(ph0), warn_norm=False)
    h = None
    if exact:
        h, _, _ = neumann_solve(
            ext, ext.apply_TmD(-(ext.k_line**2)[:, None, None] * ph0),
            warn_norm=False)
    return g, h


def reconstruct_potential(table: AmplitudeTable, blaschke_delta=1.0,
                          n_targets: int = 9, spacing: float = 0.2,
                          z_sequence=None, refine: int = 0,
                          potential_for_refine=None, laplacian: str = "exact",
                          node_floor: float = 1e-6) -> ReconstructionResult:
    """Potential from the amplitude table on a centered cubic target grid.

    Primary mode: the angular Lebedev average of (Delta_x Psi_- + z Psi_-)/Psi_-,
    Richardson extrapolated over the z sequence.  laplacian="exact" carries
    Delta_x through the inversion (the operators are diagonal in x);
    laplacian="fd" uses second-order central differences with the exact
    plane-wave bias subtracted.  The alternative mode evaluates the N-averaged
    ratio [N (I-T_-D)^-1 T_-D H0 phi0] / [N Psi_-]; both are returned.

    refine > 0 applies defect-correction passes: the current estimate, clipped
    to the angularly-resolved sphere, is pushed through the forward Born
    solver and the primary-mode inversion of the amplitude mismatch is added
    back.  ``potential_for_refine`` supplies the forward-map geometry.
    """
    if laplacian not in ("exact", "fd"):
        raise NsauditError(f"laplacian mode must be exact|fd, got '{laplacian}'")
    ext = LineExtendedTable(table)
    if z_sequence is None:
        dk = table.dk
        kcands = [k for k in (1.0, 0.75, 0.5) if k <= table.k_max / 2]
        if len(kcands) < 3:
            kcands = [table.k_grid[max(0, len(table.k_grid) // 4 - 1)] * f
                      for f in (2.0, 1.5, 1.0)]
        z_sequence = [(dk * round(k / dk)) ** 2 for k in kcands]
    z_sequence = sorted(set(float(z) for z in z_sequence), reverse=True)
    if len(z_sequence) < 3:
        raise NsauditError("z sequence needs at least 3 distinct entries")
    ng = n_targets + 2  # one ghost layer for the FD stencil / clip margin
    axis = (np.arange(ng) - ng // 2) * spacing
    P = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    tpts = P.reshape(-1, 3)
    ph0 = phi0_line(ext, tpts)
    exact = laplacian == "exact"
    g, h = _solve_pair(ext, ph0, exact)
    primary, flagged = _primary_mode(ext, g, ph0, z_sequence, blaschke_delta,
                                     ng, spacing, node_floor, hsol=h)
    alternative = _alternative_mode(ext, g, ph0, z_sequence, blaschke_delta,
                                    ng, node_floor)
    history = []
    if refine > 0:
        if potential_for_refine is None:
            raise NsauditError("refine > 0 needs potential_for_refine for geometry")
        grid = potential_for_refine.grid
        order = max(table.born_order, 1)
        # clip to the sphere inside which the angular quadrature resolves phases
        rr = np.sqrt(np.sum(P**2, axis=-1))
        r1 = axis[-1]
        r0 = 0.75 * r1
        clip = np.ones((ng,) * 3)
        band = (rr >= r0) & (rr <= r1)
        clip[band] = 0.5 * (1 + np.cos(np.pi * (rr[band] - r0) / (r1 - r0)))
        clip[rr > r1] = 0.0
        centered = grid.points() - grid.center
        frac = (centered / spacing + ng // 2).T
        from ..core.grid import ScalarField
        from .born import PotentialSample

        for _ in range(refine):
            q_on_grid = map_coordinates(primary * clip, frac, order=3,
                                        mode="constant", cval=0.0)
            sample = PotentialSample(ScalarField(grid, q_on_grid.reshape((grid.n,) * 3)))
            sim = born_series_amplitude(sample, table.k_grid, table.sphere, order)
            diff = AmplitudeTable(table.k_grid, table.sphere,
                                  table.values - sim.values, order)
            ext_d = LineExtendedTable(diff)
            gd, hd = _solve_pair(ext_d, ph0, exact)
            corr, fl2 = _primary_mode(ext_d, gd, ph0, z_sequence, blaschke_delta,
                                      ng, spacing, node_floor, hsol=hd)
            flagged |= fl2
            primary = primary + corr
            history.append(float(np.max(np.abs(corr))))
    core = (slice(1, -1),) * 3
    return ReconstructionResult(
        points=P[core], primary=primary[core], alternative=alternative[core],
        flagged=flagged[core], refine_history=history)

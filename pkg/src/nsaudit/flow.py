"""Spectral time integration of the incompressible Navier-Stokes system.

The velocity is advanced in Fourier space by a second-order exponential
integrator built on the Duhamel form: the viscous factor e^{-nu*|k|^2*dt}
is applied exactly and the projected nonlinearity is integrated with the
phi1/phi2 quadrature (ETD2 predictor-corrector).  Pressure is diagnostic,
recovered from the divergence structure of the momentum equation; the
mean-flow mode is pinned to zero.
"""

from dataclasses import dataclass, field

import numpy as np

from .core.grid import Grid3, ScalarField, SpectralScalar, SpectralVector, _mirror_index
from .core.transforms import to_physical_complex, to_spectral
from .errors import NumericalBlowupError

DIV_FREE_TOL = 1e-10


def _spectral_forward(values, grid):
    return grid.cell_volume * grid.n**3 * np.fft.ifftn(values)


def divergence_ratio(coeffs, grid) -> float:
    """max_k |k . u(k)| relative to max_k |k| |u(k)|."""
    kx, ky, kz = grid.k_components()
    div = kx * coeffs[0] + ky * coeffs[1] + kz * coeffs[2]
    kmag = np.sqrt(grid.k_squared)
    scale = max(np.max(kmag * np.abs(c)) for c in coeffs)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div)) / scale)


class FlowState:
    """Time-stamped divergence-free spectral velocity (immutable snapshot)."""

    def __init__(self, t: float, grid: Grid3, coeffs, validate: bool = True):
        self.t = float(t)
        self.grid = grid
        self.coeffs = [np.asarray(c, dtype=complex) for c in coeffs]
        for c in self.coeffs:
            c.setflags(write=False)
        if validate:
            self._validate()

    def _validate(self):
        g = self.grid
        for c in self.coeffs:
            if c.shape != (g.n,) * 3:
                raise ValueError("velocity component shape mismatch")
            if abs(c[0, 0, 0]) > 1e-12 * max(1.0, np.max(np.abs(c))):
                raise ValueError("mean-flow mode must vanish")
        if divergence_ratio(self.coeffs, g) > DIV_FREE_TOL:
            raise ValueError("velocity is not divergence-free")
        scale = max(np.max(np.abs(c)) for c in self.coeffs)
        if scale > 0:
            idx = _mirror_index(g.n)
            for c in self.coeffs:
                defect = np.max(np.abs(c - np.conj(c[idx]))) / scale
                if defect > 1e-10:
                    raise ValueError("velocity violates Hermitian symmetry")

    @property
    def velocity(self) -> SpectralVector:
        return SpectralVector([SpectralScalar(self.grid, np.array(c)) for c in self.coeffs])

    def energy(self) -> float:
        """Kinetic energy integral ||q||^2 = integral |q|^2 dx (spectral Parseval)."""
        return float(sum(np.sum(np.abs(c) ** 2) for c in self.coeffs) / self.grid.length**3)

    def gradient_norm_sq(self) -> float:
        """||grad q||^2 evaluated spectrally."""
        k2 = self.grid.k_squared
        return float(sum(np.sum(k2 * np.abs(c) ** 2) for c in self.coeffs) / self.grid.length**3)

    def physical(self):
        """The three real velocity fields."""
        return [
            ScalarField(self.grid, to_physical_complex(c, self.grid).real)
            for c in self.coeffs
        ]


@dataclass(frozen=True)
class FluidParams:
    nu: float
    dt: float
    t_end: float
    dealias: bool = True

    def __post_init__(self):
        if not (self.nu > 0):
            raise ValueError(f"viscosity must be positive, got {self.nu}")
        if not (self.dt > 0):
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.dt > self.t_end:
            raise ValueError("dt exceeds t_end")


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing field description.

    kind "none": zero forcing.
    kind "taylor-green": steady TG-shaped body force, optionally decaying
        as e^{-decay*t}; parameters: amplitude, decay (default 0).
    kind "snapshot-sequence": piecewise-linear interpolation in t of raw
        snapshot fields; parameters: times (sorted), loader(index) callback.
    Evaluations return the raw spectral field; the solver Leray-projects
    before use while the pressure sees the unprojected field.
    """

    kind: str = "none"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("none", "taylor-green", "snapshot-sequence"):
            raise ValueError(f"unknown forcing kind '{self.kind}'")

    def is_zero(self) -> bool:
        return self.kind == "none"

    def evaluate(self, grid: Grid3, t: float):
        """Raw (unprojected) spectral forcing components at time t, or None."""
        if self.kind == "none":
            return None
        if self.kind == "taylor-green":
            amp = float(self.params["amplitude"])
            decay = float(self.params.get("decay", 0.0))
            amp = amp * np.exp(-decay * t)
            f = _taylor_green_fields(grid, amp)
            return [_spectral_forward(comp, grid) for comp in f]
        times = self.params["times"]
        loader = self.params["loader"]
        idx = int(np.searchsorted(times, t, side="right")) - 1
        idx = min(max(idx, 0), len(times) - 2) if len(times) > 1 else 0
        f0 = loader(idx)
        if len(times) == 1:
            return [_spectral_forward(c, grid) for c in f0]
        t0, t1 = times[idx], times[idx + 1]
        w = 0.0 if t1 == t0 else np.clip((t - t0) / (t1 - t0), 0.0, 1.0)
        f1 = loader(idx + 1)
        return [
            _spectral_forward((1 - w) * a + w * b, grid) for a, b in zip(f0, f1)
        ]

    def scaled(self, amplitude_factor: float, time_factor: float) -> "ForcingSpec":
        """Forcing for the rescaled system: f' (x, t') = factor * f(x, t'/A)."""
        if self.kind == "none":
            return self
        if self.kind == "taylor-green":
            p = dict(self.params)
            p["amplitude"] = float(p["amplitude"]) * amplitude_factor
            p["decay"] = float(p.get("decay", 0.0)) / time_factor
            return ForcingSpec("taylor-green", p)
        p = dict(self.params)
        base_loader = p["loader"]
        p["times"] = [t * time_factor for t in p["times"]]
        p["loader"] = lambda i: [amplitude_factor * c for c in base_loader(i)]
        return ForcingSpec("snapshot-sequence", p)


def _taylor_green_fields(grid: Grid3, amplitude: float):
    kappa = 2 * np.pi / grid.length
    X, Y, Z = grid.x_components()
    u = amplitude * np.sin(kappa * X) * np.cos(kappa * Y) * np.cos(kappa * Z)
    v = -amplitude * np.cos(kappa * X) * np.sin(kappa * Y) * np.cos(kappa * Z)
    return [u, v, np.zeros((grid.n,) * 3)]


def leray_project(coeffs, grid: Grid3):
    """(delta_ij - k_i k_j / |k|^2) applied modewise; k=0 mode zeroed."""
    kx, ky, kz = grid.k_components()
    k2 = np.where(grid.k_squared == 0.0, 1.0, grid.k_squared)
    kdot = (kx * coeffs[0] + ky * coeffs[1] + kz * coeffs[2]) / k2
    out = [coeffs[0] - kx * kdot, coeffs[1] - ky * kdot, coeffs[2] - kz * kdot]
    for c in out:
        c[0, 0, 0] = 0.0
    return out


def leray_project_vector(v: SpectralVector) -> SpectralVector:
    out = leray_project([c.coeffs for c in v.components], v.grid)
    return SpectralVector([SpectralScalar(v.grid, c) for c in out])


def dealias_mask(grid: Grid3) -> np.ndarray:
    """Two-thirds rule: keep modes with every |k_i| <= (2*pi/L) * n/3."""
    cut = grid.dk * grid.n / 3.0
    kx, ky, kz = grid.k_components()
    return (np.abs(kx) <= cut) & (np.abs(ky) <= cut) & (np.abs(kz) <= cut)


def init_flow(name: str, grid: Grid3, amplitude: float, seed: int = 0,
              spectrum_slope: float = 2.0, snapshot=None) -> FlowState:
    """Initial conditions: taylor-green | random-solenoidal | from-snapshot.

    taylor-green is analytically solenoidal; random-solenoidal draws Hermitian
    Gaussian modes with an |k|^-slope envelope, Leray-projects, and scales so
    the L2 norm sqrt(int |u|^2) equals ``amplitude``.
    """
    if name == "taylor-green":
        fields = _taylor_green_fields(grid, amplitude)
        coeffs = [_spectral_forward(f, grid) for f in fields]
        coeffs = leray_project(coeffs, grid)  # removes roundoff-level residue
        return FlowState(0.0, grid, coeffs)
    if name == "random-solenoidal":
        rng = np.random.default_rng(seed)
        k2 = grid.k_squared
        kmag = np.sqrt(np.where(k2 == 0.0, 1.0, k2))
        envelope = kmag ** (-spectrum_slope)
        mask = dealias_mask(grid)
        coeffs = []
        for _ in range(3):
            white = rng.standard_normal((grid.n,) * 3)
            c = _spectral_forward(white, grid) * envelope * mask
            coeffs.append(c)
        coeffs = leray_project(coeffs, grid)
        norm = np.sqrt(sum(np.sum(np.abs(c) ** 2) for c in coeffs) / grid.length**3)
        if norm > 0:
            coeffs = [c * (amplitude / norm) for c in coeffs]
        return FlowState(0.0, grid, coeffs)
    if name == "from-snapshot":
        if snapshot is None:
            raise ValueError("from-snapshot initialization needs snapshot data")
        t, fields = snapshot
        if fields[0].shape != (grid.n,) * 3:
            raise ValueError("snapshot grid does not match requested grid")
        coeffs = leray_project([_spectral_forward(f, grid) for f in fields], grid)
        return FlowState(t, grid, coeffs)
    raise ValueError(f"unknown initial condition '{name}'")


def nonlinear_term(state: FlowState, dealias: bool = True):
    """Spectral form of (q . grad) q via physical-space products.

    Velocities and the nine gradients are brought to physical space, the
    convective products formed pointwise and transformed back; with dealias
    on, modes beyond the 2/3 cutoff are zeroed before and after the product.
    """
    g = state.grid
    mask = dealias_mask(g) if dealias else 1.0
    kvecs = g.k_components_deriv()
    ud = [c * mask for c in state.coeffs]
    uphys = [to_physical_complex(c, g).real for c in ud]
    out = []
    for i in range(3):
        conv = np.zeros((g.n,) * 3)
        for j in range(3):
            dj = to_physical_complex(-1j * kvecs[j] * ud[i], g).real
            conv += uphys[j] * dj
        out.append(_spectral_forward(conv, g) * mask)
    return out


def velocity_product_tensor(state: FlowState, dealias: bool = True):
    """Transforms of q_i q_j (symmetric 3x3, returned as a dict (i,j)->array)."""
    g = state.grid
    mask = dealias_mask(g) if dealias else 1.0
    ud = [c * mask for c in state.coeffs]
    uphys = [to_physical_complex(c, g).real for c in ud]
    tensor = {}
    for i in range(3):
        for j in range(i, 3):
            tensor[(i, j)] = _spectral_forward(uphys[i] * uphys[j], g) * mask
    return tensor


def pressure_from_velocity(state: FlowState, forcing_coeffs=None,
                           dealias: bool = True) -> SpectralScalar:
    """Diagnostic pressure from the divergence structure of the momentum equation.

    p~(k) = -(k_i k_j / |k|^2) (q_i q_j)~ + i (k . f~) / |k|^2, signs fixed so
    the divergence of the discrete momentum equation vanishes identically;
    p~(0) = 0.
    """
    g = state.grid
    kx, ky, kz = g.k_components()
    kvecs = (kx, ky, kz)
    k2 = np.where(g.k_squared == 0.0, 1.0, g.k_squared)
    tensor = velocity_product_tensor(state, dealias)
    quad = np.zeros((g.n,) * 3, dtype=complex)
    for i in range(3):
        for j in range(3):
            tij = tensor[(min(i, j), max(i, j))]
            quad += kvecs[i] * kvecs[j] * tij
    p = -quad / k2
    if forcing_coeffs is not None:
        kdotf = kx * forcing_coeffs[0] + ky * forcing_coeffs[1] + kz * forcing_coeffs[2]
        p = p + 1j * kdotf / k2
    p[0, 0, 0] = 0.0
    return SpectralScalar(g, p)


def _phi1(z):
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _phi2(z):
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 0.5 + zs / 6 + zs**2 / 24 + zs**3 / 120
    zb = z[~small]
    out[~small] = (np.expm1(zb) - zb) / zb**2
    return out


class _StepCoeffs:
    """Cached exponential-integrator factors for one (grid, nu, dt)."""

    def __init__(self, grid, nu, dt):
        z = -nu * grid.k_squared * dt
        self.expz = np.exp(z)
        self.f1 = dt * _phi1(z)
        self.f2 = dt * _phi2(z)
        self.key = (id(grid), nu, dt)


_coeff_cache = {}


def _coeffs_for(grid, nu, dt):
    key = (grid.n, grid.length, nu, dt)
    hit = _coeff_cache.get(key)
    if hit is None:
        hit = _StepCoeffs(grid, nu, dt)
        if len(_coeff_cache) > 8:
            _coeff_cache.clear()
        _coeff_cache[key] = hit
    return hit


def duhamel_rhs(state: FlowState, forcing: ForcingSpec, dealias: bool = True):
    """Projected right-hand side N = P(-(q.grad)q + f), the Duhamel integrand."""
    g = state.grid
    nl = nonlinear_term(state, dealias)
    rhs = [-c for c in nl]
    f = forcing.evaluate(g, state.t)
    if f is not None:
        rhs = [r + fc for r, fc in zip(rhs, f)]
    return leray_project(rhs, g)


def step(state: FlowState, params: FluidParams, forcing: ForcingSpec = ForcingSpec(),
         validate: bool = True) -> FlowState:
    """One ETD2 step of the discrete Duhamel formula."""
    g = state.grid
    dt = params.dt
    co = _coeffs_for(g, params.nu, dt)
    n0 = duhamel_rhs(state, forcing, params.dealias)
    pred = [co.expz * u + co.f1 * r for u, r in zip(state.coeffs, n0)]
    pred_state = FlowState(state.t + dt, g, pred, validate=False)
    n1 = duhamel_rhs(pred_state, forcing, params.dealias)
    new = [p + co.f2 * (b - a) for p, a, b in zip(pred, n0, n1)]
    for c in new:
        c[0, 0, 0] = 0.0
        if not np.all(np.isfinite(c)):
            raise NumericalBlowupError(state.t + dt)
    return FlowState(state.t + dt, g, new, validate=validate)


def rescale(state: FlowState, params: FluidParams, forcing: ForcingSpec, A: float):
    """The scaling t' = A t, u' = u/A, nu' = nu/A, f' = f/A^2.

    The transformation maps Navier-Stokes trajectories to Navier-Stokes
    trajectories; evolving the scaled triple commutes with scaling the
    evolved one.
    """
    if not (A > 0):
        raise ValueError(f"scaling factor must be positive, got {A}")
    new_state = FlowState(A * state.t, state.grid, [c / A for c in state.coeffs])
    new_params = FluidParams(
        nu=params.nu / A, dt=params.dt * A, t_end=params.t_end * A,
        dealias=params.dealias,
    )
    new_forcing = forcing.scaled(1.0 / A**2, A)
    return new_state, new_params, new_forcing

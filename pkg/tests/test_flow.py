import numpy as np
import pytest

from nsaudit.core import Grid3, ScalarField, norm_l2, to_spectral
from nsaudit.errors import NumericalBlowupError
from nsaudit.flow import (
    FlowState,
    FluidParams,
    ForcingSpec,
    divergence_ratio,
    init_flow,
    leray_project,
    nonlinear_term,
    pressure_from_velocity,
    rescale,
    step,
)

L = 2 * np.pi


@pytest.fixture(scope="module")
def grid():
    return Grid3(16, L)


@pytest.fixture(scope="module")
def grid32():
    return Grid3(32, L)


def spectral_forward(values, grid):
    return grid.cell_volume * grid.n**3 * np.fft.ifftn(values)


def test_taylor_green_divergence_and_energy(grid32):
    state = init_flow("taylor-green", grid32, 1.0)
    assert divergence_ratio(state.coeffs, grid32) <= 1e-12
    # oracle: int sin^2 cos^2 cos^2 over the box = pi^3, twice
    assert state.energy() == pytest.approx(2 * np.pi**3, rel=1e-12)


def test_random_solenoidal_invariants(grid):
    state = init_flow("random-solenoidal", grid, 2.0, seed=11)
    assert divergence_ratio(state.coeffs, grid) <= 1e-10
    for c in state.coeffs:
        assert c[0, 0, 0] == 0.0
    assert np.sqrt(state.energy()) == pytest.approx(2.0, rel=1e-12)


def test_init_unknown_name(grid):
    with pytest.raises(ValueError, match="unknown"):
        init_flow("vortex-soup", grid, 1.0)


def test_from_snapshot_grid_mismatch(grid):
    fields = [np.zeros((8, 8, 8))] * 3
    with pytest.raises(ValueError, match="grid"):
        init_flow("from-snapshot", grid, 1.0, snapshot=(0.0, fields))


class TestLeray:
    def test_solenoidal_unchanged(self, grid):
        state = init_flow("taylor-green", grid, 1.0)
        out = leray_project(state.coeffs, grid)
        for a, b in zip(out, state.coeffs):
            assert np.max(np.abs(a - b)) < 1e-12 * max(np.max(np.abs(b)), 1)

    def test_gradient_killed(self, grid):
        rng = np.random.default_rng(0)
        phi = spectral_forward(rng.standard_normal((grid.n,) * 3), grid)
        kx, ky, kz = grid.k_components()
        grad = [1j * kx * phi, 1j * ky * phi, 1j * kz * phi]
        out = leray_project(grad, grid)
        scale = max(np.max(np.abs(c)) for c in grad)
        assert max(np.max(np.abs(c)) for c in out) < 1e-12 * scale

    def test_divergence_free_every_mode(self, grid):
        rng = np.random.default_rng(1)
        v = [spectral_forward(rng.standard_normal((grid.n,) * 3), grid)
             for _ in range(3)]
        out = leray_project(v, grid)
        kx, ky, kz = grid.k_components()
        div = kx * out[0] + ky * out[1] + kz * out[2]
        kmag = np.sqrt(grid.k_squared)
        assert np.max(np.abs(div)) < 1e-12 * np.max(kmag * np.abs(out[0]))

    def test_idempotent(self, grid):
        rng = np.random.default_rng(2)
        v = [spectral_forward(rng.standard_normal((grid.n,) * 3), grid)
             for _ in range(3)]
        once = leray_project(v, grid)
        twice = leray_project(once, grid)
        scale = max(np.max(np.abs(c)) for c in once)
        assert max(np.max(np.abs(a - b)) for a, b in zip(once, twice)) < 1e-13 * scale


class TestNonlinearTerm:
    def test_zero_velocity(self, grid):
        state = FlowState(0.0, grid, [np.zeros((grid.n,) * 3, complex)] * 3)
        out = nonlinear_term(state)
        assert max(np.max(np.abs(c)) for c in out) == 0.0

    def test_taylor_green_analytic(self, grid32):
        # (u . grad) u for the TG field reduces to
        #   ( sin2x cos^2 z / 2,  sin2y cos^2 z / 2,  0 )
        state = init_flow("taylor-green", grid32, 1.0)
        out = nonlinear_term(state)
        X, Y, Z = grid32.x_components()
        expect = [
            0.5 * np.sin(2 * X) * np.cos(Z) ** 2 * np.ones_like(Y),
            0.5 * np.sin(2 * Y) * np.cos(Z) ** 2 * np.ones_like(X),
            np.zeros((grid32.n,) * 3),
        ]
        for got, exp in zip(out, expect):
            ref = spectral_forward(exp, grid32)
            assert np.max(np.abs(got - ref)) < 1e-10 * grid32.length**3

    def test_energy_neutrality(self, grid):
        rng = np.random.default_rng(3)
        for seed in (5, 6):
            state = init_flow("random-solenoidal", grid, 1.0, seed=seed)
            nl = nonlinear_term(state)
            proj = leray_project([-c for c in nl], grid)
            ip = sum(np.vdot(u, p) for u, p in zip(state.coeffs, proj))
            ip = ip / grid.length**3
            assert abs(ip) <= 1e-10 * state.energy()


class TestPressure:
    def test_zero(self, grid):
        state = FlowState(0.0, grid, [np.zeros((grid.n,) * 3, complex)] * 3)
        p = pressure_from_velocity(state)
        assert np.max(np.abs(p.coeffs)) == 0.0

    def test_matches_poisson_oracle(self, grid32):
        # independent spectral Poisson solve: -lap p = div((q.grad)q)
        state = init_flow("taylor-green", grid32, 1.0)
        p = pressure_from_velocity(state)
        nl = nonlinear_term(state)
        kx, ky, kz = grid32.k_components()
        k2 = np.where(grid32.k_squared == 0, 1.0, grid32.k_squared)
        div_nl = -1j * (kx * nl[0] + ky * nl[1] + kz * nl[2])
        oracle = -div_nl / k2
        oracle[0, 0, 0] = 0.0
        assert np.max(np.abs(p.coeffs - oracle)) < 1e-12 * np.max(np.abs(oracle))

    def test_momentum_residual_divergence_free(self, grid):
        state = init_flow("random-solenoidal", grid, 1.5, seed=9)
        forcing = ForcingSpec("taylor-green", {"amplitude": 0.3})
        f = forcing.evaluate(grid, 0.0)
        p = pressure_from_velocity(state, f)
        nl = nonlinear_term(state)
        kx, ky, kz = grid.k_components()
        nu = 0.1
        resid = [
            -nu * grid.k_squared * state.coeffs[i] - nl[i]
            + 1j * (kx, ky, kz)[i] * p.coeffs + f[i]
            for i in range(3)
        ]
        div = kx * resid[0] + ky * resid[1] + kz * resid[2]
        kmag = np.sqrt(grid.k_squared)
        scale = max(np.max(kmag * np.abs(r)) for r in resid)
        assert np.max(np.abs(div)) <= 1e-10 * scale


class TestStep:
    def test_stokes_decay_exact(self, grid):
        # single shear mode: (u.grad)u = 0, so the viscous factor is exact
        nu, dt = 0.37, 0.01
        coeffs = [np.zeros((grid.n,) * 3, complex) for _ in range(3)]
        amp = 0.8 * grid.length**3
        coeffs[0][0, 2, 0] = amp
        coeffs[0][0, -2, 0] = amp
        state = FlowState(0.0, grid, coeffs)
        params = FluidParams(nu=nu, dt=dt, t_end=1.0)
        new = step(state, params)
        k2 = (2 * grid.dk) ** 2
        expect = amp * np.exp(-nu * k2 * dt)
        assert new.coeffs[0][0, 2, 0] == pytest.approx(expect, rel=1e-14)

    def test_second_order_convergence(self, grid32):
        nu, T = 0.1, 0.25
        params_ref = FluidParams(nu=nu, dt=T / 80, t_end=T)
        state0 = init_flow("taylor-green", grid32, 1.0)

        def run(dt):
            params = FluidParams(nu=nu, dt=dt, t_end=T)
            s = state0
            for _ in range(round(T / dt)):
                s = step(s, params, validate=False)
            return s

        ref = run(T / 80)
        errs = []
        for dt in (T / 5, T / 10):
            s = run(dt)
            errs.append(max(np.max(np.abs(a - b))
                            for a, b in zip(s.coeffs, ref.coeffs)))
        order = np.log2(errs[0] / errs[1])
        assert 1.9 <= order <= 2.1

    def test_energy_dissipates(self, grid):
        state = init_flow("taylor-green", grid, 1.0)
        params = FluidParams(nu=0.1, dt=0.01, t_end=1.0)
        e = state.energy()
        for _ in range(20):
            state = step(state, params)
            e_new = state.energy()
            assert e_new <= e * (1 + 1e-8)
            e = e_new

    def test_blowup_detected(self, grid):
        coeffs = [np.zeros((grid.n,) * 3, complex) for _ in range(3)]
        coeffs[0][0, 1, 0] = coeffs[0][0, -1, 0] = 1e200
        state = FlowState(0.0, grid, coeffs, validate=False)
        params = FluidParams(nu=1e-8, dt=10.0, t_end=10.0)
        with pytest.raises(NumericalBlowupError):
            s = state
            for _ in range(50):
                s = step(s, params, validate=False)

    def test_invariants_preserved(self, grid):
        state = init_flow("random-solenoidal", grid, 1.0, seed=4)
        params = FluidParams(nu=0.2, dt=0.005, t_end=1.0)
        for _ in range(5):
            state = step(state, params)
        assert divergence_ratio(state.coeffs, grid) <= 1e-10
        for c in state.coeffs:
            assert c[0, 0, 0] == 0.0


class TestRescale:
    def test_identity_at_one(self, grid):
        state = init_flow("taylor-green", grid, 1.0)
        params = FluidParams(nu=0.1, dt=0.01, t_end=1.0)
        forcing = ForcingSpec()
        s2, p2, f2 = rescale(state, params, forcing, 1.0)
        assert s2.t == state.t
        assert p2.nu == params.nu
        for a, b in zip(s2.coeffs, state.coeffs):
            assert np.array_equal(a, b)

    def test_energy_scaling(self, grid):
        state = init_flow("taylor-green", grid, 1.0)
        params = FluidParams(nu=0.1, dt=0.01, t_end=1.0)
        s2, _, _ = rescale(state, params, ForcingSpec(), 2.0)
        assert s2.energy() == pytest.approx(state.energy() / 4.0, rel=1e-13)

    def test_rejects_nonpositive(self, grid):
        state = init_flow("taylor-green", grid, 1.0)
        params = FluidParams(nu=0.1, dt=0.01, t_end=1.0)
        with pytest.raises(ValueError):
            rescale(state, params, ForcingSpec(), -1.0)

    def test_commutes_with_evolution(self, grid):
        # evolve-then-scale equals scale-then-evolve (trajectory statement)
        A = 2.0
        nu, dt, T = 0.15, 0.02, 0.2
        forcing = ForcingSpec("taylor-green", {"amplitude": 0.2})
        state = init_flow("taylor-green", grid, 1.0)
        params = FluidParams(nu=nu, dt=dt, t_end=T)

        def evolve(s, p, f):
            for _ in range(round(p.t_end / p.dt)):
                s = step(s, p, f)
            return s

        evolved = evolve(state, params, forcing)
        scaled_after, _, _ = rescale(evolved, params, forcing, A)
        s0, p0, f0 = rescale(state, params, forcing, A)
        evolved_scaled = evolve(s0, p0, f0)
        scale = max(np.max(np.abs(c)) for c in scaled_after.coeffs)
        diff = max(np.max(np.abs(a - b))
                   for a, b in zip(scaled_after.coeffs, evolved_scaled.coeffs))
        assert diff <= 1e-6 * scale


def test_energy_balance_taylor_green(grid32):
    # |E(t) + 2 nu int ||grad q||^2 - E(0)| <= 1e-4 E(0), and halving dt
    # shrinks the residual at least 3x
    nu, T = 0.1, 0.4

    def residual(dt):
        params = FluidParams(nu=nu, dt=dt, t_end=T)
        state = init_flow("taylor-green", grid32, 1.0)
        e0 = state.energy()
        g_prev = state.gradient_norm_sq()
        diss = 0.0
        worst = 0.0
        for _ in range(round(T / dt)):
            state = step(state, params, validate=False)
            g = state.gradient_norm_sq()
            diss += 0.5 * dt * (g_prev + g)
            g_prev = g
            worst = max(worst, abs(state.energy() + 2 * nu * diss - e0))
        return worst / e0

    r1 = residual(0.02)
    assert r1 <= 1e-4
    r2 = residual(0.01)
    assert r1 / r2 >= 3.0


def test_forcing_spec_validation():
    with pytest.raises(ValueError):
        ForcingSpec("magic")
    f = ForcingSpec("taylor-green", {"amplitude": 1.0})
    assert not f.is_zero()
    assert ForcingSpec().is_zero()


def test_snapshot_sequence_forcing(grid):
    base = init_flow("taylor-green", grid, 1.0)
    fields = [c.values for c in base.physical()]
    spec = ForcingSpec("snapshot-sequence", {
        "times": [0.0, 1.0],
        "loader": lambda i: [f * (1.0 + i) for f in fields],
    })
    half = spec.evaluate(grid, 0.5)
    lo = spec.evaluate(grid, 0.0)
    hi = spec.evaluate(grid, 1.0)
    for h, a, b in zip(half, lo, hi):
        assert np.max(np.abs(h - 0.5 * (a + b))) < 1e-12 * np.max(np.abs(b))

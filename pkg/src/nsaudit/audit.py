"""Numerical audit of every computable a-priori estimate along a flow history.

Each inequality is evaluated with a signed margin (RHS - LHS, nonnegative
means the bound held).  Two verdict classes exist: PASS for identities and
bounds the discrete system must satisfy (energy balance, the Duhamel-form
Hoelder bound, the Duhamel replay, the two bound-state inequalities and the
Parseval split), MONITOR for paper inequalities whose constants are absent
or doubtful; those are computed and reported, never asserted.

The Duhamel integrand F1 is taken as the actual right-hand side of the
projected momentum equation, P(f - (q.grad)q); the accumulated
sup-over-k integrals C0, C2, C4 use it directly, which is what the
Hoelder bound requires.
"""

from dataclasses import dataclass, field

import numpy as np

from .core.grid import ScalarField, SpectralScalar
from .core.transforms import (
    moment_transform,
    moment_transform2,
    norm_l2,
    shell_average,
    to_physical_complex,
    trilinear_sample,
    weighted_norm,
)
from .errors import NsauditError
from .flow import FlowState, duhamel_rhs, leray_project, nonlinear_term, pressure_from_velocity

MONITOR_BOUND_FACTOR = 10.0

PASS_IDS = ("energy_balance", "eq52", "duhamel", "eq25", "eq26", "parseval_split")
MONITOR_IDS = ("eq36", "eq41", "eq42", "eq43", "eq44", "eq45", "eq46",
               "eq47", "eq48", "eq49", "eq27", "eq28", "eq59")


class RunHistory:
    """Uniform-cadence sequence of flow states plus the forcing that drove them."""

    def __init__(self, grid, nu: float, forcing, t_horizon: float):
        self.grid = grid
        self.nu = nu
        self.forcing = forcing
        self.t_horizon = t_horizon
        self.states: list[FlowState] = []

    def append(self, state: FlowState):
        if self.states and state.t <= self.states[-1].t:
            raise ValueError("history times must increase")
        self.states.append(state)

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    def __len__(self):
        return len(self.states)

    def rhs(self, i: int):
        """Duhamel integrand F1 = P(f - (q.grad)q) at snapshot i."""
        return duhamel_rhs(self.states[i], self.forcing)

    def forcing_coeffs(self, i: int):
        return self.forcing.evaluate(self.grid, self.states[i].t)

    def cadence(self) -> float:
        t = self.times
        if len(t) < 2:
            return 0.0
        dt = np.diff(t)
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise NsauditError("history cadence is not uniform")
        return float(dt[0])


@dataclass
class AuditRecord:
    t: float
    energy: float
    dissipation: float
    p_l2: float
    mom2: float
    mom4: float
    sup0: float
    sup1: float
    sup2: float
    C0: float
    C2: float
    C4: float
    margin_36: float
    margin_41: float
    margin_42: float
    margin_47: float
    margin_48: float
    margin_49: float
    margin_52_min: float
    duhamel_residual: float
    balance_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    CSV_FIELDS = ("t", "energy", "dissipation", "p_l2", "mom2", "mom4",
                  "sup0", "sup1", "sup2", "C0", "C2", "C4",
                  "margin_36", "margin_41", "margin_42", "margin_47",
                  "margin_48", "margin_49", "margin_52_min", "duhamel_residual")


@dataclass
class AuditReport:
    config_echo: dict
    records: list
    K: float
    A0: float
    CC0: float
    inequalities: dict
    lemma18_pairs: list

    @property
    def monitor_ids(self):
        return [k for k, v in self.inequalities.items() if v["class"] == "MONITOR"]

    def verdict_string(self) -> str:
        parts = []
        for key in sorted(self.inequalities):
            v = self.inequalities[key]
            status = v["class"]
            if v.get("ok") is not None:
                status += ":ok" if v["ok"] else ":violated"
            parts.append(f"{key}={status}")
        return ",".join(parts)


def default_lemma18_pairs(grid, count: int = 8, magnitudes: int = 4):
    """(|k|, e_k, e_lambda) triples spanning the resolved spectrum.

    Directions come from the axis/diagonal set with a cyclic partner; pairs
    closer than |e_k - e_lambda| = 0.1 are excluded, and magnitudes keep the
    probe vector |k|(e_k - e_lambda) inside the resolved cube.
    """
    base = np.array([
        [1, 0, 0], [0, 1, 0], [0, 0, 1],
        [1, 1, 0], [1, 0, 1], [0, 1, 1],
        [1, 1, 1], [1, -1, 0],
    ], dtype=float)
    base /= np.linalg.norm(base, axis=1)[:, None]
    pairs = []
    n = len(base)
    for i in range(min(count, n)):
        ek, el = base[i], base[(i + 3) % n]
        if np.linalg.norm(ek - el) < 0.1:
            continue
        pairs.append((ek, el))
    kmax = grid.k_nyquist
    mags = kmax * np.linspace(0.12, 0.45, magnitudes)
    out = []
    for ek, el in pairs:
        span = np.linalg.norm(ek - el)
        for km in mags:
            if km * span <= 0.95 * kmax and np.max(np.abs(km * (ek - el))) <= 0.95 * kmax:
                out.append((float(km), ek, el))
    return out


def lemma18_margins(q0_coeffs, q_coeffs, grid, nu, C0, pairs):
    """Margins RHS - LHS of the Hoelder bound at the probe vectors."""
    margins = []
    for km, ek, el in pairs:
        if np.allclose(ek, el):
            raise NsauditError("coincident unit vectors degenerate the bound")
        kappa = km * (ek - el)
        span = np.linalg.norm(ek - el)
        q0v = np.sqrt(sum(np.abs(trilinear_sample(SpectralScalar(grid, c), kappa)) ** 2
                          for c in q0_coeffs))
        qv = np.sqrt(sum(np.abs(trilinear_sample(SpectralScalar(grid, c), kappa)) ** 2
                         for c in q_coeffs))
        rhs = q0v + np.sqrt(C0 / (2.0 * nu)) / (km * span)
        margins.append((rhs - qv, rhs))
    return margins


def _vector_sup(mags_sq):
    return float(np.sqrt(np.max(mags_sq)))


def _moment_arrays(coeffs, grid):
    """First and second k-derivative arrays for a spectral vector."""
    g1, g2 = [], []
    for c in coeffs:
        phys = to_physical_complex(c, grid)
        g1.append(moment_transform(phys, grid))
        g2.append(moment_transform2(phys, grid))
    return g1, g2


def _grad_mag_sq(g1):
    out = 0.0
    for comp in g1:
        for arr in comp:
            out = out + np.abs(arr) ** 2
    return out


def _hess_mag_sq(g2):
    out = 0.0
    for comp in g2:
        for i, arr in enumerate(comp):
            w = 1.0 if i < 3 else 2.0
            out = out + w * np.abs(arr) ** 2
    return out


def simpson_weights(n_points: int, dt: float) -> np.ndarray:
    """Composite Simpson weights; the trailing interval of an even-point set
    is handled by the 3/8 rule on the last three intervals."""
    if n_points < 3:
        raise NsauditError("Simpson replay needs at least 3 samples")
    w = np.zeros(n_points)
    n_int = n_points - 1
    if n_int % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= dt / 3.0
    else:
        if n_int == 3:
            return np.array([3, 9, 9, 3]) * dt / 8.0
        head = simpson_weights(n_points - 3, dt)
        w[: n_points - 3] += head
        w[n_points - 4:] += np.array([3, 9, 9, 3]) * dt / 8.0
    return w


def duhamel_residual(history: RunHistory, upto: int | None = None,
                     rhs_cache=None) -> float:
    """Replay q~(t_end) from q~0 plus Simpson quadrature of the stored integrand.

    Returns max_k |recomputed - stored| / max_k |stored| over components.
    """
    n = len(history) if upto is None else upto + 1
    if n < 3:
        raise NsauditError("insufficient history cadence (< 3 samples)")
    dt = history.cadence()
    g = history.grid
    t_end = history.states[n - 1].t
    k2 = g.k_squared
    w = simpson_weights(n, dt)
    rec = [np.exp(-history.nu * k2 * (t_end - history.states[0].t)) * c
           for c in history.states[0].coeffs]
    for j in range(n):
        tau = history.states[j].t
        rhs = rhs_cache[j] if rhs_cache is not None else history.rhs(j)
        fac = w[j] * np.exp(-history.nu * k2 * (t_end - tau))
        for i in range(3):
            rec[i] = rec[i] + fac * rhs[i]
    stored = history.states[n - 1].coeffs
    num = max(np.max(np.abs(rec[i] - stored[i])) for i in range(3))
    den = max(np.max(np.abs(c)) for c in stored)
    return float(num / den) if den > 0 else 0.0


def audit_energy(history: RunHistory):
    """Literal Lemma-14 margin series (MONITOR) and the exact balance residual (PASS)."""
    g = history.grid
    E = np.array([s.energy() for s in history.states])
    G = np.array([s.gradient_norm_sq() for s in history.states])
    t = history.times
    diss = np.concatenate([[0.0], np.cumsum(0.5 * (G[1:] + G[:-1]) * np.diff(t))])
    f_l2_qt = _forcing_l2_qt(history)
    margins = (E[0] + f_l2_qt) - (np.maximum.accumulate(E) + diss)
    fq = np.zeros(len(t))
    if not history.forcing.is_zero():
        for i, s in enumerate(history.states):
            f = history.forcing_coeffs(i)
            fp = leray_project(f, g)
            fq[i] = sum(
                float(np.real(np.vdot(fp[c], s.coeffs[c]))) for c in range(3)
            ) / g.length**3
    fq_int = np.concatenate([[0.0], np.cumsum(0.5 * (fq[1:] + fq[:-1]) * np.diff(t))])
    residual = E + 2 * history.nu * diss - E[0] - 2 * fq_int
    return margins, residual, diss


def _forcing_l2_qt(history: RunHistory) -> float:
    """||f||_{L2(Q_T)} over the stored horizon by trapezoid."""
    if history.forcing.is_zero():
        return 0.0
    t = history.times
    sq = np.empty(len(t))
    for i in range(len(t)):
        f = history.forcing_coeffs(i)
        sq[i] = sum(float(np.sum(np.abs(c) ** 2)) for c in f) / history.grid.length**3
    return float(np.sqrt(np.trapezoid(sq, t)))


def audit_pressure(state: FlowState, forcing_coeffs=None):
    """Margins of the pressure estimates (both MONITOR).

    First: 3 ||grad q||^{3/2} ||q||^{1/2} - ||p||_L2.  Second: min over k != 0
    of the four-term pointwise bound on |grad_k p~| minus its value.
    """
    g = state.grid
    p_hat = pressure_from_velocity(state, forcing_coeffs)
    p_l2 = norm_l2(p_hat)
    E = state.energy()
    G = state.gradient_norm_sq()
    margin41 = 3.0 * G**0.75 * E**0.25 - p_l2
    from .flow import velocity_product_tensor

    tensor = velocity_product_tensor(state)
    tensor_mag_sq = 0.0
    grad_tensor_sq = 0.0
    for (i, j), arr in tensor.items():
        w = 1.0 if i == j else 2.0
        tensor_mag_sq = tensor_mag_sq + w * np.abs(arr) ** 2
        phys = to_physical_complex(arr, g)
        for garr in moment_transform(phys, g):
            grad_tensor_sq = grad_tensor_sq + w * np.abs(garr) ** 2
    p_phys = to_physical_complex(p_hat.coeffs, g)
    gradp_sq = 0.0
    for garr in moment_transform(p_phys, g):
        gradp_sq = gradp_sq + np.abs(garr) ** 2
    kmag = np.sqrt(g.k_squared)
    nz = kmag > 0
    rhs = np.sqrt(tensor_mag_sq[nz]) / kmag[nz] + 3.0 * np.sqrt(grad_tensor_sq[nz])
    if forcing_coeffs is not None:
        fmag = np.sqrt(sum(np.abs(c) ** 2 for c in forcing_coeffs))
        gradf_sq = 0.0
        for c in forcing_coeffs:
            for garr in moment_transform(to_physical_complex(c, g), g):
                gradf_sq = gradf_sq + np.abs(garr) ** 2
        rhs = rhs + fmag[nz] / kmag[nz] ** 2 + np.sqrt(gradf_sq)[nz] / kmag[nz]
    margin42 = float(np.min(rhs - np.sqrt(gradp_sq)[nz]))
    return margin41, margin42, p_l2


class Auditor:
    """Single pass over a history producing AuditRecords and the report."""

    def __init__(self, history: RunHistory, constant_C: float = 1.0,
                 lemma18_pairs=None, bound_factor: float = MONITOR_BOUND_FACTOR):
        self.h = history
        self.C = constant_C
        self.bound_factor = bound_factor
        self.pairs = (lemma18_pairs if lemma18_pairs is not None
                      else default_lemma18_pairs(history.grid))

    def run(self) -> list:
        h = self.h
        g = h.grid
        t = h.times
        n = len(h)
        margins36, balance, diss = audit_energy(h)
        records = []
        C0 = C2 = C4 = 0.0
        prev = None
        mom_series = {"eq43": [], "eq44": [], "eq45": [], "eq46": []}
        grad_weighted_acc = [0.0, 0.0]
        kgrad_acc = [0.0, 0.0]
        prev_gw = prev_kg = None
        q0_coeffs = h.states[0].coeffs
        sup0_0 = sup1_0 = sup2_0 = None
        rhs_cache = {}
        for i in range(n):
            state = h.states[i]
            f_coeffs = h.forcing_coeffs(i)
            rhs = h.rhs(i)
            rhs_cache[i] = rhs
            # C-constant integrands: sup_k of |F1|^2 and of its k-derivatives
            f1_sq = sum(np.abs(c) ** 2 for c in rhs)
            g1, g2 = _moment_arrays(rhs, g)
            c0_i = float(np.max(f1_sq))
            c2_i = float(np.max(_grad_mag_sq(g1)))
            c4_i = float(np.max(_hess_mag_sq(g2)))
            if prev is not None:
                dt_i = t[i] - t[i - 1]
                C0 += 0.5 * (prev[0] + c0_i) * dt_i
                C2 += 0.5 * (prev[1] + c2_i) * dt_i
                C4 += 0.5 * (prev[2] + c4_i) * dt_i
            prev = (c0_i, c2_i, c4_i)
            # spectral sups of the velocity
            q_sq = sum(np.abs(c) ** 2 for c in state.coeffs)
            qg1, qg2 = _moment_arrays(state.coeffs, g)
            sup0 = _vector_sup(q_sq)
            grad_sq = _grad_mag_sq(qg1)
            hess_sq = _hess_mag_sq(qg2)
            sup1 = _vector_sup(grad_sq)
            sup2 = _vector_sup(hess_sq)
            if i == 0:
                sup0_0, sup1_0, sup2_0 = sup0, sup1, sup2
            # moment norms (physical route) and their dissipation-type integrals
            phys = state.physical()
            mom2 = sum(weighted_norm(p, 1, warn=False) for p in phys)
            mom4 = sum(weighted_norm(p, 2, warn=False) for p in phys)
            gw = self._grad_weighted(state)
            kg_ = self._k_weighted(qg1, qg2, g)
            if prev_gw is not None:
                dt_i = t[i] - t[i - 1]
                grad_weighted_acc[0] += 0.5 * (prev_gw[0] + gw[0]) * dt_i
                grad_weighted_acc[1] += 0.5 * (prev_gw[1] + gw[1]) * dt_i
                kgrad_acc[0] += 0.5 * (prev_kg[0] + kg_[0]) * dt_i
                kgrad_acc[1] += 0.5 * (prev_kg[1] + kg_[1]) * dt_i
            prev_gw, prev_kg = gw, kg_
            # norm of k-gradients via Parseval (equals moment norms)
            kgrad_l2 = np.sqrt(mom2)
            khess_l2 = np.sqrt(mom4)
            mom_series["eq43"].append(mom2 + grad_weighted_acc[0])
            mom_series["eq44"].append(mom4 + grad_weighted_acc[1])
            mom_series["eq45"].append(kgrad_l2 + kgrad_acc[0])
            mom_series["eq46"].append(khess_l2 + kgrad_acc[1])
            # pressure margins
            margin41, margin42, p_l2 = audit_pressure(state, f_coeffs)
            # spectral-max margins, T/2 times the energy bracket
            Thalf = 0.5 * h.t_horizon
            E_run_max = float(np.max([s.energy() for s in h.states[: i + 1]]))
            margin47 = sup0_0 + Thalf * (E_run_max + diss[i]) - sup0
            self._kgl2_hist = getattr(self, "_kgl2_hist", [])
            self._khl2_hist = getattr(self, "_khl2_hist", [])
            self._kgl2_hist.append(kgrad_l2)
            self._khl2_hist.append(khess_l2)
            margin48 = sup1_0 + Thalf * (max(self._kgl2_hist) + kgrad_acc[0]) - sup1
            margin49 = sup2_0 + Thalf * (max(self._khl2_hist) + kgrad_acc[1]) - sup2
            # Hoelder bound margins
            l18 = lemma18_margins(q0_coeffs, state.coeffs, g, h.nu, C0, self.pairs)
            margin52 = min(m for m, _ in l18) if l18 else 0.0
            rel52 = min((m / r if r > 0 else 0.0) for m, r in l18) if l18 else 0.0
            # Duhamel replay up to this time
            if i >= 2:
                dres = duhamel_residual(h, upto=i, rhs_cache=rhs_cache)
            else:
                dres = 0.0
            qavg = {}
            for kv in ((2 * g.dk, 0.0, 0.0), (0.0, 2 * g.dk, 0.0)):
                qavg[kv] = shell_average(SpectralScalar(g, np.array(state.coeffs[0])),
                                         np.array(kv))
            records.append(AuditRecord(
                t=float(t[i]), energy=float(state.energy()), dissipation=float(diss[i]),
                p_l2=p_l2, mom2=mom2, mom4=mom4, sup0=sup0, sup1=sup1, sup2=sup2,
                C0=C0, C2=C2, C4=C4,
                margin_36=float(margins36[i]), margin_41=margin41, margin_42=margin42,
                margin_47=margin47, margin_48=margin48, margin_49=margin49,
                margin_52_min=margin52, duhamel_residual=dres,
                balance_residual=float(balance[i]),
                extras={"lemma18_rel_min": rel52, "shell_avg": qavg,
                        "mom_series": {k: v[-1] for k, v in mom_series.items()}},
            ))
        self.mom_series = mom_series
        return records

    def _grad_weighted(self, state):
        """integral |x-c|^{2m} |grad q|^2 dx for m = 1, 2."""
        g = state.grid
        kx, ky, kz = g.k_components()
        kvecs = (kx, ky, kz)
        ox, oy, oz = g.centered_offsets()
        r2 = ox**2 + oy**2 + oz**2
        gsq = 0.0
        for c in state.coeffs:
            for j in range(3):
                dphys = to_physical_complex(-1j * kvecs[j] * c, g).real
                gsq = gsq + dphys**2
        vol = g.cell_volume
        return (float(vol * np.sum(r2 * gsq)), float(vol * np.sum(r2**2 * gsq)))

    def _k_weighted(self, qg1, qg2, g):
        """integral |k|^2 |grad_k^m q~|^2 dk / (2 pi)^3 for m = 1, 2."""
        k2 = g.k_squared
        s1 = float(np.sum(k2 * _grad_mag_sq(qg1)) * g.dk**3 / (2 * np.pi) ** 3)
        s2 = float(np.sum(k2 * _hess_mag_sq(qg2)) * g.dk**3 / (2 * np.pi) ** 3)
        return s1, s2


def compute_C(history: RunHistory, constant_C: float = 1.0):
    """(C0, C2, C4) accumulated over the full history (trapezoid)."""
    auditor = Auditor(history, constant_C)
    records = auditor.run()
    last = records[-1]
    return last.C0, last.C2, last.C4


def compute_K(nu: float, C: float, C0: float):
    """A0 = 4 / (nu^{1/3} (C*C0 + 1)^{2/3}), then K per the rescaled contraction.

    Returns (A0, K, passed); a nonpositive denominator reports NOT-CONTRACTIVE
    via K = inf and passed = False rather than raising.
    """
    if not (nu > 0):
        raise NsauditError("viscosity must be positive")
    cc0 = C * C0
    if cc0 < 0:
        raise NsauditError("C * C0 must be nonnegative")
    A0 = 4.0 / (np.cbrt(nu) * np.cbrt((cc0 + 1.0) ** 2))
    denom = np.sqrt(nu) - 4.0 * np.pi * cc0 / A0**1.5
    if denom <= 0:
        return float(A0), float("inf"), False
    K = np.sqrt(nu) / denom
    return float(A0), float(K), bool(K <= 8.0 / 7.0)


def theorem6_scale(history: RunHistory, A0: float, t_index: int = -1):
    """Velocity components scaled by (dissipation integral + A0 + 1).

    Returns a list of three PotentialSample objects ready for the scattering
    pipeline; the denominator is always >= A0 + 1 >= 1.
    """
    from .scatter.born import PotentialSample

    if len(history) == 0:
        raise NsauditError("history is empty")
    G = np.array([s.gradient_norm_sq() for s in history.states])
    t = history.times
    diss_total = float(np.trapezoid(G, t))
    denom = diss_total + A0 + 1.0
    state = history.states[t_index]
    samples = []
    for comp in state.physical():
        samples.append(PotentialSample(
            ScalarField(comp.grid, comp.values / denom)))
    return samples, denom


def projection_audit(q_sample, states) -> dict:
    """Margins of the bound-state projection estimates.

    PASS class: E_j^2 <= ||q psi_j||^2 and max|psi_j| <= 2||q psi_j|| per
    state, plus the exact Parseval split.  MONITOR: the discrete-projection
    sup bound and the continuous-part ratio whose constant the source never
    fixes.  With no bound states the PASS margins hold vacuously.
    """
    g = q_sample.grid
    vol = g.cell_volume
    qv = q_sample.q.values
    out = {"count": states.count}
    if states.count == 0:
        out["eq25_margin"] = 0.0
        out["eq26_margin"] = 0.0
        out["eq27_margin"] = 0.0
        q_l2 = norm_l2(q_sample.q)
        out["eq28_ratio"] = float(np.max(np.abs(qv)) / q_l2) if q_l2 > 0 else 0.0
        out["parseval_defect"] = 0.0
        return out
    m25, m26, psi_max_all = [], [], 0.0
    for j in range(states.count):
        psi = states.states[j]
        qpsi_sq = vol * float(np.sum((qv * psi) ** 2))
        ej_sq = -states.energies[j]
        m25.append(qpsi_sq - ej_sq)
        psi_max = float(np.max(np.abs(psi)))
        psi_max_all = max(psi_max_all, psi_max)
        m26.append(2.0 * np.sqrt(qpsi_sq) - psi_max)
    coeffs = vol * np.einsum("jxyz,xyz->j", states.states, qv)
    pd = np.einsum("j,jxyz->xyz", coeffs, states.states)
    pac = qv - pd
    q_l2 = norm_l2(q_sample.q)
    from .scatter.rollnik import rollnik_norm

    roll = rollnik_norm(q_sample, "direct")
    out["eq25_margin"] = float(min(m25))
    out["eq26_margin"] = float(min(m26))
    out["eq27_margin"] = float(2.0 * q_l2 * roll * psi_max_all - np.max(np.abs(pd)))
    out["eq28_ratio"] = float(np.max(np.abs(pac)) / q_l2) if q_l2 > 0 else 0.0
    pd_sq = vol * float(np.sum(pd**2))
    pac_sq = vol * float(np.sum(pac**2))
    out["parseval_defect"] = float(abs(q_l2**2 - pd_sq - pac_sq) / max(q_l2**2, 1e-300))
    return out


def build_report(history: RunHistory, constant_C: float = 1.0,
                 lemma18_pairs=None, config_echo=None,
                 potential_audits=None, eq59_entries=None,
                 bound_factor: float = MONITOR_BOUND_FACTOR) -> AuditReport:
    """Full audit: records plus the per-inequality verdict table."""
    auditor = Auditor(history, constant_C, lemma18_pairs, bound_factor)
    records = auditor.run()
    last = records[-1]
    A0, K, k_ok = compute_K(history.nu, constant_C, last.C0)
    ineq = {}

    def monitor(key, margin, note=""):
        ineq[key] = {"class": "MONITOR", "margin": float(margin), "ok": None,
                     "note": note}

    def pass_entry(key, margin, ok, note=""):
        ineq[key] = {"class": "PASS", "margin": float(margin), "ok": bool(ok),
                     "note": note}

    E0 = records[0].energy
    balance_max = max(abs(r.balance_residual) for r in records)
    pass_entry("energy_balance", -balance_max,
               balance_max <= 1e-4 * max(E0, 1e-300), "exact discrete balance")
    monitor("eq36", min(r.margin_36 for r in records), "literal Lemma 14 form")
    monitor("eq41", min(r.margin_41 for r in records))
    monitor("eq42", min(r.margin_42 for r in records))
    for key in ("eq43", "eq44", "eq45", "eq46"):
        series = np.array(auditor.mom_series[key])
        f_scale = _forcing_l2_qt(history)
        scale = series[0] + f_scale
        if scale <= 0:
            scale = max(np.max(series), 1e-300)
        monitor(key, bound_factor * scale - float(np.max(series)),
                f"bound factor {bound_factor}")
    monitor("eq47", min(r.margin_47 for r in records))
    monitor("eq48", min(r.margin_48 for r in records))
    monitor("eq49", min(r.margin_49 for r in records))
    rel52 = min(r.extras["lemma18_rel_min"] for r in records)
    pass_entry("eq52", min(r.margin_52_min for r in records), rel52 >= -1e-3,
               "Hoelder bound on the Duhamel form")
    dres = max(r.duhamel_residual for r in records)
    pass_entry("duhamel", -dres, dres <= 1e-4, "Simpson replay residual")
    if potential_audits:
        m25 = min(p["eq25_margin"] for p in potential_audits)
        m26 = min(p["eq26_margin"] for p in potential_audits)
        m27 = min(p["eq27_margin"] for p in potential_audits)
        r28 = max(p["eq28_ratio"] for p in potential_audits)
        pdef = max(p["parseval_defect"] for p in potential_audits)
        vacuous = all(p["count"] == 0 for p in potential_audits)
        pass_entry("eq25", m25, m25 >= 0 or vacuous)
        pass_entry("eq26", m26, m26 >= 0 or vacuous)
        monitor("eq27", m27)
        monitor("eq28", -r28, "ratio max|P_Ac q| / ||q||, constant unspecified")
        pass_entry("parseval_split", -pdef, pdef <= 1e-10)
    else:
        pass_entry("eq25", 0.0, True, "vacuous: no potential audit requested")
        pass_entry("eq26", 0.0, True, "vacuous: no potential audit requested")
        monitor("eq27", 0.0, "no potential audit requested")
        monitor("eq28", 0.0, "no potential audit requested")
        pass_entry("parseval_split", 0.0, True, "vacuous")
    if eq59_entries:
        monitor("eq59", min(eq59_entries), "Rollnik vs (||q|| + sup|q~|)^2")
    else:
        monitor("eq59", 0.0, "no potential audit requested")
    report = AuditReport(
        config_echo=config_echo or {}, records=records, K=K, A0=A0,
        CC0=constant_C * last.C0, inequalities=ineq,
        lemma18_pairs=auditor.pairs)
    return report


def eq59_margin(q_sample, constant_C: float = 1.0) -> float:
    """C (||q||_L2 + max_k |q~|)^2 - Rollnik(q), the Plancherel-route bound."""
    from .core.transforms import to_spectral
    from .scatter.rollnik import rollnik_norm

    q_l2 = norm_l2(q_sample.q)
    sup = float(np.max(np.abs(to_spectral(q_sample.q).coeffs)))
    roll = rollnik_norm(q_sample, "direct")
    return constant_C * (q_l2 + sup) ** 2 - roll

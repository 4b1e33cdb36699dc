"""Command-line surface: simulate, audit, scatter, reconstruct, rollnik, selftest.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure
(blowup, NOT-CONTRACTIVE), 3 selftest assertion failure.  All errors print
human-readable context to stderr.  NS_AUDIT_THREADS, when set, caps the
worker count; the computational modules run single-threaded reductions, so
any positive cap is honored as-is.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ..audit import (
    RunHistory,
    build_report,
    compute_K,
    eq59_margin,
    projection_audit,
    theorem6_scale,
)
from ..core.grid import Grid3, ScalarField
from ..core.transforms import norm_l2, to_spectral
from ..errors import ConfigError, NotContractiveError, NsauditError, NumericalBlowupError
from ..flow import FlowState, FluidParams, ForcingSpec, init_flow, step
from . import report as report_mod
from . import snapshots
from .config import RunConfig, dump_config, load_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


def _forcing_from_config(cfg: RunConfig) -> ForcingSpec:
    kind = cfg["forcing.kind"]
    if kind == "none":
        return ForcingSpec()
    if kind == "taylor-green":
        return ForcingSpec("taylor-green", {
            "amplitude": cfg["forcing.amplitude"],
            "decay": cfg["forcing.decay"],
        })
    raise ConfigError("snapshot-sequence forcing needs the python API "
                      "(a loader callback cannot come from a config file)")


def _init_from_config(cfg: RunConfig, grid: Grid3) -> FlowState:
    kind = cfg["init.kind"]
    snapshot = None
    if kind == "from-snapshot":
        path = cfg["init.snapshot"]
        if not path:
            raise ConfigError("init.kind=from-snapshot needs init.snapshot")
        n, length, t, fields = snapshots.load_snapshot(path)
        if n != grid.n:
            raise ConfigError(
                f"snapshot grid n={n} does not match grid.n={grid.n}")
        snapshot = (t, fields)
    return init_flow(kind, grid, cfg["init.amplitude"], seed=cfg["init.seed"],
                     spectrum_slope=cfg["init.spectrum_slope"], snapshot=snapshot)


def _run_flow(cfg: RunConfig, out_dir: Path | None):
    grid = Grid3(cfg["grid.n"], cfg["grid.length"])
    params = FluidParams(nu=cfg["fluid.nu"], dt=cfg["time.dt"],
                         t_end=cfg["time.t_end"])
    forcing = _forcing_from_config(cfg)
    state = _init_from_config(cfg, grid)
    every = max(1, cfg["time.snapshot_every"])
    history = RunHistory(grid, params.nu, forcing, params.t_end)
    history.append(state)
    n_steps = int(round(params.t_end / params.dt))
    written = []
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "run.cfg").write_text(dump_config(cfg))
        written.append(_write_state(out_dir, 0, state))
    for i in range(1, n_steps + 1):
        state = step(state, params, forcing)
        if i % every == 0 or i == n_steps:
            history.append(state)
            if out_dir is not None:
                written.append(_write_state(out_dir, i, state))
    return history, written


def _write_state(out_dir: Path, index: int, state: FlowState) -> Path:
    fields = [c.values for c in state.physical()]
    path = out_dir / f"state_{index:06d}.nsfs"
    snapshots.save_snapshot(path, state.grid.n, state.grid.length, state.t, fields)
    return path


def _load_history(run_dir: Path):
    cfg = load_config(run_dir / "run.cfg")
    grid = Grid3(cfg["grid.n"], cfg["grid.length"])
    forcing = _forcing_from_config(cfg)
    history = RunHistory(grid, cfg["fluid.nu"], forcing, cfg["time.t_end"])
    paths = sorted(run_dir.glob("state_*.nsfs"))
    if not paths:
        raise NsauditError(f"no snapshots found in {run_dir}")
    for p in paths:
        n, length, t, fields = snapshots.load_snapshot(p)
        history.append(init_flow("from-snapshot", grid, 0.0, snapshot=(t, fields)))
    return cfg, history


def _potential_phase(cfg, history):
    """Theorem-6 scaling of the final state plus the bound-state audits."""
    from ..scatter import (
        birman_schwinger_bound,
        born_series_amplitude,
        bound_states,
        ta_norm,
    )

    C = cfg["audit.constant_C"]
    from ..audit import Auditor

    auditor = Auditor(history, C)
    records = auditor.run()
    C0 = records[-1].C0
    A0, K, k_ok = compute_K(history.nu, C, C0)
    samples, denom = theorem6_scale(history, A0)
    audits, eq59s, summary = [], [], []
    nk, kmax = cfg["scatter.nk"], cfg["scatter.kmax"]
    leb = cfg["scatter.lebedev"]
    from ..core.sphere import SphereGrid

    sphere = SphereGrid.lebedev(leb)
    k_grid = (kmax / nk) * np.arange(1, nk + 1)
    for i, sample in enumerate(samples):
        states = bound_states(sample, n_eig_max=8)
        audits.append(projection_audit(sample, states))
        eq59s.append(eq59_margin(sample, C))
        bs = birman_schwinger_bound(sample)
        table = born_series_amplitude(sample, k_grid, sphere, order=1)
        tn = ta_norm(table)
        summary.append({
            "component": i, "ta_norm": tn, "bs_bound": bs,
            "bound_states": states.count,
            "ok": tn < 1.0 and bs < 1.0 and states.count == 0,
        })
    return records, audits, eq59s, summary, denom


def cmd_simulate(args) -> int:
    cfg = load_config(args.config).require("simulate")
    out = Path(args.out)
    history, _ = _run_flow(cfg, out)
    report = build_report(
        history, constant_C=cfg["audit.constant_C"],
        config_echo=cfg.resolved())
    report_mod.write_report(out / "report.csv", report)
    print(f"simulate: {len(history)} snapshots -> {out}")
    return EXIT_OK


def cmd_audit(args) -> int:
    run_dir = Path(args.run)
    cfg, history = _load_history(run_dir)
    potential_audits = eq59s = None
    summary = []
    if args.potentials:
        _, potential_audits, eq59s, summary, _ = _potential_phase(cfg, history)
    report = build_report(
        history, constant_C=cfg["audit.constant_C"],
        config_echo=cfg.resolved(), potential_audits=potential_audits,
        eq59_entries=eq59s)
    report_mod.write_report(args.report, report)
    for row in summary:
        print("component {component}: ||A||_TA={ta_norm:.4g} "
              "BS={bs_bound:.4g} N={bound_states} ok={ok}".format(**row))
    kval = "NOT-CONTRACTIVE" if not np.isfinite(report.K) else f"{report.K:.6g}"
    print(f"audit: {len(report.records)} records, K={kval}, A0={report.A0:.6g} "
          f"-> {args.report}")
    return EXIT_OK


def cmd_scatter(args) -> int:
    from ..core.sphere import SphereGrid
    from ..scatter import PotentialSample, born_series_amplitude

    cfg = load_config(args.config).require("scatter")
    n, length, t, fields = snapshots.load_snapshot(args.potential)
    grid = Grid3(n, length)
    sample = PotentialSample(ScalarField(grid, fields[0]))
    nk, kmax = cfg["scatter.nk"], cfg["scatter.kmax"]
    sphere = SphereGrid.lebedev(cfg["scatter.lebedev"])
    k_grid = (kmax / nk) * np.arange(1, nk + 1)
    table = born_series_amplitude(sample, k_grid, sphere,
                                  order=cfg["scatter.born_order"])
    table.potential_id = Path(args.potential).name
    snapshots.save_table(args.out, table)
    print(f"scatter: table ({nk} x {sphere.size} x {sphere.size}, "
          f"order {table.born_order}) -> {args.out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from ..scatter import reconstruct_potential

    table = snapshots.load_table(args.table)
    result = reconstruct_potential(table, n_targets=args.targets,
                                   spacing=args.spacing)
    nt = args.targets
    half = (nt - 1) / 2.0 * args.spacing
    snapshots.save_snapshot(args.out, nt, 2 * half + args.spacing, 0.0,
                            [result.primary])
    flagged = int(np.sum(result.flagged))
    print(f"reconstruct: {nt}^3 targets, max|q_rec|={np.max(np.abs(result.primary)):.6g}, "
          f"{flagged} flagged nodes -> {args.out}")
    return EXIT_OK


def cmd_rollnik(args) -> int:
    from ..scatter import PotentialSample, birman_schwinger_bound, rollnik_norm

    n, length, t, fields = snapshots.load_snapshot(args.potential)
    grid = Grid3(n, length)
    sample = PotentialSample(ScalarField(grid, fields[0]))
    if args.method == "both":
        d, s, gap = rollnik_norm(sample, "both")
        print(f"rollnik direct   = {d:.10g}")
        print(f"rollnik spectral = {s:.10g}")
        print(f"relative gap     = {gap:.3e}")
        print(f"ratio direct/spectral = {d / s:.10g}")
    else:
        val = rollnik_norm(sample, args.method)
        print(f"rollnik {args.method} = {val:.10g}")
    print(f"birman-schwinger bound = {birman_schwinger_bound(sample):.10g}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from ..scatter.line import plemelj_selftest

    rng = np.random.default_rng(7)
    failures = []

    def check(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        print(line)
        if not ok:
            failures.append(name)

    try:
        rep = plemelj_selftest()
        worst_id = max(rep["identities"].values())
        worst_jump = max(rep["jump"].values())
        check("plemelj identities <= 1e-8", worst_id <= 1e-8, f"max {worst_id:.2e}")
        check("jump reconstruction <= 1e-7", worst_jump <= 1e-7, f"max {worst_jump:.2e}")
    except AssertionError as exc:
        check("plemelj battery", False, str(exc))
    grid = Grid3(32, 2 * np.pi)
    f = ScalarField(grid, rng.standard_normal((32,) * 3))
    spec = to_spectral(f)
    parseval = abs(norm_l2(f) - norm_l2(spec)) / norm_l2(f)
    check("discrete Parseval <= 1e-12", parseval <= 1e-12, f"{parseval:.2e}")
    from ..core.transforms import to_physical

    back = to_physical(spec)
    rt = np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))
    check("round trip <= 1e-12", rt <= 1e-12, f"{rt:.2e}")
    # Gaussian transform against the closed form
    sigma = grid.length / 16.0
    ox, oy, oz = grid.centered_offsets()
    r2 = ox**2 + oy**2 + oz**2
    gauss = ScalarField(grid, np.exp(-r2 / (2 * sigma**2)))
    ghat = to_spectral(gauss)
    kx, ky, kz = grid.k_components()
    c = grid.center
    phase = np.exp(1j * (kx * c[0] + ky * c[1] + kz * c[2]))
    oracle = (2 * np.pi * sigma**2) ** 1.5 * phase * np.exp(-sigma**2 * grid.k_squared / 2)
    mask = grid.k_squared <= (2.0 / sigma) ** 2
    gerr = np.max(np.abs(ghat.coeffs - oracle)[mask]) / (2 * np.pi * sigma**2) ** 1.5
    check("gaussian transform oracle <= 1e-6", gerr <= 1e-6, f"{gerr:.2e}")
    from ..scatter import blaschke

    check("blaschke arithmetic", abs(blaschke(None, 1.0) - 1.0) < 1e-15)
    a0, k, ok = compute_K(1.0, 1.0, 7.0)
    check("compute_K arithmetic case A0=1", abs(a0 - 1.0) < 1e-12, f"A0={a0!r}")
    if failures:
        print(f"selftest: {len(failures)} failure(s)", file=sys.stderr)
        return EXIT_SELFTEST
    print("selftest: all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nsaudit",
                                description="spectral flow solver and estimate auditor")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="advance a flow, writing snapshots and a report")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)
    a = sub.add_parser("audit", help="recompute margins from a snapshot directory")
    a.add_argument("--run", required=True)
    a.add_argument("--report", required=True)
    a.add_argument("--potentials", action="store_true",
                   help="include the scaled-potential (bound state) audits")
    a.set_defaults(func=cmd_audit)
    sc = sub.add_parser("scatter", help="build an amplitude table from a potential")
    sc.add_argument("--potential", required=True)
    sc.add_argument("--config", required=True)
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_scatter)
    rc = sub.add_parser("reconstruct", help="invert an amplitude table to a potential")
    rc.add_argument("--table", required=True)
    rc.add_argument("--out", required=True)
    rc.add_argument("--targets", type=int, default=9)
    rc.add_argument("--spacing", type=float, default=0.2)
    rc.set_defaults(func=cmd_reconstruct)
    ro = sub.add_parser("rollnik", help="print Rollnik values and the BS bound")
    ro.add_argument("--potential", required=True)
    ro.add_argument("--method", choices=("direct", "spectral", "both"), default="both")
    ro.set_defaults(func=cmd_rollnik)
    st = sub.add_parser("selftest", help="operator identities and oracle checks")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    if os.environ.get("NS_AUDIT_THREADS"):
        # single-threaded reductions already satisfy any positive cap
        pass
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalBlowupError, NotContractiveError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NsauditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: analyze, simulate, particles, diagnose, verify.

Exit codes: 0 success, 1 numeric failure during integration, 2 config error,
3 verification failure.  All outputs are UTF-8; CSV uses '.' decimals, and
identical config + seed reproduce bit-identical files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from . import diagnostics, measures, quantile_solver, particle_solver, verify as verify_mod
from .config import manifest, parse_config, write_manifest
from .convexity import analyze_system, lambda0, lambda0_scalar
from .errors import ConfigError, NumericsError


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _print_json(payload, out=None):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _write_quantile_diag_csv(path, records, n):
    header = (["t", "energy", "dissipation", "E_invariant"]
              + [f"diam_{i + 1}" for i in range(n)]
              + [f"supp_lo_{i + 1}" for i in range(n)]
              + [f"supp_hi_{i + 1}" for i in range(n)]
              + ["w2_to_ground"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [repr(r.t), repr(r.energy), repr(r.dissipation), repr(r.E_invariant)]
            row += [repr(float(v)) for v in r.diam]
            row += [repr(float(v)) for v in r.supp_lo]
            row += [repr(float(v)) for v in r.supp_hi]
            row.append("" if r.w2_to_ground is None else repr(r.w2_to_ground))
            writer.writerow(row)


def _write_particle_diag_csv(path, traj, params):
    d = params.d
    header = ["t", "energy"] + [f"E_invariant_{a + 1}" for a in range(d)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, state, en in zip(traj.times, traj.states, traj.energies):
            center = measures.particle_center_of_mass(state)
            writer.writerow([repr(float(t)), repr(float(en))]
                            + [repr(float(v)) for v in center])


def _diag_path(out: str) -> str:
    return (out[:-4] if out.endswith(".csv") else out) + ".diag.csv"


def _cmd_analyze(args) -> int:
    cfg = parse_config(args.config, dt=args.dt, t_end=args.t_end, seed=args.seed)
    report = analyze_system(cfg.potential, cfg.params)
    _print_json(report, args.out)
    return 0


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config, dt=args.dt, t_end=args.t_end, seed=args.seed)
    if cfg.initial_quantile is None:
        raise ConfigError("initial: quantile simulation requires d=1 data "
                          "(use the particles subcommand)")
    dt = cfg.solver.dt if cfg.solver.dt is not None else quantile_solver.stable_dt(
        cfg.initial_quantile, cfg.potential, cfg.solver.cfl_safety)
    try:
        traj = quantile_solver.run(cfg.initial_quantile, cfg.potential, cfg.solver)
    except NumericsError as err:
        if err.partial is not None:
            measures.write_quantile_csv(args.out, err.partial.times, err.partial.states)
            _write_quantile_diag_csv(_diag_path(args.out), err.partial.records, cfg.params.n)
            write_manifest(args.out, cfg, "simulate", dt)
        print(f"numeric failure: {err} (witness {err.witness})", file=sys.stderr)
        return 1
    measures.write_quantile_csv(args.out, traj.times, traj.states)
    _write_quantile_diag_csv(_diag_path(args.out), traj.records, cfg.params.n)
    write_manifest(args.out, cfg, "simulate", traj.dt)
    return 0


def _cmd_particles(args) -> int:
    cfg = parse_config(args.config, dt=args.dt, t_end=args.t_end, seed=args.seed)
    ps0 = cfg.initial_particles
    if ps0 is None:
        raise ConfigError("initial: no particle representation available")
    dt = cfg.solver.dt if cfg.solver.dt is not None else particle_solver.stable_dt_particles(
        ps0, cfg.potential, cfg.solver.cfl_safety)
    try:
        traj = particle_solver.run_particles(ps0, cfg.potential, cfg.solver)
    except NumericsError as err:
        if err.partial is not None:
            measures.write_particle_csv(args.out, err.partial.times, err.partial.states)
            _write_particle_diag_csv(_diag_path(args.out), err.partial, cfg.params)
            write_manifest(args.out, cfg, "particles", dt)
        print(f"numeric failure: {err} (witness {err.witness})", file=sys.stderr)
        return 1
    measures.write_particle_csv(args.out, traj.times, traj.states)
    _write_particle_diag_csv(_diag_path(args.out), traj, cfg.params)
    write_manifest(args.out, cfg, "particles", dt)
    return 0


def _cmd_diagnose(args) -> int:
    cfg = parse_config(args.config)
    times, states = measures.read_quantile_csv(args.traj, cfg.params)
    if cfg.params.n > 1:
        modulus = lambda0(cfg.potential.kappa, cfg.params).lambda0
    else:
        modulus = lambda0_scalar(float(cfg.potential.kappa[0, 0]), cfg.params)
    ground = diagnostics.ground_state(cfg.params, states[0].M) if modulus > 0.0 else None
    records = [diagnostics.record(qs, cfg.potential, t, ground)
               for t, qs in zip(times, states)]

    fits = []
    t_arr = np.array(times)
    window = (float(t_arr[0] + 0.1 * (t_arr[-1] - t_arr[0])), float(t_arr[-1]))
    s = cfg.potential.kappa @ cfg.params.p
    for i in range(cfg.params.n):
        if s[i] <= 0.0:
            continue
        diam = np.array([r.diam[i] for r in records])
        if np.any(diam[t_arr >= window[0]] <= 0.0):
            continue
        fits.append(diagnostics.fit_decay_rate(
            t_arr, diam, window, predicted_rate=float(cfg.params.m[i] * s[i]),
            quantity=f"diam_supp_{i + 1}"))
    if ground is not None:
        w2 = np.array([r.w2_to_ground for r in records])
        if np.all(w2[t_arr >= window[0]] > 0.0):
            fits.append(diagnostics.fit_decay_rate(
                t_arr, w2, window, predicted_rate=modulus, quantity="w2_to_ground"))

    payload = {"records": records, "rate_fits": fits,
               "manifest": manifest(cfg, "diagnose", dt_used=None)}
    _print_json(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg = parse_config(args.config, dt=args.dt, t_end=args.t_end, seed=args.seed)
    report = verify_mod.run_verification(cfg)
    payload = {"checks": report.checks, "all_passed": report.all_passed,
               "manifest": manifest(cfg, "verify", dt_used=cfg.solver.dt)}
    _print_json(payload, args.out)
    return 0 if report.all_passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiagg",
        description="Multi-species nonlocal interaction dynamics: analysis and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=False):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        if out_required:
            p.add_argument("--out", required=True, help="output CSV path")
        else:
            p.add_argument("--out", default=None, help="optional output path (JSON)")
        p.add_argument("--dt", type=float, default=None, help="override solver dt")
        p.add_argument("--t-end", dest="t_end", type=float, default=None,
                       help="override solver horizon")
        p.add_argument("--seed", type=int, default=None, help="override preset seed")

    p = sub.add_parser("analyze", help="convexity / confinement report as JSON")
    add_common(p)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("simulate", help="integrate the quantile dynamics (d=1)")
    add_common(p, out_required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("particles", help="integrate the atomic dynamics (any d)")
    add_common(p, out_required=True)
    p.set_defaults(fn=_cmd_particles)

    p = sub.add_parser("diagnose", help="recompute diagnostics and rate fits from a trajectory")
    p.add_argument("--traj", required=True, help="trajectory CSV from simulate")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_diagnose)

    p = sub.add_parser("verify", help="run the applicable verification battery")
    add_common(p)
    p.set_defaults(fn=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        for issue in err.issues:
            print(f"config error: {issue}", file=sys.stderr)
        return 2
    except NumericsError as err:
        print(f"numeric failure: {err} (witness {err.witness})", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

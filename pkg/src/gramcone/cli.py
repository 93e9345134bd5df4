"""Command-line entry point: ``gramcone <command> [options]``.

Every command prints a JSON report (schema ``gramcone.report/1``) to stdout
and exits with 0 on success, 2 on parse/validation errors, 3 when the solver
is inconclusive and 4 on internal errors.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import fileio
from .cone import RANK_TOL, in_cone, membership_residual, rank_one_decompose, reconstruct
from .errors import DomainError, Inconclusive, SolverFailure
from .extended import ext_hinf_primal
from .hinf import hinf_primal
from .oracles import freq_grid_hinf, simulate, Signal
from .robust import extract_destabilizing_pair, stability_lmi
from .sdp import OPTIMAL, INFEASIBLE, UNBOUNDED, SolverParams
from .synthesis import synth
from .system import random_system

EXIT_OK, EXIT_PARSE, EXIT_INCONCLUSIVE, EXIT_INTERNAL = 0, 2, 3, 4
ORACLE_ONLY = {"simulate", "grid"}


def version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _params(args):
    return SolverParams(tol=args.tol)


def _model(args):
    return fileio.load_model(args.model, allow_unstable=args.allow_unstable and args.command in ORACLE_ONLY)


def _y_structure(Y):
    d = np.abs(np.diag(Y))
    off = np.abs(Y - np.diag(np.diag(Y))).sum(axis=1)
    return {"diagonally_dominant": bool(np.all(d > off)), "offdiag_to_diag": float(off.sum() / max(d.sum(), 1e-300))}


def cmd_hinf(args):
    sys = _model(args)
    r = hinf_primal(sys, _params(args))
    res = {"status": r.status, "mu_inf": r.mu_inf, "hinf_norm": r.hinf_norm,
           "V_opt": None if r.V_opt is None else r.V_opt.V,
           "dual": {"lambda": r.dual_lambda, "P": r.dual_P, "attained": r.dual_attained,
                    "P_norm_trace": r.P_norm_trace},
           "gap": r.gap, "controllable": r.controllable, "iterations": r.iterations}
    if args.grid:
        g = freq_grid_hinf(sys, args.grid)
        res["grid"] = {"lower_bound": g.lower, "theta": g.argmax_theta, "points": g.grid_points}
    return res, (EXIT_OK if r.optimal else EXIT_INCONCLUSIVE), [args.model]


def cmd_exthinf(args):
    sys = _model(args)
    doc = fileio._load_json(args.spec)
    spec = fileio.disturbance_from_dict(doc, sys.m, where=str(args.spec))
    r = ext_hinf_primal(sys, spec, _params(args))
    res = {"status": r.status, "kind": spec.kind, "value": r.value,
           "V_opt": None if r.V_opt is None else r.V_opt.V,
           "multipliers": r.multipliers, "violation": r.violation, "message": r.message}
    code = EXIT_OK if r.status in (OPTIMAL, UNBOUNDED, INFEASIBLE) else EXIT_INCONCLUSIVE
    return res, code, [args.model, args.spec]


def cmd_stability(args):
    sys = _model(args)
    doc = fileio._load_json(args.uncertainty)
    unc = fileio.uncertainty_from_dict(doc, sys, where=str(args.uncertainty))
    v = stability_lmi(sys, unc, _params(args))
    res = {"status": v.status, "kind": unc.kind, "P": v.P, "Y": v.Y, "lmi_max_eig": v.lmi_max_eig,
           "margin": v.margin, "certificate_value": v.certificate_value,
           "V_cert": None if v.V_cert is None else v.V_cert.V}
    if v.Y is not None:
        res["Y_structure"] = _y_structure(v.Y)
    if v.status == "certificate-found" and args.extract:
        pair = extract_destabilizing_pair(v.V_cert, sys, args.extract, unc)
        prefix = args.out_prefix or str(Path(args.uncertainty).with_suffix(""))
        wp, zp = f"{prefix}_w.csv", f"{prefix}_z.csv"
        fileio.write_signal_csv(pair.w, wp)
        fileio.write_signal_csv(pair.z, zp)
        res["extraction"] = {"eps": args.extract, "w_csv": wp, "z_csv": zp, "f_value": pair.f_value,
                             "f_min_eig": pair.f_min_eig, "eps_f": pair.eps_f,
                             "gramian_error": pair.gramian_error, "energy_z": pair.energy_z,
                             "energy_w": pair.energy_w}
    code = EXIT_INCONCLUSIVE if v.status == "inconclusive" else EXIT_OK
    return res, code, [args.model, args.uncertainty]


def cmd_synth(args):
    sys = _model(args)
    V = fileio.load_gramian(args.gramian, sys.n + sys.m)
    w, rep = synth(V, sys, args.eps)
    fileio.write_signal_csv(w, args.out)
    res = {"csv": args.out, "eps": args.eps, "achieved_error": rep.achieved_error,
           "W_residual": rep.W_residual, "support": rep.support, "windows": rep.windows,
           "gaps": rep.gaps, "thetas": rep.thetas, "component_errors": rep.component_errors,
           "component_bounds": rep.component_bounds, "attempts": rep.attempts,
           "correction_samples": rep.correction_samples}
    return res, EXIT_OK, [args.model, args.gramian]


def cmd_check(args):
    sys = _model(args)
    V = fileio.load_gramian(args.gramian, sys.n + sys.m)
    res_, lo = membership_residual(V, sys)
    member = in_cone(V, sys)
    lam = np.linalg.eigvalsh(0.5 * (V + V.conj().T))
    rank = int(np.sum(lam > RANK_TOL * max(lam[-1], 0.0))) if lam[-1] > 0 else 0
    res = {"in_cone": bool(member), "stationarity_residual": res_, "min_eig": lo, "rank": rank}
    if member:
        comps = rank_one_decompose(V, sys)
        res["components"] = [{"theta": c.theta, "x_s": c.x_s, "w_s": c.w_s, "weight": c.weight}
                             for c in comps]
        res["reconstruction_error"] = float(np.linalg.norm(reconstruct(comps, sys.n, sys.m) - V))
    return res, (EXIT_OK if member else EXIT_PARSE), [args.model, args.gramian]


def cmd_simulate(args):
    sys = _model(args)
    w = fileio.read_signal_csv(args.signal, sys.m)
    traj = simulate(sys, w, extra_settle=args.settle)
    z = Signal(traj.outputs)
    fileio.write_signal_csv(z, args.out)
    res = {"csv": args.out, "samples": len(z), "energy_w": w.energy(), "energy_z": z.energy(),
           "final_state_norm": float(np.linalg.norm(traj.states[-1])) if sys.n else 0.0}
    return res, EXIT_OK, [args.model, args.signal]


def cmd_grid(args):
    sys = _model(args)
    g = freq_grid_hinf(sys, args.grid or 10_000)
    return {"lower_bound": g.lower, "theta": g.argmax_theta, "points": g.grid_points}, EXIT_OK, [args.model]


def cmd_random(args):
    rng = np.random.default_rng(args.seed)
    sys = random_system(rng, args.n, args.m, args.p, rho=args.rho, complex_data=not args.real)
    fileio.save_json(fileio.model_to_dict(sys), args.out)
    return {"model": args.out, "seed": args.seed, "rho": sys.rho}, EXIT_OK, []


COMMANDS = {"hinf": cmd_hinf, "exthinf": cmd_exthinf, "stability": cmd_stability, "synth": cmd_synth,
            "check": cmd_check, "simulate": cmd_simulate, "grid": cmd_grid, "random": cmd_random}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-6, help="solver tolerance")
    common.add_argument("--grid", type=int, default=0, help="frequency-grid points for the oracle bound")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--allow-unstable", action="store_true",
                        help="accept non-Schur A (oracle-only commands)")
    common.add_argument("--report", help="also write the report to this file")
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", dest="pretty", action="store_false", help="compact single-line JSON")
    out.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON (default)")
    common.set_defaults(pretty=True)

    ap = argparse.ArgumentParser(prog="gramcone", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=version())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hinf", parents=[common], help="squared H-infinity norm with dual certificate")
    p.add_argument("model")
    p = sub.add_parser("exthinf", parents=[common], help="worst-case energy under a disturbance spec")
    p.add_argument("model")
    p.add_argument("spec")
    p = sub.add_parser("stability", parents=[common], help="robust stability against structured uncertainty")
    p.add_argument("model")
    p.add_argument("uncertainty")
    p.add_argument("--extract", type=float, default=None, metavar="EPS",
                   help="synthesise a destabilising pair to accuracy EPS")
    p.add_argument("--out-prefix", default=None, help="prefix for the w/z signal CSVs")
    p = sub.add_parser("synth", parents=[common], help="input signal realising a gramian")
    p.add_argument("model")
    p.add_argument("gramian")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True, help="signal CSV path")
    p = sub.add_parser("check", parents=[common], help="cone membership, rank and decomposition")
    p.add_argument("model")
    p.add_argument("gramian")
    p = sub.add_parser("simulate", parents=[common], help="drive the model with a signal CSV")
    p.add_argument("model")
    p.add_argument("signal")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--settle", type=int, default=0, help="extra zero-input steps")
    p = sub.add_parser("grid", parents=[common], help="frequency-grid lower bound on the squared norm")
    p.add_argument("model")
    p = sub.add_parser("random", parents=[common], help="write a random stable model")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--real", action="store_true")
    p.add_argument("--out", required=True)
    return ap


def make_report(argv, command, status, results, inputs, wall):
    return {"schema": fileio.REPORT_SCHEMA, "command": ["gramcone", *argv], "status": status,
            "inputs": {str(p): fileio.digest(p) for p in inputs},
            "results": fileio.to_jsonable(results), "version": version(), "wall_time": wall}


def main(argv=None):
    argv = list(_sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        results, code, inputs = COMMANDS[args.command](args)
    except (DomainError, OSError) as exc:
        results, code, inputs = {"error": str(exc)}, EXIT_PARSE, []
    except (SolverFailure, Inconclusive) as exc:
        results, code, inputs = {"error": str(exc)}, EXIT_INCONCLUSIVE, []
    except Exception as exc:  # noqa: BLE001
        results, code, inputs = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_INTERNAL, []
    status = {EXIT_OK: "ok", EXIT_PARSE: "invalid", EXIT_INCONCLUSIVE: "inconclusive"}.get(code, "error")
    try:
        report = make_report(argv, args.command, status, results, inputs, time.perf_counter() - t0)
    except OSError as exc:
        report = make_report(argv, args.command, "invalid", {"error": str(exc)}, [], 0.0)
        code = EXIT_PARSE
    text = json.dumps(report, indent=2 if args.pretty else None)
    print(text)
    if code != EXIT_OK and "error" in results:
        print(f"gramcone {args.command}: {results['error']}", file=_sys.stderr)
    if args.report:
        Path(args.report).write_text(text + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 non-convergence, 4 certificate failure.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as sio
from .certificate import certify, near_radius, norm_grid
from .kernels import KernelError
from .model import ScenarioError, synthesize, wrap_distance
from .oracle import ORACLE_MAX_N, ORACLE_MAX_P, duality_gap, dual_norm_grid, toeplitz_minimizer_oracle
from .recovery import DecompositionError, chi_norm_grid, localize_support, recover_sources
from .solver import SolverConfig, SolverError, admm_solve

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_CERT = 0, 2, 3, 4

log = logging.getLogger("squintless")


class InputError(Exception):
    pass


def _limit_threads(n):
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _solver_config(args) -> SolverConfig:
    base = {}
    if args.config:
        base = sio.read_json(args.config)
        if not isinstance(base, dict):
            raise InputError("solver config must be a JSON object")
    for key, val in (("rho", args.rho), ("tol", args.tol), ("max_iter", args.max_iter)):
        if val is not None:
            base[key] = val
    return SolverConfig.from_dict(base)


def _out_path(args, default: str) -> Path:
    return Path(args.out) if args.out else Path(default)


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_synth(args) -> int:
    if not args.config:
        raise InputError("synth needs --config SCENARIO.json")
    scen = sio.load_scenario(args.config, seed=args.seed)
    bad = scen.normalization_violations()
    if bad:
        log.warning("sources %s have ||c||_2 > 1 (kept as given)", bad)
    out = _out_path(args, "tensor.json")
    sio.write_tensor(out, synthesize(scen))
    print(out)
    return EXIT_OK


def cmd_solve(args) -> int:
    if not args.input:
        raise InputError("solve needs a tensor file")
    y = sio.read_tensor(args.input)
    cfg = _solver_config(args)
    res = admm_solve(y, cfg)
    report = {
        "converged": res.converged,
        "iterations": res.iterations,
        "residuals": {"primal": res.residuals[0], "dual": res.residuals[1]},
        "objective": res.objective,
        "t_r_first_row": res.t_r.first_row,
        "t_t_first_row": res.t_t.first_row,
        "residual_history": res.history,
        "solver_config": res.config,
        "pairing_method": None,
        "pairs": [],
    }
    try:
        pairing = recover_sources(res.t_r, res.t_t, y)
        report["pairing_method"] = pairing.method + " least-squares bijection search"
        report["pairs"] = [{"omega_r": p.omega_r, "omega_t": p.omega_t,
                            "amplitudes": p.amplitudes} for p in pairing.pairs]
        report["pairing_residual"] = pairing.residual
    except DecompositionError as exc:
        log.warning("angle extraction failed: %s", exc)
        report["recovery_error"] = str(exc)
    if args.truth:
        truth = sio.load_scenario(args.truth, seed=args.seed)
        report["truth_errors"] = [
            min((max(wrap_distance(s.omega_r, p["omega_r"]), wrap_distance(s.omega_t, p["omega_t"]))
                 for p in report["pairs"]), default=None)
            for s in truth.sources]
    out = _out_path(args, "result.json")
    if args.grid:
        g = np.arange(args.grid) / args.grid
        vals = chi_norm_grid(res.dual_q, g, g)
        csv_path = _sidecar(out, "_dual.csv")
        sio.write_heatmap_csv(csv_path, g, g, vals)
        report["heatmap_csv"] = str(csv_path)
        report["peaks"] = localize_support(res.dual_q, max(args.grid, 32))
        if args.plot:
            from .plotting import render_heatmap, render_residuals

            marks = [(p["omega_r"], p["omega_t"]) for p in report["pairs"]]
            report["figures"] = [
                str(render_heatmap(csv_path.with_suffix(".png"), g, g, vals,
                                   "dual polynomial norm", marks)),
                str(render_residuals(_sidecar(out, "_residuals.png"), res.history)),
            ]
    sio.write_json(out, report)
    print(out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_certify(args) -> int:
    if not args.config:
        raise InputError("certify needs --config SCENARIO.json")
    scen = sio.load_scenario(args.config, seed=args.seed)
    grid = args.grid or 256
    report, cert, ver = certify(scen, grid_resolution=grid)
    out = _out_path(args, "certificate.json")
    doc = sio.to_jsonable(report)
    doc["certified"] = report.certified
    hyp = report.theorem2_hypotheses
    if cert is not None and (args.heatmap or args.plot):
        g = np.arange(grid) / grid
        vals = norm_grid(cert, g, g)
        csv_path = _sidecar(out, "_heatmap.csv")
        sio.write_heatmap_csv(csv_path, g, g, vals)
        doc["heatmap_csv"] = str(csv_path)
        if args.plot:
            from .plotting import render_heatmap

            doc["figures"] = [str(render_heatmap(
                csv_path.with_suffix(".png"), g, g, vals, "certificate norm (centred)",
                [tuple(p) for p in cert.support.points]))]
    doc["near_radius"] = near_radius(cert.params) if cert is not None else None
    sio.write_json(out, doc)
    print(out)
    if not hyp["all_ok"]:
        print("hypotheses violated: " + ", ".join(hyp["violated"]), file=sys.stderr)
    if not report.certified:
        failed = [k for k, ok in (("support", report.support_ok),
                                  ("far_grid", report.far_grid_max < 1),
                                  ("near_hessian", report.near_hessian_ok)) if not ok]
        print("certificate checks failed: " + ", ".join(failed), file=sys.stderr)
    return EXIT_OK if (report.certified and hyp["all_ok"]) else EXIT_CERT


def cmd_oracle(args) -> int:
    if not args.config:
        raise InputError("oracle needs --config SCENARIO.json")
    scen = sio.load_scenario(args.config, seed=args.seed)
    y = synthesize(scen)
    cfg = SolverConfig.from_dict({k: v for k, v in (("rho", args.rho), ("tol", args.tol),
                                                     ("max_iter", args.max_iter)) if v is not None})
    res = admm_solve(y, cfg)
    grid = args.grid or 256
    gap = duality_gap(y, scen.sources, res.dual_q, grid)
    doc = {"admm_objective": res.objective, "converged": res.converged,
           "duality": gap, "dual_norm_grid": dual_norm_grid(res.dual_q, grid)}
    if scen.n_rx <= ORACLE_MAX_N and scen.n_tx <= ORACLE_MAX_N and scen.n_freq <= ORACLE_MAX_P:
        _, _, obj = toeplitz_minimizer_oracle(y)
        doc["reference_objective"] = obj
        doc["objective_difference"] = abs(obj - res.objective)
    out = _out_path(args, "oracle.json")
    sio.write_json(out, doc)
    print(out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_version(args) -> int:
    print(f"squintless {__version__}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON (synth/certify/oracle) or solver JSON (solve)")
    common.add_argument("--out", help="output path")
    common.add_argument("--grid", type=int, help="grid resolution per axis")
    common.add_argument("--rho", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--seed", type=int, help="seed for random-phase coefficients")
    common.add_argument("--threads", type=int, help="cap BLAS/LAPACK worker threads")
    common.add_argument("--plot", action="store_true",
                        help="also render PNG figures next to the CSV output (needs matplotlib)")

    parser = argparse.ArgumentParser(prog="squintless", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="synthesize a tensor from a scenario")
    p = sub.add_parser("solve", parents=[common], help="ADMM solve and angle recovery")
    p.add_argument("input", nargs="?", help="tensor file")
    p.add_argument("--truth", help="scenario JSON to compare against")
    p = sub.add_parser("certify", parents=[common], help="build and verify a dual certificate")
    p.add_argument("--heatmap", action="store_true", help="write the certificate norm grid as CSV")
    sub.add_parser("oracle", parents=[common], help="duality bracket and reference SDP")
    sub.add_parser("version", parents=[common], help="print the version")
    return parser


_COMMANDS = {"synth": cmd_synth, "solve": cmd_solve, "certify": cmd_certify,
             "oracle": cmd_oracle, "version": cmd_version}


def main(argv=None) -> int:
    level = os.environ.get("SQUINTLESS_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("grid", "threads", "max_iter"):
        val = getattr(args, name, None)
        if val is not None and val < 1:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        with _limit_threads(args.threads):
            return _COMMANDS[args.command](args)
    except (InputError, ScenarioError, sio.TensorFileError, SolverError, KernelError,
            FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

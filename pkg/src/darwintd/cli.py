"""Command-line front end: run, reference, compare, check, report.

Exit codes: 0 success, 1 validation failure (bad config or arguments),
2 numerical failure (solver breakdown, non-finite values), 3 I/O failure.
"""

import argparse
import os
import sys

import numpy as np

from . import config as cfg
from . import export
from .errors import ConfigurationError, SolverError
from .fields import edge_field_difference, face_field_difference
from .grid import build_curl, build_grid, build_gradient
from .maxwell import solve_reference
from .orchestrator import build_problem, run

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation failures (exit 1, not argparse's 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def _build_parser():
    parser = _Parser(prog="darwintd",
                     description="Two-step quasistatic Darwin field solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="time-domain two-step run")
    p_run.add_argument("--config", required=True, help="scenario YAML file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--scheme", choices=("euler", "trapezoidal"),
                       help="override the time integration scheme")
    p_run.add_argument("--mode", choices=("two-loop", "interleaved"),
                       help="override the loop structure")
    p_run.add_argument("--tol", type=float, help="override the solver tolerance")
    p_run.add_argument("--dump-fields", choices=("none", "summary", "all"),
                       help="override which field snapshots are dumped")
    p_run.add_argument("--vtk", action="store_true",
                       help="also write legacy-VTK files for dumped snapshots")

    p_ref = sub.add_parser("reference", help="full-Maxwell frequency-domain solve")
    p_ref.add_argument("--config", required=True)
    p_ref.add_argument("--out", required=True)
    p_ref.add_argument("--freq", type=float,
                       help="override the excitation frequency in Hz")
    p_ref.add_argument("--at-time", type=float,
                       help="also dump a real snapshot at this time (default 3.125/f)")
    p_ref.add_argument("--tol", type=float, default=1e-10)

    p_cmp = sub.add_parser("compare", help="Darwin run against a reference solve")
    p_cmp.add_argument("run_dir", help="output directory of a 'run' invocation")
    p_cmp.add_argument("ref_dir", help="output directory of a 'reference' invocation")
    p_cmp.add_argument("--at-time", type=float,
                       help="sample time (default: last dumped state)")
    p_cmp.add_argument("--out", help="comparison CSV path (default in run_dir)")

    p_chk = sub.add_parser("check", help="validate a scenario and its invariants")
    p_chk.add_argument("--config", required=True)
    p_chk.add_argument("--tol", type=float, default=1e-10)

    p_rep = sub.add_parser("report", help="render figures for an output directory")
    p_rep.add_argument("out_dir", help="directory holding diagnostics.csv and/or comparison.csv")
    return parser


def _cmd_run(args):
    scenario, dump_fields = cfg.load_scenario(args.config)
    if args.scheme:
        scenario.scheme = args.scheme
    if args.mode:
        scenario.mode = args.mode
    if args.tol is not None:
        scenario.solver_tol = args.tol
    if args.dump_fields:
        dump_fields = args.dump_fields
    scenario.validate()
    history = run(scenario)
    fingerprint = cfg.grid_fingerprint(scenario)
    summary = export.write_run_artifacts(
        args.out, history, fingerprint, dump_fields=dump_fields,
        scenario_doc=cfg.scenario_to_dict(scenario, dump_fields),
        write_vtk=args.vtk,
    )
    for warning in history.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    last = history.diagnostics[-1]
    print(f"run '{scenario.label}': {history.n_states} states, "
          f"dt={scenario.dt:.3e}, scheme={scenario.scheme}, mode={scenario.mode}")
    print(f"final residuals: eqs={last['eqs_residual']:.3e} "
          f"mqs={last['mqs_residual']:.3e} "
          f"solenoidality={last['solenoidality_residual']:.3e} "
          f"divergence={last['divergence_monitor']:.3e}")
    print(f"artifacts in {args.out} ({len(summary['dumped'])} snapshot(s) dumped)")
    return EXIT_OK


def _cmd_reference(args):
    scenario, _ = cfg.load_scenario(args.config)
    if args.freq is not None:
        scenario.frequency = args.freq
    scenario.validate()
    problem = build_problem(scenario)
    omega = 2.0 * np.pi * scenario.frequency
    solution = solve_reference(problem, omega, tol=args.tol)
    fingerprint = cfg.grid_fingerprint(scenario)
    summary = export.write_reference_artifacts(args.out, solution, scenario, fingerprint)
    at_time = args.at_time if args.at_time is not None else 3.125 / scenario.frequency
    from .maxwell import time_sample
    snapshot = time_sample(solution, at_time)
    for name, entity in (("e_total", "edge"), ("e_irr", "edge"),
                         ("e_rem", "edge"), ("b", "face")):
        export.write_field_dump(os.path.join(args.out, f"sample_{name}.bin"),
                                getattr(snapshot, name), entity, fingerprint)
    summary["sample_time"] = at_time
    export.write_json(os.path.join(args.out, "summary.json"), summary)
    print(f"reference '{scenario.label}': f={scenario.frequency:.3e} Hz, "
          f"residual={solution.residual:.3e}, sampled at t={at_time:.6e} s")
    print(f"artifacts in {args.out}")
    return EXIT_OK


def _load_dump(path, fingerprint):
    values, _, fp = export.read_field_dump(path)
    if fp != fingerprint:
        raise ConfigurationError(
            f"{path}: grid fingerprint mismatch ({fp[:12]}... vs {fingerprint[:12]}...)"
        )
    return values


def _cmd_compare(args):
    run_summary = export.read_json(os.path.join(args.run_dir, "summary.json"))
    ref_summary = export.read_json(os.path.join(args.ref_dir, "summary.json"))
    if run_summary.get("kind") != "run" or ref_summary.get("kind") != "reference":
        raise ConfigurationError(
            "compare expects a run directory and a reference directory, in that order"
        )
    if run_summary["fingerprint"] != ref_summary["fingerprint"]:
        raise ConfigurationError(
            "grid fingerprints differ: the run and the reference do not share "
            "a discretization, comparison is meaningless"
        )
    fingerprint = run_summary["fingerprint"]
    dumped = run_summary["dumped"]
    if not dumped:
        raise ConfigurationError(
            "run directory holds no field dumps; rerun with --dump-fields summary|all"
        )
    dt = run_summary["dt"]
    if args.at_time is not None:
        n = int(round(args.at_time / dt))
        if str(n) not in dumped or abs(n * dt - args.at_time) > 1e-9 * dt:
            raise ConfigurationError(
                f"time {args.at_time} is not among the dumped states "
                f"(available indices: {sorted(dumped, key=int)}, dt={dt})"
            )
    else:
        n = max(int(key) for key in dumped)
    t = n * dt
    entry = dumped[str(n)]

    scenario, _ = cfg.load_scenario(os.path.join(args.run_dir, "scenario.yaml"))
    grid = build_grid(scenario.nx, scenario.ny, scenario.nz,
                      scenario.dx, scenario.dy, scenario.dz)

    e_total = _load_dump(os.path.join(args.run_dir, entry["e_total"]), fingerprint)
    e_irr = _load_dump(os.path.join(args.run_dir, entry["e_irr"]), fingerprint)
    b = _load_dump(os.path.join(args.run_dir, entry["b"]), fingerprint)

    rot = np.exp(1j * ref_summary["omega"] * t)
    phasors = ref_summary["phasors"]
    e_hat = _load_dump(os.path.join(args.ref_dir, phasors["e_hat"]), fingerprint)
    e_irr_hat = _load_dump(os.path.join(args.ref_dir, phasors["e_irr_hat"]), fingerprint)
    b_hat = _load_dump(os.path.join(args.ref_dir, phasors["b_hat"]), fingerprint)

    rows = [
        {"quantity": "b", "relative_difference": face_field_difference(grid, b_hat * rot, b)},
        {"quantity": "e_total",
         "relative_difference": edge_field_difference(grid, e_hat * rot, e_total)},
        {"quantity": "e_irr",
         "relative_difference": edge_field_difference(grid, e_irr_hat * rot, e_irr)},
    ]
    out_path = args.out or os.path.join(args.run_dir, "comparison.csv")
    export.write_csv(out_path, ["quantity", "relative_difference"], rows)
    print(f"comparison at t={t:.6e} s (state {n}):")
    for row in rows:
        print(f"  {row['quantity']:<8s} {row['relative_difference']:.6e}")
    print(f"table written to {out_path}")
    return EXIT_OK


def _cmd_check(args):
    scenario, _ = cfg.load_scenario(args.config)
    problem = build_problem(scenario)
    grid = problem.grid
    checks = []

    def record(name, ok, detail):
        checks.append(ok)
        print(f"  [{'ok' if ok else 'FAIL'}] {name}: {detail}")

    print(f"checking '{scenario.label}' ({grid.nx}x{grid.ny}x{grid.nz} nodes)")
    cg = problem.curl @ problem.gradient
    record("curl of gradient vanishes", cg.nnz == 0 or not np.any(cg.data),
           f"nonzeros {cg.nnz}")
    euler = grid.n_nodes - grid.n_edges + grid.n_faces - grid.n_cells
    record("entity counts (Euler characteristic)", euler == 1, f"chi={euler}")
    mats = problem.materials
    record("material matrices positive",
           np.all(mats.m_nu > 0) and np.all(mats.m_eps > 0)
           and np.all(mats.m_kappa_hat > 0) and np.all(mats.m_kappa >= 0),
           "diagonal signs verified")
    ratio = scenario.quasistatic_ratio
    status = "ok" if ratio < 0.01 else "warn"
    print(f"  [{status}] quasistatic regime: domain/wavelength={ratio:.3e}")

    short = cfg.scenario_from_dict(cfg.scenario_to_dict(scenario))[0]
    short.n_end = min(scenario.n_end, 10)
    history = run(short)
    sol = max((c.solenoidality_residual / max(c.scale, 1e-300))
              for c in history.j_totals)
    record("total current solenoidal", sol <= 100 * short.solver_tol,
           f"max relative divergence {sol:.3e}")
    hp = history.problem
    interior = hp.interior_nodes
    div = max(
        float(np.max(np.abs((hp.gradient.T @ (hp.materials.m_kappa_hat * a))[interior])))
        for a in history.a_s
    )
    scale = max(
        float(np.max(np.abs(hp.materials.m_kappa_hat * a))) for a in history.a_s
    )
    record("divergence preservation", div <= 1e-6 * max(scale, 1e-300),
           f"max interior regularized divergence {div:.3e} (scale {scale:.3e})")
    res = max(max(row["eqs_residual"], row["mqs_residual"])
              for row in history.diagnostics)
    record("solver residuals within tolerance", res <= 100 * short.solver_tol,
           f"max residual {res:.3e}")

    if all(checks):
        print("all checks passed")
        return EXIT_OK
    print("checks FAILED", file=sys.stderr)
    return EXIT_NUMERICAL


def _cmd_report(args):
    from .report import render_comparison_report, render_run_report
    written = []
    if os.path.exists(os.path.join(args.out_dir, "diagnostics.csv")):
        written += render_run_report(args.out_dir)
    if os.path.exists(os.path.join(args.out_dir, "comparison.csv")):
        written += render_comparison_report(args.out_dir)
    if not written:
        raise ConfigurationError(
            f"{args.out_dir} holds neither diagnostics.csv nor comparison.csv"
        )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "reference": _cmd_reference,
    "compare": _cmd_compare,
    "check": _cmd_check,
    "report": _cmd_report,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands:

* ``simulate``    one run, snapshot metrics to CSV
* ``constants``   limit-constant table (kind, m, delta, value, bracket width)
* ``verify``      exact identity suites: martingale / stirling / steplaw /
                  coupling (exit code 3 on any failure)
* ``experiment``  Monte Carlo trials + statistics + JSON report

Exit codes: 0 ok, 2 configuration error, 3 verification or acceptance
failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import analytics, coupling, exact, harness
from .process import LoopsVariant, Model, ProcessConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3


def _parse_m_list(raw: str) -> list[int]:
    try:
        return [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise harness.ConfigError("m", f"cannot parse m list: {raw!r}")


def _parse_delta_list(raw: str) -> list[Fraction]:
    return [harness.parse_delta(tok) for tok in raw.split(",") if tok.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attachsim",
        description="Simulation, analytics, and exact verification for "
                    "preferential/uniform attachment graph processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="one run, snapshots to CSV")
    sim.add_argument("--model", choices=["pam", "uam"], required=True)
    sim.add_argument("--m", type=int, required=True)
    sim.add_argument("--delta", default="0", help='rational "p/q" or decimal')
    sim.add_argument("--loops-variant", default="allowed",
                     choices=[v.value for v in LoopsVariant])
    sim.add_argument("--t-max", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--observer", default="descendants",
                     choices=list(harness.OBSERVERS))
    sim.add_argument("--root", type=int, default=1)
    sim.add_argument("--schedule", default="geometric",
                     help='"geometric" or comma-separated times')
    sim.add_argument("--out", default="-", help="CSV path (default stdout)")

    con = sub.add_parser("constants", help="limit-constant table as CSV")
    con.add_argument("--kind", default="all",
                     choices=["all", "pam-matching", "uam-matching",
                              "independent"])
    con.add_argument("--m", default="1,2,5,10,20,35,70",
                     help="comma-separated m values")
    con.add_argument("--delta", default="0",
                     help="comma-separated rationals (pam-matching only)")
    con.add_argument("--tol", type=float, default=analytics.DEFAULT_TOL)

    ver = sub.add_parser("verify", help="exact identity suites")
    vsub = ver.add_subparsers(dest="suite", required=True)
    vm = vsub.add_parser("martingale")
    vm.add_argument("--t-max", type=int, default=30)
    vm.add_argument("--ell-max", type=int, default=6)
    vm.add_argument("--deltas", default="-1/2,0,1,7/3")
    vs = vsub.add_parser("stirling")
    vs.add_argument("--ell-max", type=int, default=10)
    vl = vsub.add_parser("steplaw")
    vl.add_argument("--t-max", type=int, default=6)
    vl.add_argument("--m-max", type=int, default=3)
    vl.add_argument("--deltas", default="-1/2,0,1,7/3")
    vc = vsub.add_parser("coupling")
    vc.add_argument("--m", type=int, default=2)
    vc.add_argument("--delta", default="0")
    vc.add_argument("--t", type=int, default=500)
    vc.add_argument("--trials", type=int, default=100)
    vc.add_argument("--seed", type=int, required=True)
    vc.add_argument("--prefix-t", type=int, default=4,
                    help="coarse length of exact transition-check prefixes")
    vc.add_argument("--prefixes", type=int, default=20)
    vc.add_argument("--root", type=int, default=2)

    exp = sub.add_parser("experiment", help="Monte Carlo trials + report")
    exp.add_argument("--config", help="JSON config path")
    exp.add_argument("--model", choices=["pam", "uam"])
    exp.add_argument("--m", type=int)
    exp.add_argument("--delta", default=None)
    exp.add_argument("--loops-variant", default=None,
                     choices=[v.value for v in LoopsVariant])
    exp.add_argument("--t-max", type=int)
    exp.add_argument("--seed", type=int)
    exp.add_argument("--trials", type=int)
    exp.add_argument("--observer", choices=list(harness.OBSERVERS))
    exp.add_argument("--root", type=int)
    exp.add_argument("--law", choices=list(harness.LAWS))
    exp.add_argument("--tolerance", type=float)
    exp.add_argument("--workers", type=int)
    exp.add_argument("--out", default=None, help="report JSON path")
    return parser


def _cmd_simulate(args) -> int:
    delta = harness.parse_delta(args.delta)
    config = ProcessConfig(Model(args.model), args.m, delta,
                           LoopsVariant(args.loops_variant), args.t_max)
    if args.schedule == "geometric":
        schedule: tuple[int, ...] = ()
    else:
        schedule = tuple(sorted({int(tok) for tok in args.schedule.split(",")}))
    spec = harness.ExperimentSpec(
        config=config, observer=args.observer, root=args.root,
        t_max=args.t_max, schedule=schedule, master_seed=args.seed)
    series = harness.run_single(spec, args.seed)
    if args.out == "-":
        sys.stdout.write("t,metric,value\n")
        for t, metric, value in series.rows:
            sys.stdout.write(f"{t},{metric},{value!r}\n")
    else:
        harness.emit_csv(series, args.out)
    return EXIT_OK


def _cmd_constants(args) -> int:
    ms = _parse_m_list(args.m)
    deltas = _parse_delta_list(args.delta)
    rows = []
    if args.kind in ("all", "pam-matching"):
        for delta in deltas:
            for m in ms:
                c = analytics.rho_pam_matching(m, delta, args.tol)
                rows.append(("pam_matching_rho", m, delta, c))
    if args.kind in ("all", "uam-matching"):
        for m in ms:
            rows.append(("uam_matching_r", m, Fraction(0),
                         analytics.r_uam_matching(m, args.tol)))
    if args.kind in ("all", "independent"):
        for m in ms:
            rows.append(("independent_w", m, Fraction(0),
                         analytics.w_independent(m, args.tol)))
    sys.stdout.write("kind,m,delta,value,bracket_width\n")
    for kind, m, delta, c in rows:
        sys.stdout.write(
            f"{kind},{m},{delta},{c.value:.15g},{c.bracket_width:.3g}\n")
    return EXIT_OK


def _report_failures(name: str, failures: list[str]) -> int:
    if failures:
        sys.stderr.write(f"{name}: {len(failures)} failure(s)\n")
        for line in failures[:50]:
            sys.stderr.write(f"  {line}\n")
        return EXIT_FAILURE
    sys.stdout.write(f"{name}: all checks passed\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.suite == "martingale":
        failures = exact.martingale_suite(
            args.t_max, args.ell_max,
            [harness.parse_delta(tok) for tok in args.deltas.split(",")])
        return _report_failures("martingale", failures)
    if args.suite == "stirling":
        return _report_failures("stirling", exact.stirling_suite(args.ell_max))
    if args.suite == "steplaw":
        failures = exact.steplaw_suite(
            args.t_max, args.m_max,
            [harness.parse_delta(tok) for tok in args.deltas.split(",")])
        return _report_failures("steplaw", failures)
    if args.suite == "coupling":
        delta = harness.parse_delta(args.delta)
        failures = coupling.transition_equivalence_suite(
            args.m, delta, args.prefix_t, args.prefixes, args.seed)
        failures += coupling.descendant_coupling_suite(
            args.m, delta, args.t, args.root, args.trials, args.seed)
        return _report_failures("coupling", failures)
    raise AssertionError(f"unreachable suite {args.suite}")


def _cmd_experiment(args) -> int:
    if args.config:
        spec = harness.parse_config(args.config)
        # command-line overrides on top of the file
        overrides = {}
        for key in ("seed", "trials", "tolerance", "workers"):
            val = getattr(args, key, None)
            if val is not None:
                overrides[key] = val
        if overrides:
            data = harness.spec_to_config_dict(spec)
            data.update(overrides)
            spec = harness.parse_config(data)
    else:
        required = {"model": args.model, "m": args.m, "t_max": args.t_max,
                    "seed": args.seed}
        missing = [k for k, v in required.items() if v is None]
        if missing:
            raise harness.ConfigError(
                ",".join(missing), "required without --config")
        data = {"model": args.model, "m": args.m, "t_max": args.t_max,
                "seed": args.seed}
        if args.delta is not None:
            data["delta"] = args.delta
        if args.loops_variant is not None:
            data["loops_variant"] = args.loops_variant
        for key in ("trials", "observer", "root", "law", "tolerance",
                    "workers"):
            val = getattr(args, key)
            if val is not None:
                data[key] = val
        spec = harness.parse_config(data)
    report = harness.run_experiment(spec)
    out = args.out or spec.report_path
    if out:
        harness.emit_report(report, out)
    else:
        sys.stdout.write(report.to_json())
        sys.stdout.write("\n")
    if spec.law != "none" and not report.passed:
        sys.stderr.write(f"experiment verdicts failed: {report.verdicts}\n")
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "constants":
            return _cmd_constants(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
    except harness.ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except ValueError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    raise AssertionError(f"unreachable command {args.command}")


if __name__ == "__main__":
    sys.exit(main())

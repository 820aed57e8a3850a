"""Command-line front end: design, simulate, sweep, bifurcate, verify.

Data goes to files (and the primary JSON document to stdout); everything
meant for humans goes to stderr.  Exit codes: 0 success, 1 usage error,
2 scenario/validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import analysis
from .errors import BpdgError, FuelDepleted, ParseError, ValidationError
from .scenario import (
    AXIS_LABELS,
    Scenario,
    design_summary,
    read_scenario,
)
from .simulator import TERMINATED_FUEL, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCENARIO = 2
EXIT_RUNTIME = 3

OUTPUT_DIR_ENV = "BPDG_OUTPUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here is exit code 1
    def error(self, message):
        raise _UsageError(message)


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _write_json(document: dict, path: Path) -> None:
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def _load(args) -> Scenario:
    scenario = read_scenario(args.scenario)
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "t_max", None) is not None:
        overrides["t_max"] = args.t_max
    if getattr(args, "fuel_model", None) is not None:
        overrides["fuel_model"] = args.fuel_model
    if getattr(args, "log_stride", None) is not None:
        overrides["log_stride"] = args.log_stride
    if overrides:
        scenario = dataclasses.replace(
            scenario, options=dataclasses.replace(scenario.options, **overrides)
        )
    if getattr(args, "epsilon", None) is not None:
        axes = tuple(
            dataclasses.replace(axis, epsilon=args.epsilon) for axis in scenario.axes
        )
        scenario = dataclasses.replace(scenario, axes=axes)
    return scenario


def _outdir(args) -> Path:
    path = Path(args.output or os.environ.get(OUTPUT_DIR_ENV, "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_design(args) -> int:
    scenario = _load(args)
    summary = design_summary(scenario)
    outdir = _outdir(args)
    path = outdir / f"{scenario.name}_design.json"
    _write_json(summary, path)
    print(json.dumps(summary, indent=2))
    _info(f"design summary written to {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _load(args)
    result, log = run(scenario)
    outdir = _outdir(args)
    csv_path = outdir / f"{scenario.name}_trajectory.csv"
    log.write_csv(csv_path)
    document = {"scenario": scenario.name, "result": result.to_dict()}
    json_path = outdir / f"{scenario.name}_result.json"
    _write_json(document, json_path)
    print(json.dumps(document, indent=2))
    _info(f"trajectory written to {csv_path}")
    _info(f"result written to {json_path}")
    if not args.no_plots:
        from . import plots

        for path in plots.render_simulation_figures(log, scenario, outdir, scenario.name):
            _info(f"figure written to {path}")
    errs = ", ".join(f"{lbl}={e:.4g} m" for lbl, e in zip(AXIS_LABELS, result.final_error))
    _info(
        f"terminated by {result.terminated_by}; final errors {errs}; "
        f"fuel used {result.fuel_used:.3f} kg"
    )
    if result.terminated_by == TERMINATED_FUEL and args.strict:
        _info("error: fuel depleted before termination (--strict)")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenarios = []
    for path in args.scenarios:
        base_args = argparse.Namespace(**{**vars(args), "scenario": path})
        scenarios.append(_load(base_args))
    report = analysis.sweep(scenarios, workers=args.workers)
    outdir = _outdir(args)
    csv_path = outdir / "sweep.csv"
    report.write_csv(csv_path)
    document = report.to_dict()
    json_path = outdir / "sweep_report.json"
    _write_json(document, json_path)
    print(json.dumps(document, indent=2))
    _info(f"sweep table written to {csv_path}")
    _info(f"sweep report written to {json_path}")
    if not args.no_plots:
        from . import plots

        for path in plots.render_sweep_figures(report, scenarios, outdir):
            _info(f"figure written to {path}")
    failed = [case for case in report.cases if case.error is not None]
    if failed:
        for case in failed:
            _info(f"case {case.index} ({case.name}) failed: {case.error}")
        if args.strict:
            return EXIT_RUNTIME
    return EXIT_OK


def cmd_bifurcate(args) -> int:
    a_lo, a_hi = args.a_range
    stable, unstable = analysis.bifurcation_sweep(
        (a_lo, a_hi), n=args.n, b=args.b, c=args.c
    )
    outdir = _outdir(args)
    stable_path = outdir / "bifurcation_stable.csv"
    unstable_path = outdir / "bifurcation_unstable.csv"
    analysis.write_branch_csv(stable, stable_path)
    analysis.write_branch_csv(unstable, unstable_path)
    _info(f"stable branch written to {stable_path} ({len(stable.samples)} samples)")
    _info(f"unstable branch written to {unstable_path} ({len(unstable.samples)} samples)")
    if not args.no_plots:
        from . import plots

        figure = plots.render_bifurcation_figure(
            stable, unstable, outdir / "bifurcation.png"
        )
        _info(f"figure written to {figure}")
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _load(args)
    report = analysis.verify_closed_form(scenario)
    outdir = _outdir(args)
    json_path = outdir / f"{scenario.name}_verify.json"
    document = report.to_dict()
    _write_json(document, json_path)
    print(json.dumps(document, indent=2))
    for check in report.checks:
        flag = "PASS" if check.passed else "FAIL"
        _info(f"{flag} {check.name}: value={check.value:.3e} tolerance={check.tolerance:.3e}")
    _info(f"verify report written to {json_path}")
    if not report.passed and args.strict:
        return EXIT_RUNTIME
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, scenario_arg: str = "scenario") -> None:
    if scenario_arg == "scenario":
        parser.add_argument("scenario", help="scenario config file")
    else:
        parser.add_argument("scenarios", nargs="+", help="scenario config files")
    parser.add_argument("-o", "--output", default=None,
                        help=f"output directory (default: ${OUTPUT_DIR_ENV} or '.')")
    parser.add_argument("--dt", type=float, default=None, help="integrator step [s]")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="settling tolerance for all axes [m]")
    parser.add_argument("--t-max", dest="t_max", type=float, default=None,
                        help="hard time cap [s]")
    parser.add_argument("--fuel-model", dest="fuel_model", default=None,
                        choices=["gravity_compensated", "command_only"],
                        help="thrust accounting convention")
    parser.add_argument("--log-stride", dest="log_stride", type=int, default=None,
                        help="steps between trajectory records")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    parser.add_argument("--strict", action="store_true",
                        help="nonzero exit on runtime failures (fuel depletion, failed checks)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bpdg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="design axis parameters and write the summary")
    _add_common(p)
    p.set_defaults(handler=cmd_design)

    p = sub.add_parser("simulate", help="fly a scenario and export trajectory + result")
    _add_common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", help="design and fly a batch of scenarios")
    _add_common(p, scenario_arg="scenarios")
    p.add_argument("--workers", type=int, default=1, help="concurrent case runners")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("bifurcate", help="sample the equilibrium branches over a")
    p.add_argument("--a-range", dest="a_range", type=float, nargs=2, required=True,
                   metavar=("MIN", "MAX"), help="parameter interval for a")
    p.add_argument("--b", type=float, required=True, help="parameter b [1/(m s)]")
    p.add_argument("--c", type=float, default=0.0, help="parameter c [m/s]")
    p.add_argument("--n", type=int, default=1001, help="grid size")
    p.add_argument("-o", "--output", default=None,
                   help=f"output directory (default: ${OUTPUT_DIR_ENV} or '.')")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p.set_defaults(handler=cmd_bifurcate)

    p = sub.add_parser("verify", help="check every closed-form prediction against the simulator")
    _add_common(p)
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _info(f"usage error: {exc}")
        return EXIT_USAGE
    try:
        return args.handler(args)
    except (ParseError, ValidationError) as exc:
        _info(f"scenario error: {exc}")
        return EXIT_SCENARIO
    except FuelDepleted as exc:
        _info(f"runtime error: {exc}")
        return EXIT_RUNTIME
    except OSError as exc:
        _info(f"scenario error: {exc}")
        return EXIT_SCENARIO
    except BpdgError as exc:
        _info(f"scenario error: {exc}")
        return EXIT_SCENARIO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

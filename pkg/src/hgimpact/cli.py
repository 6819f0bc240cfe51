"""Command-line interface.

Exit codes: 0 success, 1 validation failure (bad bundle, bad arguments),
2 runtime error.  The output root for runs comes from --out or the
HGIMPACT_OUT environment variable, defaulting to ./runs.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .demo import write_demo_bundle
from .errors import PipelineError
from .ingest import BundleValidationError, ingest, read_transport_params
from .report import FORMATS, report
from .scenario import load_record, parse_scenario_file, run, save_record
from .transport import build_srm, save_srm

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting with code 2."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="hgimpact",
        description=(
            "Desk-scale mercury retrofit simulator: plant-level emission deltas "
            "through transport, dietary exposure, and health attribution."
        ),
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("demo", help="materialize the synthetic demonstration dataset")
    p.add_argument("--out", default="demo", help="output directory (default: ./demo)")
    p.add_argument("--seed", type=int, default=42, help="seed for demo data generation only")

    p = sub.add_parser("validate", help="validate a bundle directory")
    p.add_argument("bundle", help="bundle directory")

    p = sub.add_parser("srm", help="build and save a source-receptor matrix")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("params", help="transport parameter file (usually the bundle's transport.cfg)")
    p.add_argument("--out", default="srm.txt", help="output triplet file")

    p = sub.add_parser("run", help="run a scenario over a bundle")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("scenario", help="scenario file")
    p.add_argument("--out", default=None, help="run output root (default: $HGIMPACT_OUT or ./runs)")

    p = sub.add_parser("attribute", help="print attribution rankings for a finished run")
    p.add_argument("run_dir", help="run record directory")

    p = sub.add_parser("report", help="write report files for a finished run")
    p.add_argument("run_dir", help="run record directory")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", default=None, help="report directory (default: <run>/report)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _cmd_demo(args) -> int:
    bundle = write_demo_bundle(args.out, seed=args.seed)
    print(f"bundle: {bundle}")
    print(f"scenarios: {Path(args.out) / 'scenarios'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        ingest(args.bundle)
    except BundleValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        print(f"{len(exc.violations)} violation(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print("bundle valid")
    return EXIT_OK


def _cmd_srm(args) -> int:
    bundle = ingest(args.bundle)
    params = read_transport_params(
        args.params, bundle.transport.wind_u, bundle.transport.wind_v
    )
    grid = bundle.grid
    sources = sorted(
        {
            grid.flat(*grid.cell_of(p.lat, p.lon))
            for p in bundle.plants.values()
        }
    )
    srm = build_srm(params, grid, sources)
    save_srm(srm, args.out)
    print(f"srm: {args.out} ({len(sources)} sources)")
    return EXIT_OK


def _out_root(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("HGIMPACT_OUT", "runs"))


def _cmd_run(args) -> int:
    bundle = ingest(args.bundle)
    scenario = parse_scenario_file(args.scenario)
    record = run(scenario, bundle)
    out = save_record(record, _out_root(args.out))
    print(f"run: {out}")
    print(
        f"national: {record.outcome.national_iq_per_foetus:.6g} IQ points/foetus, "
        f"{record.outcome.total_deaths:.6g} avoided deaths/horizon"
    )
    return EXIT_OK


def _cmd_attribute(args) -> int:
    record = load_record(args.run_dir)
    print(f"attribution for run {record.run_id} (mode: {record.attribution.mode})")
    print("top cross-border receivers (avoided deaths received):")
    for prov, val in record.ranking.top_receivers:
        print(f"  {prov:<12} {val:.6g}")
    print("top cross-border exporters (avoided deaths delivered):")
    for prov, val in record.ranking.top_exporters:
        print(f"  {prov:<12} {val:.6g}")
    print("measure shares (deaths, iq):")
    for measure, (d_share, iq_share) in sorted(record.ranking.measure_shares.items()):
        print(f"  {measure:<8} {d_share:.4f} {iq_share:.4f}")
    if record.attribution.mode == "log-linear":
        worst = max(
            (abs(v) for v in record.attribution.deaths_residual.values()), default=0.0
        )
        print(f"log-linear closure residual (max abs over receptors): {worst:.6g} deaths")
    return EXIT_OK


def _cmd_report(args) -> int:
    record = load_record(args.run_dir)
    out = Path(args.out) if args.out else Path(args.run_dir) / "report"
    files = report(record, args.format, out, figures=not args.no_figures)
    for f in files:
        print(f)
    return EXIT_OK


_COMMANDS = {
    "demo": _cmd_demo,
    "validate": _cmd_validate,
    "srm": _cmd_srm,
    "run": _cmd_run,
    "attribute": _cmd_attribute,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args)
    except BundleValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        print(f"{len(exc.violations)} violation(s)", file=sys.stderr)
        return EXIT_VALIDATION
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()

"""Command line entry point: ``python -m src.cli {analyze,verify,catalog}``."""

import argparse
import asyncio
import sys
from typing import Any, Dict, List, Optional

from src.app.config.settings import settings
from src.app.models.domain.limit_models import RadiusSchedule
from src.app.services.report_service import FORMATS
from src.app.usecases.analyze_usecases.analyze_helper import AnalyzeHelper
from src.app.usecases.analyze_usecases.analyze_usecase import AnalyzeUseCase
from src.app.usecases.catalog_usecases.catalog_usecase import CatalogUseCase
from src.app.usecases.verify_usecases.verify_helper import VerifyHelper
from src.app.usecases.verify_usecases.verify_usecase import VerifyUseCase
from src.app.utils.error_handler import (
    EXIT_EXPECTATION_MISMATCH,
    EXIT_OK,
    EXIT_PROPERTY_FAILURE,
    SpecSchemaError,
    exit_code_for,
)
from src.app.utils.logging_util import loggers


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {e}")


def _schedule(text: str) -> RadiusSchedule:
    try:
        return RadiusSchedule.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slope-lab",
        description="Slopes, error bounds and metric subregularity at desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=FORMATS, default="json")
    output.add_argument(
        "--output-dir",
        default=None,
        help=f"write report files here (e.g. {settings.REPORT_OUTPUT_DIR})",
    )

    analyze = sub.add_parser("analyze", parents=[output], help="analyze one spec")
    analyze.add_argument("spec", help="spec file path or catalog:<name>")
    analyze.add_argument("--at", type=_floats, help="query point, e.g. 0.5 or 1,0")
    analyze.add_argument("--schedule", type=_schedule, help="rho0,gamma,steps")
    analyze.add_argument("--tol", type=float)
    analyze.add_argument("--gamma", type=float, help="criteria threshold")
    analyze.add_argument(
        "--expect",
        choices=("certified", "not_certified"),
        help="exit 1 when the criteria verdict differs",
    )

    verify = sub.add_parser("verify", parents=[output], help="run the property suite")
    verify.add_argument("--filter", default=None, help="substring of check names")
    verify.add_argument("--seed", type=int, default=settings.VERIFY_SEED)

    catalog = sub.add_parser("catalog", help="list shipped fixtures")
    catalog.add_argument("--filter", default=None, help="substring of fixture names")
    catalog.add_argument("--format", choices=("json", "table"), default="json")
    return parser


def _analyze(args: argparse.Namespace, helper: AnalyzeHelper) -> int:
    payload = asyncio.run(
        AnalyzeUseCase(helper).execute(
            {
                "spec_path": args.spec,
                "at": args.at,
                "schedule": args.schedule,
                "tol": args.tol,
                "gamma": args.gamma,
                "output_dir": args.output_dir,
                "format": args.format,
            }
        )
    )
    _emit(helper, payload, args.format)
    report = payload["report"]
    if any(not c["passed"] for c in report["truth_checks"]):
        return EXIT_PROPERTY_FAILURE
    if args.expect is not None:
        certified = report["verdict"]["certified"] is True
        if certified != (args.expect == "certified"):
            loggers["main"].info(
                f"{args.spec}: verdict {report['verdict']} does not match "
                f"--expect {args.expect}"
            )
            return EXIT_EXPECTATION_MISMATCH
    return EXIT_OK


def _verify(args: argparse.Namespace, helper: AnalyzeHelper) -> int:
    payload = asyncio.run(
        VerifyUseCase(VerifyHelper(helper)).execute(
            {
                "filter": args.filter,
                "seed": args.seed,
                "output_dir": args.output_dir,
                "format": args.format,
            }
        )
    )
    _emit(helper, payload, args.format)
    return EXIT_OK if payload["report"]["passed"] else EXIT_PROPERTY_FAILURE


def _catalog(args: argparse.Namespace, helper: AnalyzeHelper) -> int:
    payload = asyncio.run(CatalogUseCase(helper).execute(args.filter))
    if args.format == "json":
        _emit(helper, payload, "json")
    else:
        for entry in payload["report"]["fixtures"]:
            truths = ", ".join(f"{k}={v}" for k, v in sorted(entry["truths"].items()))
            print(f"{entry['name']:<40} {entry['kind']:<18} {truths}")
    return EXIT_OK


def _emit(helper: AnalyzeHelper, payload: Dict[str, Any], fmt: str) -> None:
    print(helper.report_service.render(payload, fmt))


COMMANDS = {"analyze": _analyze, "verify": _verify, "catalog": _catalog}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args, AnalyzeHelper())
    except SpecSchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        loggers["main"].exception(f"{args.command} failed")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    raise SystemExit(main())

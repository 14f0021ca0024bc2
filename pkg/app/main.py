"""
Command-line entry point for the Tropical EP Analyzer.

Usage:
    python -m app.main analyze --config configs/two_site_ep2.json
    python -m app.main verify --model ssh_chain --params '{"n_sites": 5, "t2_back": 0}'
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, TextIO

from pydantic import ValidationError

from app.analyzer import CommandResult, ExceptionalPointAnalyzer, ModelSpec, RunConfig, load_run_config
from app.config import settings
from app.errors import InputError, NumericalError
from app.services.numerics import DecadeRange, LoopOptions
from app.tools.newton_amoeba import GridSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

COMMANDS = ("analyze", "newton", "amoeba", "spine", "verify", "holonomy", "scan")


def _run(analyzer: ExceptionalPointAnalyzer, command: str, svg: bool) -> CommandResult:
    handlers: Dict[str, Callable[[], CommandResult]] = {
        "analyze": analyzer.analyze,
        "newton": analyzer.newton,
        "amoeba": lambda: analyzer.amoeba(svg=svg),
        "spine": lambda: analyzer.spine(svg=svg),
        "verify": analyzer.verify,
        "holonomy": analyzer.holonomy,
        "scan": analyzer.scan,
    }
    return handlers[command]()


def _error(message: str, status: int, stream: Optional[TextIO] = None) -> int:
    print(f"error: {message}", file=stream or sys.stderr)
    return status


def execute(
    command: str,
    config: RunConfig,
    *,
    svg: bool = False,
    zero_tol: Optional[float] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """
    Run one command against a validated configuration.

    Args:
        command: One of COMMANDS
        config: Run configuration
        svg: Also render amoeba.svg for amoeba/spine
        zero_tol: Display threshold for numeric values
        stdout: Stream for the report lines (defaults to sys.stdout)
        stderr: Stream for error messages (defaults to sys.stderr)

    Returns:
        Exit status: 0 success, 2 input error, 3 numeric failure
    """
    out = stdout or sys.stdout
    if command not in COMMANDS:
        return _error(f"unknown command {command!r}; valid commands: {', '.join(COMMANDS)}", EXIT_INPUT, stderr)
    try:
        analyzer = ExceptionalPointAnalyzer(config, zero_tol=zero_tol)
        result = _run(analyzer, command, svg)
    except (InputError, ValidationError) as e:
        return _error(str(e), EXIT_INPUT, stderr)
    except NumericalError as e:
        return _error(str(e), EXIT_NUMERIC, stderr)
    for line in result.lines:
        print(line, file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tropical-ep",
        description="Classify exceptional points of parametric Hamiltonians with tropical geometry.",
    )
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    source = parser.add_argument_group("input")
    source.add_argument("--config", type=Path, help="JSON run configuration (schema 1)")
    source.add_argument("--model", help="model or preset name, e.g. two_site or two_site_ep2")
    source.add_argument("--params", help="JSON object of model parameters")
    source.add_argument("--poly-file", type=Path, help="polynomial in 'i k re im' lines")
    source.add_argument("--matrix-file", type=Path, help="parametric matrix as JSON")
    options = parser.add_argument_group("options")
    options.add_argument("--out", type=Path, help="output directory")
    options.add_argument("--grid", help="amoeba grid r_min,r_max,n_r,n_theta")
    options.add_argument("--decades", help="splitting decades k_min,k_max")
    options.add_argument("--loop", help="holonomy loop c,K,mode (mode: enclosing|touching)")
    options.add_argument("--scan-param", help="parameter varied by the scan command")
    options.add_argument("--scan-values", help="comma-separated values for the scan command")
    options.add_argument("--zero-tol", type=float, help="display threshold for numeric values")
    options.add_argument("--svg", action="store_true", help="render amoeba.svg (amoeba, spine)")
    options.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Combine --config with command-line overrides; CLI flags win."""
    data: Dict[str, Any] = {}
    if args.config is not None:
        data = load_run_config(args.config).model_dump(by_alias=True, exclude_none=True)

    cli_sources = [flag for flag in (args.model, args.poly_file, args.matrix_file) if flag is not None]
    if len(cli_sources) > 1:
        raise InputError("give only one of --model, --poly-file, --matrix-file")
    if args.params is not None and args.model is None:
        raise InputError("--params requires --model")
    if cli_sources:
        for key in ("model", "poly_file", "matrix_file"):
            data.pop(key, None)
    if args.model is not None:
        try:
            params = json.loads(args.params) if args.params else {}
        except json.JSONDecodeError as e:
            raise InputError(f"--params is not valid JSON: {e}") from e
        if not isinstance(params, dict):
            raise InputError("--params must be a JSON object")
        data["model"] = ModelSpec(name=args.model, params=params).model_dump()
    if args.poly_file is not None:
        data["poly_file"] = args.poly_file
    if args.matrix_file is not None:
        data["matrix_file"] = args.matrix_file

    if args.out is not None:
        data["output_dir"] = args.out
    if args.grid is not None:
        data["grid"] = GridSpec.parse(args.grid).model_dump()
    if args.decades is not None:
        data["decades"] = DecadeRange.parse(args.decades).model_dump()
    if args.loop is not None:
        data["loop"] = LoopOptions.parse(args.loop).model_dump()
    if args.scan_param is not None or args.scan_values is not None:
        scan = dict(data.get("scan") or {})
        if args.scan_param is not None:
            scan["parameter"] = args.scan_param
        if args.scan_values is not None:
            scan["values"] = [v.strip() for v in args.scan_values.split(",") if v.strip()]
        data["scan"] = scan
    return RunConfig.model_validate(data)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, build the run configuration and execute the command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.command not in COMMANDS:
        return _error(f"unknown command {args.command!r}; valid commands: {', '.join(COMMANDS)}", EXIT_INPUT)
    try:
        config = resolve_config(args)
    except (InputError, ValidationError) as e:
        return _error(str(e), EXIT_INPUT)
    return execute(args.command, config, svg=args.svg, zero_tol=args.zero_tol)


if __name__ == "__main__":
    sys.exit(main())

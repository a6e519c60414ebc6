"""Command-line entry point: ``brstlab <command> [spec.json] --format json|text``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import BrstLabError
from .report import STAGES, SpecError, SystemSpec, emit, run_pipeline

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brstlab", description="Finite-dimensional BRST and Dirac constraint checks.")
    parser.add_argument("command", choices=STAGES,
                        help="check: charge identities; dsp: adds the decomposition; "
                             "physical: adds physical algebras; compare: adds the Dirac comparison")
    parser.add_argument("spec", nargs="?", default="-", help="system description (JSON file, '-' for stdin)")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--tol", type=float, default=None, help="absolute tolerance (falls back to BRSTLAB_TOL)")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    return parser


def _read_spec(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise SpecError(str(exc), path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc


def _env_tol() -> float | None:
    raw = os.environ.get("BRSTLAB_TOL")
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise SpecError(f"cannot parse {raw!r} as a float", "BRSTLAB_TOL") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = _read_spec(args.spec)
        if not isinstance(data, dict):
            raise SpecError("top level must be an object", "/")
        if args.tol is not None:
            if not args.tol > 0:
                raise SpecError("tolerance must be positive", "--tol")
            data = dict(data, tol=dict(data.get("tol", {}), abs=args.tol))
        spec = SystemSpec.from_dict(data, tol_fallback=_env_tol())
        report = run_pipeline(spec, args.command)
    except SpecError as exc:
        print(f"brstlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except BrstLabError as exc:
        print(f"brstlab: check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    payload = emit(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    if report.failed:
        print(f"brstlab: failing checks: {', '.join(report.failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

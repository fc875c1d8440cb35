"""Command line front end."""

from __future__ import annotations

import argparse
import sys

from .exporter import ExportError, export_scores


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attnscores",
        description="Score C source lines with a transformer checkpoint")
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser(
        "export", help="write per-line scores as file,line,score CSV")
    exp.add_argument("--src", required=True,
                     help="directory scanned recursively for .c/.h files")
    exp.add_argument("--model", required=True,
                     help="checkpoint directory or hub id")
    exp.add_argument("--out", required=True, help="output CSV path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        failures = export_scores(args.src, args.model, args.out)
    except ExportError as exc:
        print(f"attnscores: error: {exc}", file=sys.stderr)
        return 1
    for rel, message in failures:
        print(f"attnscores: warning: {rel}: {message}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

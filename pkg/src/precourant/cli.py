"""Command-line entry point: parse a manifest, run its tasks, print a report.

Exit codes: 0 when every executed task passes, 1 when any task fails (or
the build does), 2 on parse or usage errors.  The report on stdout is
byte-identical across runs for a fixed manifest and seed; per-task timing
goes to stderr unless --quiet is given.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .errors import ParseError, PrecourantError
from .manifest import KNOWN_TASKS, parse_manifest
from .runner import run_manifest


def builtin_manifest_dir() -> Path:
    return Path(__file__).resolve().parent / "manifests"


def builtin_manifests() -> List[str]:
    return sorted(p.stem for p in builtin_manifest_dir().glob("*.pcm"))


def resolve_manifest(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    candidate = builtin_manifest_dir() / f"{name_or_path}.pcm"
    if candidate.exists():
        return candidate
    raise FileNotFoundError(
        f"no manifest file {name_or_path!r}; builtin names: {', '.join(builtin_manifests())}"
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precourant",
        description="Exact verification of pre-Courant algebroid structures "
        "described by a manifest.",
    )
    parser.add_argument(
        "--manifest",
        required=True,
        help="manifest path, or the name of a builtin manifest "
        f"({', '.join(builtin_manifests())})",
    )
    parser.add_argument(
        "--task",
        action="append",
        default=None,
        metavar="NAME",
        help="task to run (repeatable; default: the manifest's task list); "
        f"known tasks: {', '.join(KNOWN_TASKS)}",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    parser.add_argument("--trials", type=int, default=None, help="override the trial count")
    parser.add_argument(
        "--max-degree", type=int, default=None, help="override the sampling degree bound"
    )
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    parser.add_argument("--quiet", action="store_true", help="suppress stderr timing")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        path = resolve_manifest(args.manifest)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = parse_manifest(path.read_text(), name=path.stem)
    except ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return 2

    if args.seed is not None:
        manifest.seed = args.seed
    if args.trials is not None:
        manifest.trials = args.trials
    if args.max_degree is not None:
        manifest.max_degree = args.max_degree

    tasks = args.task
    if tasks:
        unknown = [t for t in tasks if t not in KNOWN_TASKS]
        if unknown:
            print(f"error: unknown task names: {', '.join(unknown)}", file=sys.stderr)
            return 2

    timings: List = []
    try:
        report = run_manifest(manifest, tasks=tasks, timings=timings)
    except PrecourantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sys.stdout.write(report.to_json() if args.json else report.to_text())
    if not args.quiet:
        for name, elapsed in timings:
            print(f"timing {name} = {elapsed * 1000:.1f} ms", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())

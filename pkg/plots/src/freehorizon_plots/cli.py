"""Command line: render figures from a solver output directory.

    freehorizon-plots render --kind convergence --in results/exp3 --out fig.png
    freehorizon-plots render --kind response --in results/exp1 --t 4 --out fig.png

Exit codes: 0 success, 2 schema/argument error (the message names the
offending column), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, SchemaError, render, spec_for_directory

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_IO = 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="freehorizon-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure")
    p_render.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    p_render.add_argument("--in", dest="in_dir", required=True,
                          help="solver output directory")
    p_render.add_argument("--out", required=True, help="image file to write")
    p_render.add_argument("--t", type=int, default=None,
                          help="use trajectory_T{t}.csv for response figures")
    args = parser.parse_args(argv)

    trajectory_file = f"trajectory_T{args.t}.csv" if args.t is not None else None
    try:
        figspec = spec_for_directory(args.kind, args.in_dir, trajectory_file)
        render(figspec, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(args.out)
    return EXIT_OK


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""CLI: volcano-render --kind ... --input ... --output fig.png"""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="volcano-render")
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--input", nargs="*", default=[],
                        help="CSV/JSON files produced by the simulation CLI")
    parser.add_argument("--baseline", nargs="*", default=[],
                        help="uncoupled (J=0) decay CSVs, drawn dashed")
    parser.add_argument("--output", required=True)
    parser.add_argument("--xlim", nargs=2, type=float, default=None)
    parser.add_argument("--ylim", nargs=2, type=float, default=None)
    ns = parser.parse_args(argv)
    spec = FigureSpec(kind=ns.kind, inputs=ns.input, baselines=ns.baseline,
                      output=ns.output,
                      xlim=tuple(ns.xlim) if ns.xlim else None,
                      ylim=tuple(ns.ylim) if ns.ylim else None)
    try:
        render(spec)
    except (ValueError, OSError) as exc:
        print(f"render failed: {exc}", file=sys.stderr)
        return 1
    print(spec.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())

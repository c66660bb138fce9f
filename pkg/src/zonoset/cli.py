"""Command line interface: `zonoset analyze <file> [options]`."""

from __future__ import annotations

import argparse
import sys

from .analyzer import AnalysisError, analyze, emit_report
from .core import Interval, rat
from .fixpoint import AnalysisConfig
from .join import JoinMode
from .lang import ParseError, parse
from .svg import emit_svg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zonoset")
    sub = ap.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="analyze a program file")
    an.add_argument("file")
    an.add_argument("--join", choices=["mub", "nabla"], default="nabla")
    an.add_argument("--max-iter", type=int, default=100, metavar="K")
    an.add_argument("--box", nargs=2, metavar=("LO", "HI"), default=None)
    an.add_argument("--unfold-init", type=int, default=0, metavar="N")
    an.add_argument("--unfold-cyclic", type=int, default=1, metavar="N")
    an.add_argument("--format", choices=["text", "json", "csv"], default="text")
    an.add_argument(
        "--svg",
        nargs=3,
        metavar=("VAR1", "VAR2", "OUT"),
        default=None,
        help="write an SVG of the final 2D projection of two variables",
    )
    an.add_argument("--order-cap", type=int, default=12, metavar="N")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0

    try:
        with open(ns.file, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        config = AnalysisConfig(
            bounding_box=(
                Interval.of(rat(ns.box[0]), rat(ns.box[1]))
                if ns.box
                else AnalysisConfig().bounding_box
            ),
            max_iterations=ns.max_iter,
            join_mode=JoinMode.MUB if ns.join == "mub" else JoinMode.NABLA,
            initial_unfold=ns.unfold_init,
            cyclic_unfold=ns.unfold_cyclic,
            order_cap=ns.order_cap,
        )
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        program = parse(source)
        report = analyze(program, config)
    except (ParseError, AnalysisError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    print(emit_report(report, ns.format), end="")

    if ns.svg:
        var1, var2, out = ns.svg
        final = next(
            (pt.state for pt in reversed(report.points) if pt.state.is_regular), None
        )
        if final is None:
            print("error: no regular state to plot", file=sys.stderr)
            return 1
        try:
            pt = next(
                pt
                for pt in reversed(report.points)
                if pt.state.is_regular
                and var1 in pt.columns
                and var2 in pt.columns
            )
            emit_svg(pt.state, pt.columns[var1], pt.columns[var2], out)
        except StopIteration:
            print(f"error: no point exposes both {var1} and {var2}", file=sys.stderr)
            return 1

    return 2 if report.top else 0


if __name__ == "__main__":
    sys.exit(main())

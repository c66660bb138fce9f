#!/usr/bin/env python3
"""Analyze the bundled sample programs and print their reports.

Writes an SVG of the branch example's (x, y) zonotope next to this
script.  The growing loop is run against a small bounding box to show
the top outcome.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from zonoset.analyzer import analyze, emit_report
from zonoset.core import Interval
from zonoset.fixpoint import AnalysisConfig
from zonoset.lang import parse
from zonoset.svg import emit_svg

HERE = pathlib.Path(__file__).resolve().parent
PROGRAMS = HERE / "programs"


def show(name: str, config: AnalysisConfig | None = None) -> None:
    source = (PROGRAMS / name).read_text()
    report = analyze(parse(source), config or AnalysisConfig())
    print(f"===== {name} =====")
    print(emit_report(report, "text"))


def main() -> None:
    show("branch_join.zs")
    show("sqrt_taylor.zs")
    show("halving_loop.zs")
    show("growing_loop.zs", AnalysisConfig(bounding_box=Interval.of(-50, 50)))

    # plot the inner branch join of f: y against x
    source = (PROGRAMS / "branch_join.zs").read_text()
    report = analyze(parse(source))
    point = report.point("main>f@1:9")
    out = HERE / "branch_join.svg"
    emit_svg(point.state, point.columns["x"], point.columns["y"], str(out))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Directional precision of the two join operators on a worked pair.

The midpoint join keeps relations between the merged branches (tight
along skew directions), the per-axis operator keeps each variable's
range tight.  The table prints the support interval of both results
along a fan of directions, plus a third upper bound showing that
minimal upper bounds are not unique.
"""

import pathlib
import sys
from fractions import Fraction as F

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from zonoset.core import AffineForm, PerturbedAffineSet, SymbolRegistry, support
from zonoset.join import mub_join, nabla_join
from zonoset.order import Verdict, leq_exact


def main() -> None:
    reg = SymbolRegistry()
    reg.fresh_central()
    reg.fresh_central()
    X = PerturbedAffineSet.of(
        ["x", "y"],
        [AffineForm.make(1, {1: 2}), AffineForm.make(-1, {1: 1, 2: -2})],
        reg,
    )
    Y = PerturbedAffineSet.of(
        ["x", "y"],
        [AffineForm.make(3, {1: 1}), AffineForm.make(1, {1: 2, 2: -1})],
        reg,
    )
    mid = mub_join(X, Y)
    axes = nabla_join(X, Y)

    print(f"X    = {X}")
    print(f"Y    = {Y}")
    print(f"mid  = {mid}")
    print(f"axes = {axes}")
    print()
    print(f"{'direction':>12} | {'midpoint join':>16} | {'per-axis join':>16}")
    for t in [(1, 0), (0, 1), (1, 1), (-1, 1), (1, -2), (2, 1)]:
        print(
            f"{str(t):>12} | {str(support(mid, t)):>16} | {str(support(axes, t)):>16}"
        )
    print()
    for a, b, names in [
        (mid, axes, ("midpoint", "per-axis")),
        (axes, mid, ("per-axis", "midpoint")),
    ]:
        verdict = leq_exact(a, b)
        relation = "<=" if verdict.result is Verdict.LESS_OR_EQUAL else "incomparable to"
        print(f"{names[0]} {relation} {names[1]}")


if __name__ == "__main__":
    main()

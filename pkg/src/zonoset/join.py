"""Upper-bound operators for perturbed affine sets.

The domain has minimal upper bounds rather than least ones.  Two
operators are provided: a midpoint construction that is a genuine
minimal upper bound whenever the operands' perturbation zonotopes
coincide (and a sound over-approximation otherwise), and a cheaper
per-axis operator that keeps each variable's concretisation exactly the
interval hull of the operands, at the price of dropping relations
between the unstable coefficients.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction

from .core import (
    ZERO,
    AffineForm,
    PerturbedAffineSet,
    ScalarLike,
    canonical_generators,
    rat,
)


class JoinMode(Enum):
    MUB = "mub"
    NABLA = "nabla"


def argmin_interval(alpha: ScalarLike, beta: ScalarLike) -> Fraction:
    """The element of [min(a,b), max(a,b)] with least absolute value:
    zero when the signs differ (or either is zero), else the smaller
    coefficient in magnitude."""
    a, b = rat(alpha), rat(beta)
    if a == 0 or b == 0 or (a < 0) != (b < 0):
        return ZERO
    return a if abs(a) <= abs(b) else b


def _require_regular(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> None:
    if X.vars != Y.vars:
        raise ValueError(f"variable lists differ: {X.vars} vs {Y.vars}")
    if not (X.is_regular and Y.is_regular):
        raise ValueError("join operators need regular operands")


def mub_join(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> PerturbedAffineSet:
    """Midpoint upper bound.

    The result's central matrix is the mean of the operands'; each
    nonzero row of half their central difference (the center row first,
    then one row per central symbol) becomes a fresh perturbation
    symbol, stacked on a common perturbation matrix.  When the operands'
    perturbation zonotopes are geometrically equal that common matrix is
    X's and the result is a minimal upper bound; otherwise both operands
    are first inflated to the stacked matrix of all their rows, which
    keeps the result an upper bound.
    """
    _require_regular(X, Y)
    reg = X.registry
    p = X.dim

    centers = [(fx.center + fy.center) / 2 for fx, fy in zip(X.forms, Y.forms)]
    eps = sorted(set(X.central_symbols()) | set(Y.central_symbols()))
    centrals: list[dict[int, Fraction]] = [dict() for _ in range(p)]
    for i in eps:
        for k, (fx, fy) in enumerate(zip(X.forms, Y.forms)):
            c = (fx.central.get(i, ZERO) + fy.central.get(i, ZERO)) / 2
            if c != 0:
                centrals[k][i] = c

    # fresh rows carrying half the central difference, center row first
    diff_rows: list[tuple[Fraction, ...]] = []
    row = tuple((fy.center - fx.center) / 2 for fx, fy in zip(X.forms, Y.forms))
    if any(c != 0 for c in row):
        diff_rows.append(row)
    for i in eps:
        row = tuple(
            (fy.central.get(i, ZERO) - fx.central.get(i, ZERO)) / 2
            for fx, fy in zip(X.forms, Y.forms)
        )
        if any(c != 0 for c in row):
            diff_rows.append(row)

    perts: list[dict[int, Fraction]] = [dict() for _ in range(p)]
    for row in diff_rows:
        sym = reg.fresh_perturbation()
        for k, c in enumerate(row):
            if c != 0:
                perts[k][sym.index] = c

    same_zonotope = canonical_generators(X.perturbation_matrix()) == canonical_generators(
        Y.perturbation_matrix()
    )
    if same_zonotope:
        for k, fx in enumerate(X.forms):
            perts[k].update(fx.perturbation)
    else:
        # inflate both operands to the stacked perturbation matrix
        for source in (X, Y):
            for j in source.perturbation_symbols():
                row = tuple(f.perturbation.get(j, ZERO) for f in source.forms)
                if any(c != 0 for c in row):
                    sym = reg.fresh_perturbation()
                    for k, c in enumerate(row):
                        if c != 0:
                            perts[k][sym.index] = c

    forms = tuple(
        AffineForm(centers[k], centrals[k], perts[k]) for k in range(p)
    )
    return PerturbedAffineSet.of(X.vars, forms, reg)


def nabla_join(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> PerturbedAffineSet:
    """Per-axis hull operator.

    Every variable's new center is the midpoint of the hull of the two
    concretisations; shared coefficients keep the least-magnitude value
    between the operands (zero when signs disagree); one fresh
    perturbation symbol per variable absorbs exactly the width the
    kept coefficients fail to cover.  Axis concretisations are exact,
    relations across the killed coefficients are given up.
    """
    _require_regular(X, Y)
    reg = X.registry
    forms: list[AffineForm] = []
    planned: list[tuple[Fraction, dict[int, Fraction], dict[int, Fraction], Fraction]] = []
    eps = sorted(set(X.central_symbols()) | set(Y.central_symbols()))
    etas = sorted(set(X.perturbation_symbols()) | set(Y.perturbation_symbols()))
    for fx, fy in zip(X.forms, Y.forms):
        hull = fx.interval().hull(fy.interval())
        central: dict[int, Fraction] = {}
        for i in eps:
            c = argmin_interval(fx.central.get(i, ZERO), fy.central.get(i, ZERO))
            if c != 0:
                central[i] = c
        pert: dict[int, Fraction] = {}
        for j in etas:
            c = argmin_interval(fx.perturbation.get(j, ZERO), fy.perturbation.get(j, ZERO))
            if c != 0:
                pert[j] = c
        kept = sum((abs(c) for c in central.values()), ZERO) + sum((abs(c) for c in pert.values()), ZERO)
        planned.append((hull.mid, central, pert, hull.radius - kept))
    # fresh symbols are allocated per variable, in variable order
    for mid, central, pert, fresh in planned:
        if fresh != 0:
            pert[reg.fresh_perturbation().index] = fresh
        forms.append(AffineForm(mid, central, pert))
    return PerturbedAffineSet.of(X.vars, tuple(forms), reg)


def join_dispatch(
    X: PerturbedAffineSet, Y: PerturbedAffineSet, mode: JoinMode = JoinMode.NABLA
) -> PerturbedAffineSet:
    """Join with bottom/top absorption, then the configured operator."""
    if X.vars != Y.vars:
        raise ValueError(f"variable lists differ: {X.vars} vs {Y.vars}")
    if X.is_bottom:
        return Y
    if Y.is_bottom:
        return X
    if X.is_top or Y.is_top:
        return PerturbedAffineSet.top(X.vars, X.registry)
    if mode is JoinMode.MUB:
        return mub_join(X, Y)
    return nabla_join(X, Y)

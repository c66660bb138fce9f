"""The functional preorder on perturbed affine sets.

X <= Y demands more than inclusion of concretisations: the deviation of
the central matrices, measured row-wise against every direction, must
be paid for by growth of the perturbation part,

    ||(C_Y - C_X) t||_1 + ||P_X t||_1 - ||P_Y t||_1  <=  0   for all t.

This keeps the meaning of central symbols rigid (no relinking of
outputs to inputs), while still implying geometric inclusion.  The
supremum of the left-hand side over directions is computed exactly by
enumerating sign vectors for the positively-weighted rows and solving
one small rational linear program per assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Sequence

from .core import (
    ZERO,
    ONE,
    PerturbedAffineSet,
    ScalarLike,
    canonical_generators,
    linear_norm,
    project_2d,
    rat,
)
from .simplex import LpProblem, LpStatus, Relation, solve

DEFAULT_ORDER_CAP = 12


class Verdict(Enum):
    LESS_OR_EQUAL = "leq"
    NOT_LESS_OR_EQUAL = "not-leq"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OrderVerdict:
    result: Verdict
    witness: tuple[Fraction, ...] | None = None
    value: Fraction | None = None

    def __bool__(self) -> bool:
        return self.result is Verdict.LESS_OR_EQUAL


LEQ = OrderVerdict(Verdict.LESS_OR_EQUAL)
UNKNOWN = OrderVerdict(Verdict.UNKNOWN)


def _check_comparable(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> None:
    if X.vars != Y.vars:
        raise ValueError(f"variable lists differ: {X.vars} vs {Y.vars}")


def _flag_verdict(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> OrderVerdict | None:
    """Bottom/top cases, decided before any matrix work."""
    if X.is_bottom or Y.is_top:
        return LEQ
    if X.is_top or Y.is_bottom:
        return OrderVerdict(Verdict.NOT_LESS_OR_EQUAL)
    return None


def _comparison_rows(
    X: PerturbedAffineSet, Y: PerturbedAffineSet
) -> tuple[list[tuple[Fraction, ...]], list[tuple[Fraction, ...]], list[tuple[Fraction, ...]]]:
    """Nonzero rows of C_Y - C_X (center difference first), P_X and P_Y,
    zero-extended onto the union of the mentioned symbols."""
    p = X.dim
    diff_rows: list[tuple[Fraction, ...]] = []
    center = tuple(fy.center - fx.center for fx, fy in zip(X.forms, Y.forms))
    if any(c != 0 for c in center):
        diff_rows.append(center)
    eps = sorted(set(X.central_symbols()) | set(Y.central_symbols()))
    for i in eps:
        row = tuple(
            fy.central.get(i, ZERO) - fx.central.get(i, ZERO)
            for fx, fy in zip(X.forms, Y.forms)
        )
        if any(c != 0 for c in row):
            diff_rows.append(row)

    def pert_rows(S: PerturbedAffineSet) -> list[tuple[Fraction, ...]]:
        rows = []
        for j in S.perturbation_symbols():
            row = tuple(f.perturbation.get(j, ZERO) for f in S.forms)
            if any(c != 0 for c in row):
                rows.append(row)
        return rows

    assert p == Y.dim
    return diff_rows, pert_rows(X), pert_rows(Y)


def order_defect(
    X: PerturbedAffineSet, Y: PerturbedAffineSet, t: Sequence[ScalarLike]
) -> Fraction:
    """Value of the ordering expression at direction t; X <= Y iff this
    is <= 0 for every t."""
    _check_comparable(X, Y)
    if not (X.is_regular and Y.is_regular):
        raise ValueError("order_defect needs regular operands")
    tv = [rat(v) for v in t]
    diff, px, py = _comparison_rows(X, Y)
    return linear_norm(diff, tv) + linear_norm(px, tv) - linear_norm(py, tv)


def _column_sufficient(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> bool:
    """Cheap per-variable criterion for X <= Y: the column mass of the
    central difference plus the drift of shared perturbation rows must
    be covered by Y's own single-column perturbation rows.  Sound but
    incomplete; it decides the per-axis join pattern without programs."""
    p = X.dim
    lhs = [ZERO] * p
    eps = sorted(set(X.central_symbols()) | set(Y.central_symbols()))
    for k, (fx, fy) in enumerate(zip(X.forms, Y.forms)):
        lhs[k] += abs(fy.center - fx.center)
        for i in eps:
            lhs[k] += abs(fy.central.get(i, ZERO) - fx.central.get(i, ZERO))
    ex = set(X.perturbation_symbols())
    ey = set(Y.perturbation_symbols())
    rhs = [ZERO] * p
    for j in ex | ey:
        xrow = [f.perturbation.get(j, ZERO) for f in X.forms]
        yrow = [f.perturbation.get(j, ZERO) for f in Y.forms]
        if j in ex:
            for k in range(p):
                lhs[k] += abs(xrow[k] - yrow[k])
        else:
            support_cols = [k for k in range(p) if yrow[k] != 0]
            if len(support_cols) == 1:
                rhs[support_cols[0]] += abs(yrow[support_cols[0]])
            # wider rows only increase Y's side; ignoring them is sound
    return all(l <= r for l, r in zip(lhs, rhs))


def _dominated(
    rows: list[tuple[Fraction, ...]], by: list[tuple[Fraction, ...]]
) -> bool:
    """Direction-wise domination of canonical generator magnitudes, a
    cheap sufficient condition for ||rows . t|| <= ||by . t|| at all t."""
    have: dict[tuple[Fraction, ...], Fraction] = {}
    for row in canonical_generators(by):
        pivot = next(c for c in row if c != 0)
        direction = tuple(c / pivot for c in row)
        have[direction] = abs(pivot)
    for row in canonical_generators(rows):
        pivot = next(c for c in row if c != 0)
        direction = tuple(c / pivot for c in row)
        if have.get(direction, ZERO) < abs(pivot):
            return False
    return True


def _box_max_closed_2d(
    plus_rows: list[tuple[Fraction, ...]],
    minus_rows: list[tuple[Fraction, ...]],
) -> tuple[Fraction, tuple[Fraction, ...] | None]:
    """Exact box maximum of sum |row.t| (plus) minus sum |row.t| (minus)
    for one or two dimensions.

    The expression is piecewise linear and every breakline passes
    through the origin, so each linearity cone meets the unit box in a
    polytope whose vertices are the origin, box corners, and the points
    where a row-perpendicular ray leaves the box; the maximum sits on
    one of those candidates.
    """
    p = len(plus_rows[0]) if plus_rows else len(minus_rows[0])
    if p == 1:
        candidates = [(ONE,)]
    else:
        candidates = [(ONE, ONE), (ONE, Fraction(-1))]
        for a, b in plus_rows + minus_rows:
            scale = max(abs(a), abs(b))
            if scale:
                candidates.append((-b / scale, a / scale))

    def value(t: tuple[Fraction, ...]) -> Fraction:
        return linear_norm(plus_rows, t) - linear_norm(minus_rows, t)

    best = ZERO
    best_t: tuple[Fraction, ...] | None = None
    for t in candidates:
        v = value(t)
        if v > best:
            best, best_t = v, t
    return best, best_t


def leq_exact(
    X: PerturbedAffineSet,
    Y: PerturbedAffineSet,
    cap: int = DEFAULT_ORDER_CAP,
    shortcuts: bool = True,
    force_lp: bool = False,
) -> OrderVerdict:
    """Exact decision of X <= Y.

    The ordering expression is positively homogeneous, so its supremum
    over all directions is nonpositive iff its maximum over the unit box
    is.  One or two variables admit a closed-form maximum over finitely
    many candidate directions; otherwise, for each sign assignment to
    the rows of C_Y - C_X and P_X the maximum is a linear program (the
    negative P_Y term enters through epigraph variables).  The overall
    maximum and its maximiser are exact; the maximising direction is the
    witness on failure.  `force_lp` runs the sign-enumerated programs
    regardless, for cross-validation.
    """
    _check_comparable(X, Y)
    flagged = _flag_verdict(X, Y)
    if flagged is not None:
        return flagged

    diff, px, py = _comparison_rows(X, Y)
    if not diff and not px:
        return LEQ
    if not force_lp and shortcuts and (
        _dominated(diff + px, py) or _column_sufficient(X, Y)
    ):
        return LEQ

    p = X.dim
    if p <= 2 and not force_lp:
        best_value, best_u = _box_max_closed_2d(diff + px, py)
        if best_u is None:
            return LEQ
        witness = _normalise_direction(best_u)
        defect = order_defect(X, Y, witness)
        assert defect == best_value
        return OrderVerdict(Verdict.NOT_LESS_OR_EQUAL, witness, defect)
    # parallel rows contribute one common sign choice: merging them
    # preserves every norm in the expression and shrinks the enumeration
    signed_rows = list(canonical_generators(diff + px))
    py = list(canonical_generators(py))
    k = len(signed_rows)
    n_s = len(py)
    # the sign-enumerated rows drive the exponential cost; the cap
    # bounds them (callers fall back to the sampled filter on Unknown)
    if k > cap:
        return UNKNOWN
    best_value = ZERO
    best_u: tuple[Fraction, ...] | None = None

    # epigraph and box constraints are shared by every program
    minus_one = Fraction(-1)
    shared: list[tuple[tuple[Fraction, ...], Relation, Fraction]] = []
    for idx, row in enumerate(py):
        for sign in (1, -1):
            cons = [sign * c for c in row] + [ZERO] * n_s
            cons[p + idx] = minus_one
            shared.append((tuple(cons), Relation.LE, ZERO))
    for j in range(p):
        box = [ZERO] * (p + n_s)
        box[j] = ONE
        shared.append((tuple(box), Relation.LE, ONE))
        box[j] = minus_one
        shared.append((tuple(box), Relation.LE, ONE))

    # the expression is symmetric under t -> -t: fix the first row's sign
    for tail in product((ONE, minus_one), repeat=max(k - 1, 0)):
        signs = (ONE,) + tail
        objective = [ZERO] * p + [minus_one] * n_s
        constraints = list(shared)
        for sigma, row in zip(signs, signed_rows):
            for j in range(p):
                objective[j] += sigma * row[j]
            constraints.append(
                (tuple(-sigma * c for c in row) + (ZERO,) * n_s, Relation.LE, ZERO)
            )
        sol = solve(LpProblem(tuple(objective), tuple(constraints)))
        if sol.status is not LpStatus.OPTIMAL:
            raise RuntimeError("order decision programs are bounded and feasible")
        assert sol.value is not None and sol.x is not None
        if sol.value > best_value:
            best_value = sol.value
            best_u = sol.x[:p]

    if best_u is None:
        return LEQ
    witness = _normalise_direction(best_u)
    defect = order_defect(X, Y, witness)
    assert defect == best_value, "linear program optimum must match the expression"
    return OrderVerdict(Verdict.NOT_LESS_OR_EQUAL, witness, defect)


def _normalise_direction(u: Sequence[Fraction]) -> tuple[Fraction, ...]:
    for c in u:
        if c != 0:
            if c < 0:
                return tuple(-v for v in u)
            break
    return tuple(u)


def default_directions(
    X: PerturbedAffineSet, Y: PerturbedAffineSet
) -> list[tuple[Fraction, ...]]:
    """Axis vectors, pairwise sums/differences of axes, and the rows of
    the three comparison matrices."""
    p = X.dim
    dirs: list[tuple[Fraction, ...]] = []
    seen: set[tuple[Fraction, ...]] = set()

    def push(t: tuple[Fraction, ...]) -> None:
        if any(c != 0 for c in t):
            t = _normalise_direction(t)
            if t not in seen:
                seen.add(t)
                dirs.append(t)

    for i in range(p):
        push(tuple(ONE if j == i else ZERO for j in range(p)))
    for i in range(p):
        for j in range(i + 1, p):
            push(tuple((ONE if l in (i, j) else ZERO) for l in range(p)))
            push(tuple(ONE if l == i else (-ONE if l == j else ZERO) for l in range(p)))
    diff, px, py = _comparison_rows(X, Y)
    for row in diff + px + py:
        push(row)
    return dirs


def leq_sampled(
    X: PerturbedAffineSet,
    Y: PerturbedAffineSet,
    directions: Sequence[Sequence[ScalarLike]] | None = None,
) -> OrderVerdict:
    """Falsification filter: evaluates the ordering expression at a
    finite direction set.  The first strict violation refutes X <= Y;
    otherwise the answer is Unknown (never LessOrEqual)."""
    _check_comparable(X, Y)
    if not (X.is_regular and Y.is_regular):
        return UNKNOWN
    dirs = (
        [tuple(rat(c) for c in t) for t in directions]
        if directions is not None
        else default_directions(X, Y)
    )
    if not dirs:
        raise ValueError("directions must be nonempty")
    for t in dirs:
        value = order_defect(X, Y, t)
        if value > 0:
            return OrderVerdict(Verdict.NOT_LESS_OR_EQUAL, tuple(t), value)
    return UNKNOWN


def equiv(X: PerturbedAffineSet, Y: PerturbedAffineSet) -> bool:
    """Equivalence: equal central matrices and geometrically equal
    perturbation zonotopes (perturbation symbol identities are
    irrelevant)."""
    _check_comparable(X, Y)
    if X.is_bottom or Y.is_bottom:
        return X.is_bottom and Y.is_bottom
    if X.is_top or Y.is_top:
        return X.is_top and Y.is_top
    for fx, fy in zip(X.forms, Y.forms):
        if fx.center != fy.center or fx.central != fy.central:
            return False
    return canonical_generators(X.perturbation_matrix()) == canonical_generators(
        Y.perturbation_matrix()
    )


def _support_2d(center, gens, t) -> Fraction:
    return center[0] * t[0] + center[1] * t[1] + sum(
        abs(g[0] * t[0] + g[1] * t[1]) for g in gens
    )


def concretization_leq_2d(
    X: PerturbedAffineSet, Y: PerturbedAffineSet, k1: int | str, k2: int | str
) -> bool:
    """Inclusion of the concretisations projected onto two variables.

    A zonotope has finitely many faces whose normals are perpendicular
    to its generator directions; inclusion holds iff the support of X
    stays below the support of Y along every such normal (degenerate
    projections of Y fall back to a spanning direction set).
    """
    _check_comparable(X, Y)
    if X.is_bottom or Y.is_top:
        return True
    if X.is_top or Y.is_bottom:
        return False
    zx = project_2d(X, k1, k2)
    zy = project_2d(Y, k1, k2)
    gens_y = canonical_generators(zy.generators)
    dirs: list[tuple[Fraction, Fraction]] = []
    if len(gens_y) == 0:
        dirs = [(ONE, ZERO), (ZERO, ONE)]
    elif len(gens_y) == 1:
        (gx, gy) = gens_y[0]
        dirs = [(-gy, gx), (gx, gy)]
    else:
        for gx, gy in gens_y:
            dirs.append((-gy, gx))
    for t in dirs:
        for signed in (t, (-t[0], -t[1])):
            if _support_2d(zx.center, zx.generators, signed) > _support_2d(
                zy.center, zy.generators, signed
            ):
                return False
    return True

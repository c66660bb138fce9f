"""Small exact simplex solver over rationals.

Solves  max c.x  subject to rows of linear constraints (<=, >=, ==)
with free variables.  Free variables are split into nonnegative pairs
internally, a two-phase tableau method with Bland's rule handles
feasibility and anti-cycling.  Everything is Fraction arithmetic, so
optima and solution vectors are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .core import ZERO, ONE, rat, ScalarLike


class Relation(Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """max objective.x over free x, subject to constraints
    (row, relation, bound) meaning  row.x <relation> bound."""

    objective: tuple[Fraction, ...]
    constraints: tuple[tuple[tuple[Fraction, ...], Relation, Fraction], ...]

    @staticmethod
    def of(
        objective: Sequence[ScalarLike],
        constraints: Sequence[tuple[Sequence[ScalarLike], Relation, ScalarLike]],
    ) -> "LpProblem":
        obj = tuple(rat(c) for c in objective)
        rows = tuple(
            (tuple(rat(a) for a in row), rel, rat(b)) for row, rel, b in constraints
        )
        for row, _, _ in rows:
            if len(row) != len(obj):
                raise ValueError("constraint width must match objective")
        return LpProblem(obj, rows)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: tuple[Fraction, ...] | None
    value: Fraction | None

    def satisfies(self, problem: LpProblem) -> bool:
        if self.x is None:
            return False
        for row, rel, b in problem.constraints:
            v = sum(a * xi for a, xi in zip(row, self.x))
            if rel is Relation.LE and v > b:
                return False
            if rel is Relation.GE and v < b:
                return False
            if rel is Relation.EQ and v != b:
                return False
        return True


def solve(problem: LpProblem) -> LpSolution:
    n_free = len(problem.objective)
    n = 2 * n_free  # split x = pos - neg

    rows: list[list[Fraction]] = []
    for row, rel, b in problem.constraints:
        le_rows = []
        if rel in (Relation.LE, Relation.EQ):
            le_rows.append((row, b))
        if rel in (Relation.GE, Relation.EQ):
            le_rows.append((tuple(-a for a in row), -b))
        for r, bb in le_rows:
            split = []
            for a in r:
                split.extend((a, -a))
            rows.append(split + [bb])

    m = len(rows)
    # slack columns
    for i, r in enumerate(rows):
        slacks = [ZERO] * m
        slacks[i] = ONE
        r[-1:-1] = slacks
    basis = [n + i for i in range(m)]
    ncols = n + m

    negated = [i for i, r in enumerate(rows) if r[-1] < 0]
    if negated:
        for i in negated:
            rows[i] = [-v for v in rows[i]]
        n_art = len(negated)
        for i, r in enumerate(rows):
            arts = [ZERO] * n_art
            if i in negated:
                k = negated.index(i)
                arts[k] = ONE
                basis[i] = ncols + k
            r[-1:-1] = arts
        ncols += n_art

        cost = [ZERO] * (ncols + 1)
        for c in range(n + m, ncols):
            cost[c] = Fraction(-1)
        _price_out(cost, rows, basis)
        status = _iterate(cost, rows, basis)
        if status is LpStatus.UNBOUNDED or cost[-1] < 0:
            return LpSolution(LpStatus.INFEASIBLE, None, None)
        _expel_artificials(rows, basis, n + m)
        keep = list(range(n + m)) + [ncols]
        kept_rows: list[list[Fraction]] = []
        kept_basis: list[int] = []
        for r, b in zip(rows, basis):
            if b < n + m:
                kept_rows.append([r[j] for j in keep])
                kept_basis.append(b)
        rows, basis = kept_rows, kept_basis
        ncols = n + m

    cost = [ZERO] * (ncols + 1)
    for j in range(n_free):
        cost[2 * j] = problem.objective[j]
        cost[2 * j + 1] = -problem.objective[j]
    _price_out(cost, rows, basis)
    status = _iterate(cost, rows, basis)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, None, None)

    values = [ZERO] * ncols
    for i, b in enumerate(basis):
        values[b] = rows[i][-1]
    x = tuple(values[2 * j] - values[2 * j + 1] for j in range(n_free))
    return LpSolution(LpStatus.OPTIMAL, x, cost[-1])


def _price_out(cost: list[Fraction], rows: list[list[Fraction]], basis: list[int]) -> None:
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb != 0:
            row = rows[i]
            for j in range(len(cost) - 1):
                cost[j] -= cb * row[j]
            cost[-1] += cb * row[-1]


def _iterate(cost: list[Fraction], rows: list[list[Fraction]], basis: list[int]) -> LpStatus:
    ncols = len(cost) - 1
    while True:
        enter = -1
        for j in range(ncols):
            if cost[j] > 0:
                enter = j
                break
        if enter < 0:
            return LpStatus.OPTIMAL
        leave = -1
        best: Fraction | None = None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return LpStatus.UNBOUNDED
        _pivot(cost, rows, basis, leave, enter)


def _pivot(cost: list[Fraction], rows: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    row = rows[r]
    piv = row[c]
    rows[r] = [v / piv for v in row]
    row = rows[r]
    for i, other in enumerate(rows):
        if i != r and other[c] != 0:
            f = other[c]
            rows[i] = [v - f * w for v, w in zip(other, row)]
    f = cost[c]
    if f != 0:
        for j in range(len(cost) - 1):
            cost[j] -= f * row[j]
        cost[-1] += f * row[-1]
        cost[c] = ZERO
    basis[r] = c


def _expel_artificials(rows: list[list[Fraction]], basis: list[int], n_real: int) -> None:
    # artificials stuck in the basis at value zero: pivot them onto any
    # real column, rows with no real entries are redundant
    for i in range(len(rows)):
        if basis[i] >= n_real:
            for j in range(n_real):
                if rows[i][j] != 0:
                    dummy_cost = [ZERO] * len(rows[i])
                    _pivot(dummy_cost, rows, basis, i, j)
                    break

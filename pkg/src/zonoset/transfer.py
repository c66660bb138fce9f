"""Abstract transfer functions for assignments.

Constant, addition and scaling transfers are exact on affine forms and
introduce no fresh symbols (except the one central symbol naming a new
input range).  Multiplication linearises around the centers and folds
the nonlinear remainder into one fresh central symbol (products of
central deviations) and one fresh perturbation symbol (every term
touching a perturbation deviation).  A refined rule for squares keeps
the remainder one-sided, which tightens ranges noticeably.

Expression trees compile to a plan of these primitives; scalar factors
are folded into exact scalings so that only genuinely nonlinear steps
pay the linearisation price.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import lang
from .core import (
    ZERO,
    AffineForm,
    PerturbedAffineSet,
    ScalarLike,
    SymbolRegistry,
    rat,
)


# ------------------------------------------------------ form builders

def const_form(registry: SymbolRegistry, a: ScalarLike, b: ScalarLike) -> AffineForm:
    """Form for a fresh unknown constant in [a, b]: midpoint center plus
    one fresh central symbol carrying the half-width (none if a == b)."""
    a, b = rat(a), rat(b)
    if a > b:
        raise ValueError(f"invalid constant range [{a}, {b}]")
    center = (a + b) / 2
    half = abs(a - b) / 2
    if half == 0:
        return AffineForm(center, {}, {})
    sym = registry.fresh_central()
    return AffineForm(center, {sym.index: half}, {})


def mul_form(registry: SymbolRegistry, f: AffineForm, g: AffineForm) -> AffineForm:
    """Product of two forms.

    Center and first-order central terms are exact; the quadratic
    central remainder goes to a fresh central symbol, and every term
    involving a perturbation deviation goes to a fresh perturbation
    symbol.  Fresh symbols with zero coefficient are not allocated.
    """
    center = f.center * g.center
    central: dict[int, Fraction] = {}
    for i in set(f.central) | set(g.central):
        c = f.center * g.central.get(i, ZERO) + f.central.get(i, ZERO) * g.center
        if c != 0:
            central[i] = c

    f_c = f.central_radius()
    g_c = g.central_radius()
    f_p = sum((abs(c) for c in f.perturbation.values()), ZERO)
    g_p = sum((abs(c) for c in g.perturbation.values()), ZERO)
    f_full = abs(f.center) + f_c
    g_full = abs(g.center) + g_c

    quad_central = f_c * g_c
    if quad_central != 0:
        central[registry.fresh_central().index] = quad_central

    perturbation: dict[int, Fraction] = {}
    quad_pert = f_p * g_p + f_full * g_p + f_p * g_full
    if quad_pert != 0:
        perturbation[registry.fresh_perturbation().index] = quad_pert
    return AffineForm(center, central, perturbation)


def square_form(registry: SymbolRegistry, f: AffineForm) -> AffineForm:
    """Refined square: with d the deviation part of f, d*d lies in
    [0, Q] for Q the squared deviation magnitude, so the remainder is
    re-centered at Q/2 with a fresh central symbol of the same size."""
    q = (f.central_radius() + sum((abs(c) for c in f.perturbation.values()), ZERO)) ** 2
    center = f.center * f.center + q / 2
    central = {i: 2 * f.center * c for i, c in f.central.items() if f.center != 0}
    perturbation = {j: 2 * f.center * c for j, c in f.perturbation.items() if f.center != 0}
    if q != 0:
        central[registry.fresh_central().index] = q / 2
    return AffineForm(center, central, perturbation)


# ----------------------------------------------------- set-level ops

def _col(X: PerturbedAffineSet, i: int | str) -> AffineForm:
    return X.form(i)


def assign_const(
    X: PerturbedAffineSet, target: str, a: ScalarLike, b: ScalarLike
) -> PerturbedAffineSet:
    """Append column target := [a, b]; existing columns unchanged."""
    return X.extended(target, const_form(X.registry, a, b))


def assign_add(X: PerturbedAffineSet, target: str, i: int | str, j: int | str) -> PerturbedAffineSet:
    """Append target := x_i + x_j, exact."""
    return X.extended(target, _col(X, i).add(_col(X, j)))


def assign_scale(
    X: PerturbedAffineSet, target: str, lam: ScalarLike, i: int | str
) -> PerturbedAffineSet:
    """Append target := lam * x_i, exact."""
    return X.extended(target, _col(X, i).scale(lam))


def assign_mul(X: PerturbedAffineSet, target: str, i: int | str, j: int | str) -> PerturbedAffineSet:
    """Append target := x_i * x_j via the linearising product rule."""
    return X.extended(target, mul_form(X.registry, _col(X, i), _col(X, j)))


def square_refined(X: PerturbedAffineSet, target: str, i: int | str) -> PerturbedAffineSet:
    """Append target := x_i * x_i using the one-sided remainder rule."""
    return X.extended(target, square_form(X.registry, _col(X, i)))


# ------------------------------------------------------------- plans

@dataclass(frozen=True)
class StepConst:
    lo: Fraction
    hi: Fraction


@dataclass(frozen=True)
class StepCopy:
    src: int


@dataclass(frozen=True)
class StepAdd:
    left: int
    right: int


@dataclass(frozen=True)
class StepScale:
    factor: Fraction
    src: int


@dataclass(frozen=True)
class StepMul:
    left: int
    right: int


@dataclass(frozen=True)
class StepSquare:
    src: int


PlanStep = StepConst | StepCopy | StepAdd | StepScale | StepMul | StepSquare


@dataclass(frozen=True)
class ExprPlan:
    """Straight-line program over slots: the first len(sources) slots
    are the environment columns, each step defines the next slot."""

    sources: tuple[str, ...]
    steps: tuple[PlanStep, ...]
    result: int


class _PlanBuilder:
    def __init__(self, env: Mapping[str, str] | Sequence[str]) -> None:
        if isinstance(env, Mapping):
            self.bindings = dict(env)
        else:
            self.bindings = {v: v for v in env}
        self.sources: list[str] = []
        self.source_slots: dict[str, int] = {}
        self.steps: list[PlanStep] = []

    def var_slot(self, name: str) -> int:
        if name not in self.bindings:
            raise KeyError(f"unbound variable {name!r}")
        column = self.bindings[name]
        if column not in self.source_slots:
            self.source_slots[column] = len(self.sources)
            self.sources.append(column)
        return self.source_slots[column]

    def emit(self, step: PlanStep) -> int:
        self.steps.append(step)
        return len(self.sources) + len(self.steps) - 1

    def finish(self, result: int) -> ExprPlan:
        if result < len(self.sources):
            result = self.emit(StepCopy(result))
        return ExprPlan(tuple(self.sources), tuple(self.steps), result)


def compile_expr(
    expr: lang.Expr,
    env: Mapping[str, str] | Sequence[str],
    refine_squares: bool = True,
) -> ExprPlan:
    """Compile an expression tree to primitive steps.

    `env` maps source-level names to columns of the abstract value.
    Literal factors of a product are folded into one exact scaling; a
    variable syntactically multiplied by itself becomes a square step
    (the refined rule) unless `refine_squares` is off.  Calls must have
    been resolved by the caller.
    """
    b = _PlanBuilder(env)

    # register every referenced variable up front so that slot numbers
    # of source columns are fixed before any step is emitted
    def register_vars(e: lang.Expr) -> None:
        if isinstance(e, lang.Var):
            b.var_slot(e.name)
        elif isinstance(e, lang.Neg):
            register_vars(e.expr)
        elif isinstance(e, (lang.Add, lang.Sub, lang.Mul)):
            register_vars(e.left)
            register_vars(e.right)
        elif isinstance(e, lang.Call):
            raise ValueError("calls must be inlined before compilation")

    register_vars(expr)

    def product_parts(e: lang.Expr) -> tuple[Fraction, list[lang.Expr]]:
        if isinstance(e, lang.Lit):
            return e.value, []
        if isinstance(e, lang.Neg):
            lam, fs = product_parts(e.expr)
            return -lam, fs
        if isinstance(e, lang.Mul):
            l_lam, l_fs = product_parts(e.left)
            r_lam, r_fs = product_parts(e.right)
            return l_lam * r_lam, l_fs + r_fs
        return Fraction(1), [e]

    def compile_node(e: lang.Expr) -> int:
        if isinstance(e, lang.Lit):
            return b.emit(StepConst(e.value, e.value))
        if isinstance(e, lang.IntervalLit):
            return b.emit(StepConst(e.lo, e.hi))
        if isinstance(e, lang.Var):
            return b.var_slot(e.name)
        if isinstance(e, lang.Add):
            return b.emit(StepAdd(compile_node(e.left), compile_node(e.right)))
        if isinstance(e, lang.Sub):
            left = compile_node(e.left)
            right = compile_node(e.right)
            negated = b.emit(StepScale(Fraction(-1), right))
            return b.emit(StepAdd(left, negated))
        if isinstance(e, (lang.Mul, lang.Neg)):
            lam, factors = product_parts(e)
            if not factors:
                return b.emit(StepConst(lam, lam))
            if (
                refine_squares
                and len(factors) == 2
                and isinstance(factors[0], lang.Var)
                and isinstance(factors[1], lang.Var)
                and factors[0].name == factors[1].name
            ):
                slot = b.emit(StepSquare(b.var_slot(factors[0].name)))
            else:
                slot = compile_node(factors[0])
                for factor in factors[1:]:
                    slot = b.emit(StepMul(slot, compile_node(factor)))
            if lam != 1:
                slot = b.emit(StepScale(lam, slot))
            return slot
        if isinstance(e, lang.Call):
            raise ValueError("calls must be inlined before compilation")
        raise TypeError(f"unknown expression node {e!r}")

    return b.finish(compile_node(expr))


def eval_plan_form(X: PerturbedAffineSet, plan: ExprPlan) -> AffineForm:
    """Run a plan against the columns of X, returning the result form.
    Fresh symbols are drawn from X's registry."""
    slots: list[AffineForm] = [X.form(name) for name in plan.sources]
    reg = X.registry
    for step in plan.steps:
        if isinstance(step, StepConst):
            slots.append(const_form(reg, step.lo, step.hi))
        elif isinstance(step, StepCopy):
            slots.append(slots[step.src])
        elif isinstance(step, StepAdd):
            slots.append(slots[step.left].add(slots[step.right]))
        elif isinstance(step, StepScale):
            slots.append(slots[step.src].scale(step.factor))
        elif isinstance(step, StepMul):
            slots.append(mul_form(reg, slots[step.left], slots[step.right]))
        elif isinstance(step, StepSquare):
            slots.append(square_form(reg, slots[step.src]))
        else:
            raise TypeError(f"unknown step {step!r}")
    return slots[plan.result]


def eval_plan(
    X: PerturbedAffineSet, plan: ExprPlan, target: str = "_result"
) -> PerturbedAffineSet:
    """Evaluate a plan and bind the result column to `target`;
    temporaries never enter the returned set."""
    form = eval_plan_form(X, plan)
    if target in X.vars:
        return X.with_form(target, form)
    return X.extended(target, form)

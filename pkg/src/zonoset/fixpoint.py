"""Kleene-style iteration for loop invariants.

The iterate X_{u+1} = X_u join F(X_u) climbs an ascending chain.  The
stopping test first compares per-axis intervals (cheap), then decides
equivalence exactly; only a proved post-fixed point is ever returned.
Chains whose matrices converge without ever repeating (coefficients
shrinking geometrically, say) are handled by extrapolating a candidate
that keeps the entries stable across the last two iterates, moves the
unstable mass into one fresh perturbation symbol per variable, and is
returned only if the stopping test verifies it.  Iteration is bounded
by a step budget and by a bounding box; leaving either yields top.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

from .core import AffineForm, Interval, PerturbedAffineSet, ZERO
from .join import JoinMode, join_dispatch
from .order import equiv

T = TypeVar("T")

DEFAULT_BOX = Interval.of(-(10**6), 10**6)


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of one analysis run."""

    bounding_box: Interval = DEFAULT_BOX
    var_boxes: dict[str, Interval] = field(default_factory=dict)
    max_iterations: int = 100
    join_mode: JoinMode = JoinMode.NABLA
    initial_unfold: int = 0
    cyclic_unfold: int = 1
    order_cap: int = 12

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.cyclic_unfold < 1:
            raise ValueError("cyclic_unfold must be at least 1")

    def box_for(self, var: str) -> Interval:
        return self.var_boxes.get(var, self.bounding_box)

    def with_mode(self, mode: JoinMode) -> "AnalysisConfig":
        return replace(self, join_mode=mode)


@dataclass(frozen=True)
class FixpointResult:
    value: PerturbedAffineSet
    iterations: int
    stabilized: bool
    escaped: bool = False
    accelerated: bool = False


def _axis_contained(X_next: PerturbedAffineSet, X_u: PerturbedAffineSet) -> bool:
    if not (X_next.is_regular and X_u.is_regular):
        return False
    return all(
        fu.interval().contains_interval(fn.interval())
        for fu, fn in zip(X_u.forms, X_next.forms)
    )


def stop_test(X_u: PerturbedAffineSet, X_next: PerturbedAffineSet) -> bool:
    """Two-stage stabilisation check for an ascending step.

    Stage 1 requires every axis interval of the new iterate to fit in
    the old one; only then stage 2 decides equivalence (equal central
    matrices and geometrically equal perturbation zonotopes, so fresh
    perturbation symbols with zero net effect do not matter).
    """
    if not (X_u.is_regular and X_next.is_regular):
        return equiv(X_u, X_next)
    if not _axis_contained(X_next, X_u):
        return False
    return equiv(X_u, X_next)


def box_escape(X: PerturbedAffineSet, config: AnalysisConfig) -> bool:
    """True when some axis interval leaves its bounding box."""
    if not X.is_regular:
        return False
    return any(
        not config.box_for(v).contains_interval(f.interval())
        for v, f in zip(X.vars, X.forms)
    )


def _stable_projection(
    X_u: PerturbedAffineSet, X_next: PerturbedAffineSet
) -> PerturbedAffineSet:
    """Limit candidate for a chain with stable axis intervals: keep the
    coefficients the last two iterates agree on, absorb the rest into
    one fresh perturbation symbol per variable.  The candidate is an
    upper bound of the iterate by construction (the fresh coefficient
    equals exactly the dropped mass)."""
    reg = X_next.registry
    forms: list[AffineForm] = []
    fresh_needed: list[Fraction] = []
    kept_forms: list[tuple[dict[int, Fraction], dict[int, Fraction]]] = []
    for fu, fn in zip(X_u.forms, X_next.forms):
        central = {i: c for i, c in fn.central.items() if fu.central.get(i, ZERO) == c}
        pert = {j: c for j, c in fn.perturbation.items() if fu.perturbation.get(j, ZERO) == c}
        kept = sum((abs(c) for c in central.values()), ZERO) + sum((abs(c) for c in pert.values()), ZERO)
        kept_forms.append((central, pert))
        fresh_needed.append(fn.radius - kept)
    for fn, (central, pert), fresh in zip(X_next.forms, kept_forms, fresh_needed):
        pert = dict(pert)
        if fresh != 0:
            pert[reg.fresh_perturbation().index] = fresh
        forms.append(AffineForm(fn.center, central, pert))
    return PerturbedAffineSet.of(X_next.vars, tuple(forms), reg)


def kleene_iterate(
    F: Callable[[PerturbedAffineSet], PerturbedAffineSet],
    bottom: PerturbedAffineSet,
    config: AnalysisConfig,
) -> FixpointResult:
    """Iterate X_{u+1} = X_u join F(X_u) from bottom.

    Returns the first iterate passing the stopping test (a post-fixed
    point of F), or top when an iterate leaves the bounding box or the
    iteration budget runs out.  When intervals stabilise but the
    matrices keep drifting, a verified limit candidate is tried; it is
    only returned if the stopping test accepts it.
    """
    X = bottom
    top = PerturbedAffineSet.top(bottom.vars, bottom.registry)
    for u in range(1, config.max_iterations + 1):
        FX = F(X)
        X_next = join_dispatch(X, FX, config.join_mode)
        if X_next.is_top:
            return FixpointResult(top, u, stabilized=False)
        if box_escape(X_next, config):
            return FixpointResult(top, u, stabilized=False, escaped=True)
        if X.is_bottom and X_next.is_bottom:
            return FixpointResult(X_next, u, stabilized=True)
        if not X.is_bottom:
            if stop_test(X, X_next):
                return FixpointResult(X_next, u, stabilized=True)
            if _axis_contained(X_next, X):
                candidate = _stable_projection(X, X_next)
                FC = F(candidate)
                widened = join_dispatch(candidate, FC, config.join_mode)
                if (
                    not widened.is_top
                    and not box_escape(widened, config)
                    and stop_test(candidate, widened)
                ):
                    return FixpointResult(widened, u, stabilized=True, accelerated=True)
        X = X_next
    return FixpointResult(top, config.max_iterations, stabilized=False)


@dataclass(frozen=True)
class UnfoldedLoop:
    """Initial unfolding peels whole body copies in front of the loop;
    cyclic unfolding sequences the body several times per iteration."""

    peeled: tuple[tuple[T, ...], ...]
    body: tuple[T, ...]


def unfold(body: Sequence[T], config: AnalysisConfig) -> UnfoldedLoop:
    base = tuple(body)
    peeled = tuple(base for _ in range(config.initial_unfold))
    cycled = base * config.cyclic_unfold
    return UnfoldedLoop(peeled, cycled)

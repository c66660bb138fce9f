"""Zonotopic abstract domain for numerical invariants and input/output
relations, with a toy-language analyzer on top."""

from .core import (
    AffineForm,
    Interval,
    PerturbedAffineSet,
    SymbolId,
    SymbolKind,
    SymbolRegistry,
    Zonotope2D,
    canonical_generators,
    fresh_symbol,
    gamma_interval,
    linear_norm,
    project_2d,
    support,
    vertices,
)
from .order import (
    OrderVerdict,
    Verdict,
    concretization_leq_2d,
    equiv,
    leq_exact,
    leq_sampled,
    order_defect,
)
from .transfer import (
    ExprPlan,
    assign_add,
    assign_const,
    assign_mul,
    assign_scale,
    compile_expr,
    eval_plan,
    square_refined,
)
from .join import JoinMode, argmin_interval, join_dispatch, mub_join, nabla_join
from .fixpoint import AnalysisConfig, FixpointResult, kleene_iterate, stop_test, unfold
from .lang import ParseError, parse
from .analyzer import AnalysisError, Report, analyze, emit_report
from .svg import emit_svg

__all__ = [
    "AffineForm",
    "AnalysisConfig",
    "AnalysisError",
    "ExprPlan",
    "FixpointResult",
    "Interval",
    "JoinMode",
    "OrderVerdict",
    "ParseError",
    "PerturbedAffineSet",
    "Report",
    "SymbolId",
    "SymbolKind",
    "SymbolRegistry",
    "Verdict",
    "Zonotope2D",
    "analyze",
    "argmin_interval",
    "assign_add",
    "assign_const",
    "assign_mul",
    "assign_scale",
    "canonical_generators",
    "compile_expr",
    "concretization_leq_2d",
    "emit_report",
    "emit_svg",
    "equiv",
    "eval_plan",
    "fresh_symbol",
    "gamma_interval",
    "join_dispatch",
    "kleene_iterate",
    "leq_exact",
    "leq_sampled",
    "linear_norm",
    "mub_join",
    "nabla_join",
    "order_defect",
    "parse",
    "project_2d",
    "square_refined",
    "stop_test",
    "support",
    "unfold",
    "vertices",
]

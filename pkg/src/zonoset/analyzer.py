"""Forward analysis driver and report generation.

Declarations allocate input ranges, assignments evaluate compiled
expression plans, both branches of a conditional are analysed from the
same input state and joined (guards carry no meaning), loops run the
Kleene engine, and calls are inlined with the callee's frame mapped to
fresh columns.  Each labelled program point stores the full abstract
value reaching it; reports render those as intervals plus the central
and perturbation coefficients, and rank the central symbols of every
function's return value by influence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import lang
from .core import (
    AffineForm,
    Interval,
    PerturbedAffineSet,
    SymbolRegistry,
    fmt,
)
from .fixpoint import AnalysisConfig, box_escape, kleene_iterate, unfold
from .join import join_dispatch
from .order import Verdict, leq_exact
from .transfer import assign_const, compile_expr, eval_plan_form


class AnalysisError(Exception):
    pass


class _TopSignal(Exception):
    """Raised when an inlined call yields top mid-expression."""


@dataclass(frozen=True)
class VarAbstract:
    """Rendering of one variable at one point."""

    interval: Interval
    central: dict[int, Fraction]
    perturbation: dict[int, Fraction]
    unbounded: bool = False

    @staticmethod
    def from_form(f: AffineForm) -> "VarAbstract":
        return VarAbstract(f.interval(), dict(f.central), dict(f.perturbation))


@dataclass(frozen=True)
class ReportPoint:
    label: str
    vars: dict[str, VarAbstract]
    state: PerturbedAffineSet
    columns: dict[str, str]


@dataclass(frozen=True)
class ReturnInfo:
    path: str
    value: VarAbstract
    form: AffineForm
    sensitivity: tuple[tuple[int, Fraction], ...]  # central index, coefficient


@dataclass
class Report:
    points: list[ReportPoint] = field(default_factory=list)
    returns: dict[str, ReturnInfo] = field(default_factory=dict)
    loops: dict[str, int] = field(default_factory=dict)
    verified: dict[str, bool | None] = field(default_factory=dict)
    stabilized: bool = True
    top: bool = False

    def point(self, label: str) -> ReportPoint:
        for pt in self.points:
            if pt.label == label:
                return pt
        raise KeyError(f"no point labelled {label!r}")

    @property
    def status(self) -> dict:
        return {
            "stabilized": self.stabilized and not self.top,
            "top": self.top,
            "loops": dict(self.loops),
            "verified": dict(self.verified),
        }


def _sensitivity(f: AffineForm) -> tuple[tuple[int, Fraction], ...]:
    ranked = sorted(f.central.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    return tuple(ranked)


@dataclass
class _Frame:
    func: str
    path: str
    rename: dict[str, str] = field(default_factory=dict)
    defined: set[str] = field(default_factory=set)
    sites: dict[int, int] = field(default_factory=dict)
    temps: int = 0

    def column(self, name: str) -> str:
        return name if self.path == "main" else f"{self.path}.{name}"


class _Analysis:
    def __init__(self, prog: lang.Program, config: AnalysisConfig) -> None:
        self.prog = prog
        self.config = config
        self.registry = SymbolRegistry()
        self.report = Report()

    # ---------------------------------------------------------- entry

    def run(self) -> Report:
        main = self.prog.main
        if main.params:
            raise AnalysisError("main takes no parameters")
        state = PerturbedAffineSet.of((), (), self.registry)
        frame = _Frame("main", "main", sites=lang.call_sites(main))
        self.exec_function(state, main, frame, args=(), record=True)
        return self.report

    # ------------------------------------------------------ recording

    def record(self, label: str, state: PerturbedAffineSet, frame: _Frame,
               extra: dict[str, AffineForm] | None = None) -> None:
        vars_out: dict[str, VarAbstract] = {}
        columns: dict[str, str] = {}
        if state.is_top:
            names = sorted(frame.defined)
            for name in names:
                box = self.config.box_for(name)
                vars_out[name] = VarAbstract(box, {}, {}, unbounded=True)
                columns[name] = frame.column(name)
        else:
            for name in sorted(frame.defined):
                col = frame.rename.get(name, frame.column(name))
                if col in state.vars:
                    vars_out[name] = VarAbstract.from_form(state.form(col))
                    columns[name] = col
        for name, form in (extra or {}).items():
            vars_out[name] = VarAbstract.from_form(form)
        self.report.points.append(ReportPoint(label, vars_out, state, columns))

    # ------------------------------------------------------ functions

    def exec_function(
        self,
        state: PerturbedAffineSet,
        func: lang.FunDef,
        frame: _Frame,
        args: tuple[AffineForm, ...],
        record: bool,
    ) -> tuple[PerturbedAffineSet, AffineForm | None]:
        if len(args) != len(func.params):
            raise AnalysisError(f"{func.name} expects {len(func.params)} argument(s)")
        for name, form in zip(func.params, args):
            col = frame.column(name)
            frame.rename[name] = col
            frame.defined.add(name)
            state = state.extended(col, form)
        body = list(func.body)
        ret_expr: lang.Return | None = None
        if body and isinstance(body[-1], lang.Return):
            ret_expr = body[-1]
            body = body[:-1]
        for stmt in body:
            if isinstance(stmt, lang.Return):
                raise AnalysisError("return must be the last statement of a function")
            state = self.exec_stmt(state, stmt, frame, record)
        ret_form: AffineForm | None = None
        if ret_expr is not None:
            if not state.is_top:
                try:
                    state, ret_form = self.eval_expr(state, ret_expr.expr, frame, record)
                except _TopSignal:
                    state = PerturbedAffineSet.top(state.vars, self.registry)
            if state.is_top:
                self.report.top = True
                if record:
                    self.record(f"{frame.path}:{ret_expr.line}", state, frame)
            else:
                assert ret_form is not None
                info = ReturnInfo(
                    frame.path,
                    VarAbstract.from_form(ret_form),
                    ret_form,
                    _sensitivity(ret_form),
                )
                self.report.returns[frame.path] = info
                if record:
                    self.record(
                        f"{frame.path}:{ret_expr.line}",
                        state,
                        frame,
                        extra={"ret": ret_form},
                    )
        return state, ret_form

    # ----------------------------------------------------- statements

    def exec_stmts(
        self,
        state: PerturbedAffineSet,
        stmts: tuple[lang.Stmt, ...],
        frame: _Frame,
        record: bool,
    ) -> PerturbedAffineSet:
        for stmt in stmts:
            state = self.exec_stmt(state, stmt, frame, record)
        return state

    def exec_stmt(
        self,
        state: PerturbedAffineSet,
        stmt: lang.Stmt,
        frame: _Frame,
        record: bool,
    ) -> PerturbedAffineSet:
        if state.is_top:
            if isinstance(stmt, (lang.Decl, lang.Assign)):
                frame.defined.add(stmt.name)
            if record:
                self.record(f"{frame.path}:{stmt.line}", state, frame)
            return state

        if isinstance(stmt, lang.Decl):
            col = frame.column(stmt.name)
            if stmt.name in frame.rename and frame.rename[stmt.name] in state.vars:
                raise AnalysisError(f"variable {stmt.name!r} declared twice")
            frame.rename[stmt.name] = col
            if stmt.bounds is not None:
                state = assign_const(state, col, stmt.bounds[0], stmt.bounds[1])
                frame.defined.add(stmt.name)
            if record:
                self.record(f"{frame.path}:{stmt.line}", state, frame)
            return state

        if isinstance(stmt, lang.Assign):
            if stmt.name not in frame.rename:
                raise AnalysisError(f"assignment to undeclared variable {stmt.name!r}")
            try:
                state, form = self.eval_expr(state, stmt.expr, frame, record)
            except _TopSignal:
                self.report.top = True
                top = PerturbedAffineSet.top(state.vars, self.registry)
                frame.defined.add(stmt.name)
                if record:
                    self.record(f"{frame.path}:{stmt.line}", top, frame)
                return top
            col = frame.rename[stmt.name]
            if col in state.vars:
                state = state.with_form(col, form)
            else:
                state = state.extended(col, form)
            frame.defined.add(stmt.name)
            if record:
                self.record(f"{frame.path}:{stmt.line}", state, frame)
            return state

        if isinstance(stmt, lang.If):
            rename0 = dict(frame.rename)
            defined0 = set(frame.defined)
            then_state = self.exec_stmts(state, stmt.then, frame, record)
            defined_then = set(frame.defined)
            frame.rename = dict(rename0)
            frame.defined = set(defined0)
            else_state = self.exec_stmts(state, stmt.orelse, frame, record)
            defined_else = set(frame.defined)
            frame.rename = rename0
            # variables declared before the branch and first assigned in
            # both arms survive the join; arm-local declarations do not
            newly = {
                n
                for n in (defined_then & defined_else) - defined0
                if n in rename0
            }
            frame.defined = defined0 | newly
            keep = list(state.vars) + [rename0[n] for n in sorted(newly)]
            then_state = self._scope_to(then_state, keep)
            else_state = self._scope_to(else_state, keep)
            joined = join_dispatch(then_state, else_state, self.config.join_mode)
            if joined.is_top:
                self.report.top = True
            if record:
                self.record(f"{frame.path}:{stmt.line}:join", joined, frame)
            return joined

        if isinstance(stmt, lang.While):
            return self.exec_while(state, stmt, frame, record)

        if isinstance(stmt, lang.Return):
            raise AnalysisError("return must be the last statement of a function")

        raise TypeError(f"unknown statement {stmt!r}")

    def _scope_back(
        self, state: PerturbedAffineSet, before: PerturbedAffineSet
    ) -> PerturbedAffineSet:
        """Drop columns introduced by a nested scope."""
        return self._scope_to(state, before.vars)

    def _scope_to(self, state: PerturbedAffineSet, keep) -> PerturbedAffineSet:
        if not state.is_regular:
            return (
                PerturbedAffineSet.top(tuple(keep), self.registry)
                if state.is_top
                else PerturbedAffineSet.bottom(tuple(keep), self.registry)
            )
        if state.vars == tuple(keep):
            return state
        return state.restricted(keep)

    # ----------------------------------------------------------- loops

    def exec_while(
        self,
        state: PerturbedAffineSet,
        stmt: lang.While,
        frame: _Frame,
        record: bool,
    ) -> PerturbedAffineSet:
        label = f"{frame.path}:{stmt.line}:head"
        entry = state
        plan = unfold(stmt.body, self.config)

        def body_pass(
            X: PerturbedAffineSet, body: tuple[lang.Stmt, ...], record_pass: bool = False
        ) -> PerturbedAffineSet:
            """One body execution with the frame's scope maps restored
            afterwards (body-local names die with each pass)."""
            rename0, defined0 = dict(frame.rename), set(frame.defined)
            try:
                return self.exec_stmts(X, body, frame, record_pass)
            finally:
                frame.rename, frame.defined = rename0, defined0

        head_states = [entry]
        current = entry
        for copy in plan.peeled:
            current = self._scope_back(body_pass(current, copy), entry)
            if current.is_top or box_escape(current, self.config):
                return self._loop_top(label, frame, entry, record)
            head_states.append(current)
        seed = current
        loop_vars = seed.vars

        def step(X: PerturbedAffineSet, body: tuple[lang.Stmt, ...]) -> PerturbedAffineSet:
            if X.is_bottom:
                return X
            return self._scope_back(body_pass(X, body), seed)

        def functional(X: PerturbedAffineSet) -> PerturbedAffineSet:
            if X.is_bottom:
                return seed
            body_out = step(X, plan.body)
            if body_out.is_top:
                return body_out
            return join_dispatch(seed, body_out, self.config.join_mode)

        bottom = PerturbedAffineSet.bottom(loop_vars, self.registry)
        result = kleene_iterate(functional, bottom, self.config)
        self.report.loops[label] = result.iterations
        if not result.stabilized:
            self.report.stabilized = False
        if result.value.is_top:
            return self._loop_top(label, frame, entry, record)

        invariant = result.value
        # head states the unfolded iteration does not represent directly:
        # intermediate original-body steps under cyclic unfolding, and the
        # states reached while peeling
        cover = invariant
        partial = invariant
        for _ in range(1, self.config.cyclic_unfold):
            partial = step(partial, stmt.body)
            if partial.is_top:
                return self._loop_top(label, frame, entry, record)
            cover = join_dispatch(cover, partial, self.config.join_mode)
        for s in head_states[:-1]:
            cover = join_dispatch(cover, s, self.config.join_mode)
        if cover.is_top or box_escape(cover, self.config):
            return self._loop_top(label, frame, entry, record)

        self.report.verified[label] = self._verify(functional, invariant)
        if record:
            self.record(label, cover, frame)
            # one more body pass from the sound head invariant labels the
            # inner points with states covering every iteration
            body_pass(cover, stmt.body, record_pass=True)
        return cover

    def _verify(self, functional, invariant: PerturbedAffineSet) -> bool | None:
        n = len(invariant.central_symbols())
        m = len(invariant.perturbation_symbols())
        if n + m > self.config.order_cap:
            return None
        image = functional(invariant)
        if image.is_top:
            return False
        verdict = leq_exact(image, invariant, cap=self.config.order_cap)
        if verdict.result is Verdict.UNKNOWN:
            return None
        return verdict.result is Verdict.LESS_OR_EQUAL

    def _loop_top(
        self,
        label: str,
        frame: _Frame,
        entry: PerturbedAffineSet,
        record: bool,
    ) -> PerturbedAffineSet:
        self.report.top = True
        top = PerturbedAffineSet.top(entry.vars, self.registry)
        if record:
            self.record(label, top, frame)
        return top

    # ----------------------------------------------------- expressions

    def eval_expr(
        self,
        state: PerturbedAffineSet,
        expr: lang.Expr,
        frame: _Frame,
        record: bool,
    ) -> tuple[PerturbedAffineSet, AffineForm]:
        temps: dict[str, str] = {}
        state, resolved = self._resolve_calls(state, expr, frame, temps, record)
        env = dict(frame.rename)
        env.update(temps)
        plan = compile_expr(resolved, env)
        for col in plan.sources:
            if col not in state.vars:
                source = next(
                    (n for n, c in env.items() if c == col), col
                )
                raise AnalysisError(f"read of uninitialised variable {source!r}")
        form = eval_plan_form(state, plan)
        if temps:
            state = state.restricted([v for v in state.vars if v not in set(temps.values())])
        return state, form

    def _resolve_calls(
        self,
        state: PerturbedAffineSet,
        expr: lang.Expr,
        frame: _Frame,
        temps: dict[str, str],
        record: bool,
    ) -> tuple[PerturbedAffineSet, lang.Expr]:
        if isinstance(expr, lang.Call):
            arg_forms: list[AffineForm] = []
            for a in expr.args:
                state, form = self.eval_expr(state, a, frame, record)
                arg_forms.append(form)
            site = frame.sites[id(expr)]
            path = f"{frame.path}>{expr.name}@{site}"
            callee = self.prog.functions[expr.name]
            child = _Frame(expr.name, path, sites=lang.call_sites(callee))
            before = state
            state, ret = self.exec_function(
                state, callee, child, tuple(arg_forms), record
            )
            if state.is_top:
                raise _TopSignal()
            if ret is None:
                raise AnalysisError(f"function {expr.name!r} does not return a value")
            state = self._scope_back(state, before)
            frame.temps += 1
            alias = f"__call{frame.temps}"
            col = f"{frame.path}${alias}"
            temps[alias] = col
            state = state.extended(col, ret)
            return state, lang.Var(alias)
        if isinstance(expr, lang.Neg):
            state, inner = self._resolve_calls(state, expr.expr, frame, temps, record)
            return state, lang.Neg(inner)
        if isinstance(expr, (lang.Add, lang.Sub, lang.Mul)):
            state, left = self._resolve_calls(state, expr.left, frame, temps, record)
            state, right = self._resolve_calls(state, expr.right, frame, temps, record)
            return state, type(expr)(left, right)
        return state, expr


def analyze(prog: lang.Program, config: AnalysisConfig | None = None) -> Report:
    """Run the forward analysis of a parsed program."""
    return _Analysis(prog, config or AnalysisConfig()).run()


# ------------------------------------------------------------ reports

def _interval_json(iv: Interval) -> list[str]:
    return [fmt(iv.lo), fmt(iv.hi)]


def _var_json(info: VarAbstract) -> dict:
    out = {
        "interval": _interval_json(info.interval),
        "interval_approx": [float(info.interval.lo), float(info.interval.hi)],
        "central": {f"e{i}": fmt(c) for i, c in sorted(info.central.items())},
        "perturbation": {f"n{j}": fmt(c) for j, c in sorted(info.perturbation.items())},
    }
    if info.unbounded:
        out["unbounded"] = True
    return out


def emit_report(report: Report, format: str = "text") -> str:
    """Render a report as `text`, `json` or `csv`."""
    if format == "json":
        doc = {
            "points": [
                {"label": pt.label, "vars": {n: _var_json(v) for n, v in pt.vars.items()}}
                for pt in report.points
            ],
            "status": {
                **report.status,
                "returns": {
                    path: {
                        "interval": _interval_json(info.value.interval),
                        "sensitivity": [
                            [f"e{i}", fmt(c)] for i, c in info.sensitivity
                        ],
                    }
                    for path, info in report.returns.items()
                },
            },
        }
        return json.dumps(doc, indent=2)

    if format == "csv":
        lines = ["point,var,lo,hi"]
        for pt in report.points:
            for name, info in sorted(pt.vars.items()):
                lines.append(
                    f"{pt.label},{name},{fmt(info.interval.lo)},{fmt(info.interval.hi)}"
                )
        return "\n".join(lines) + "\n"

    if format == "text":
        lines: list[str] = []
        for pt in report.points:
            lines.append(f"point {pt.label}")
            for name, info in sorted(pt.vars.items()):
                mark = "  (unbounded)" if info.unbounded else ""
                lines.append(f"  {name} ∈ {info.interval}{mark}")
                detail = _coeff_detail(info)
                if detail:
                    lines.append(f"      {detail}")
        if report.returns:
            lines.append("returns")
            for path, info in report.returns.items():
                lines.append(f"  {path}: ret ∈ {info.value.interval}")
                if info.sensitivity:
                    ranked = ", ".join(
                        f"ε{i}: {fmt(c)}" for i, c in info.sensitivity
                    )
                    lines.append(f"      sensitivity {ranked}")
        st = report.status
        lines.append(
            "status "
            + ("top" if st["top"] else ("stabilized" if st["stabilized"] else "cut"))
        )
        for label, count in st["loops"].items():
            verified = st["verified"].get(label)
            suffix = "" if verified is None else f", verified={verified}"
            lines.append(f"  loop {label}: {count} iteration(s){suffix}")
        return "\n".join(lines) + "\n"

    raise ValueError(f"unknown report format {format!r}")


def _coeff_detail(info: VarAbstract) -> str:
    parts = []
    for i, c in sorted(info.central.items()):
        parts.append(f"ε{i}: {fmt(c)}")
    for j, c in sorted(info.perturbation.items()):
        parts.append(f"η{j}: {fmt(c)}")
    return "  ".join(parts)

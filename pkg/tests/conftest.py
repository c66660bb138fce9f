"""Shared test helpers: seeded random abstract values, brute-force
oracles, and a concrete rational interpreter of the toy language that
mirrors the analyzer's program-point labels."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from zonoset import lang
from zonoset.core import (
    AffineForm,
    PerturbedAffineSet,
    SymbolRegistry,
)


# ---------------------------------------------------- random builders

def rand_fraction(rng: random.Random, span: int = 3, max_den: int = 4) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(-span * den, span * den), den)


def rand_sparse(rng: random.Random, ids: list[int], span: int = 3) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for i in ids:
        if rng.random() < 0.6:
            c = rand_fraction(rng, span)
            if c != 0:
                out[i] = c
    return out


def rand_form(
    rng: random.Random, eps: list[int], eta: list[int], span: int = 3
) -> AffineForm:
    return AffineForm(
        rand_fraction(rng, span), rand_sparse(rng, eps, span), rand_sparse(rng, eta, span)
    )


def rand_set(
    rng: random.Random,
    registry: SymbolRegistry,
    p: int,
    eps: list[int],
    eta: list[int],
    span: int = 3,
) -> PerturbedAffineSet:
    names = tuple(f"v{i}" for i in range(p))
    forms = tuple(rand_form(rng, eps, eta, span) for _ in range(p))
    return PerturbedAffineSet.of(names, forms, registry)


def fresh_pools(registry: SymbolRegistry, n: int, m: int) -> tuple[list[int], list[int]]:
    eps = [registry.fresh_central().index for _ in range(n)]
    eta = [registry.fresh_perturbation().index for _ in range(m)]
    return eps, eta


def inflate(rng: random.Random, X: PerturbedAffineSet, rows: int = 1) -> PerturbedAffineSet:
    """An upper bound of X: the same central part with extra
    perturbation rows (each on a fresh symbol)."""
    forms = list(X.forms)
    for _ in range(rows):
        sym = X.registry.fresh_perturbation()
        for k in range(len(forms)):
            c = rand_fraction(rng, 2)
            if c != 0:
                pert = dict(forms[k].perturbation)
                pert[sym.index] = c
                forms[k] = AffineForm(forms[k].center, forms[k].central, pert)
    return PerturbedAffineSet.of(X.vars, tuple(forms), X.registry)


def aligned(op, X: PerturbedAffineSet, Y: PerturbedAffineSet):
    """Apply the same abstract operator to two comparable states with
    identical fresh-symbol numbering (as at one program point)."""
    reg = X.registry
    save = (reg.next_central, reg.next_perturbation)
    RX = op(X)
    reg.next_central, reg.next_perturbation = save
    RY = op(Y)
    return RX, RY


# ------------------------------------------------------------ oracles

def all_rows(X: PerturbedAffineSet) -> list[tuple[Fraction, ...]]:
    rows = []
    for i in X.central_symbols():
        rows.append(tuple(f.central.get(i, Fraction(0)) for f in X.forms))
    for j in X.perturbation_symbols():
        rows.append(tuple(f.perturbation.get(j, Fraction(0)) for f in X.forms))
    return rows


def brute_support(X: PerturbedAffineSet, t) -> tuple[Fraction, Fraction]:
    """Exact support interval of <t, x> by enumerating all sign vectors
    of the noise symbols (rows limited to around ten)."""
    t = [Fraction(v) for v in t]
    mid = sum(f.center * tv for f, tv in zip(X.forms, t))
    rows = all_rows(X)
    assert len(rows) <= 12, "brute force oracle meant for small instances"
    dots = [sum(r * tv for r, tv in zip(row, t)) for row in rows]
    best = Fraction(0)
    for signs in product((1, -1), repeat=len(dots)):
        v = sum(s * d for s, d in zip(signs, dots))
        best = max(best, v)
    return mid - best, mid + best


def interval_kleene(entry, body, max_iter=100):
    """Interval-domain loop iteration: the oracle for fixpoint tests.
    entry and body work on (lo, hi) pairs of Fractions."""
    x = entry
    for _ in range(max_iter):
        lo, hi = body(x)
        nxt = (min(x[0], lo), max(x[1], hi))
        if nxt == x:
            return x
        x = nxt
    raise AssertionError("interval iteration did not stabilise")


# ---------------------------------------------- concrete interpreter

class ConcreteError(Exception):
    pass


@dataclass
class Trace:
    entries: list[tuple[str, dict[str, Fraction]]] = field(default_factory=list)

    def add(self, label: str, values: dict[str, Fraction]) -> None:
        self.entries.append((label, dict(values)))


def run_concrete(prog: lang.Program, sample, loop_cap: int = 10000) -> Trace:
    """Execute a program with exact rationals, drawing each declared
    interval's value from `sample(key, lo, hi)`.  Point labels mirror
    the analyzer: `<path>:<line>` after declarations, assignments and
    returns, `:join` after a conditional, `:head` at loop-head visits."""
    trace = Trace()
    lit_counter = [0]

    def eval_expr(e: lang.Expr, env: dict[str, Fraction], path: str, func: lang.FunDef):
        if isinstance(e, lang.Lit):
            return e.value
        if isinstance(e, lang.IntervalLit):
            lit_counter[0] += 1
            return sample(f"{path}#lit{lit_counter[0]}", e.lo, e.hi)
        if isinstance(e, lang.Var):
            if e.name not in env:
                raise ConcreteError(f"read of unset variable {e.name}")
            return env[e.name]
        if isinstance(e, lang.Neg):
            return -eval_expr(e.expr, env, path, func)
        if isinstance(e, lang.Add):
            return eval_expr(e.left, env, path, func) + eval_expr(e.right, env, path, func)
        if isinstance(e, lang.Sub):
            return eval_expr(e.left, env, path, func) - eval_expr(e.right, env, path, func)
        if isinstance(e, lang.Mul):
            return eval_expr(e.left, env, path, func) * eval_expr(e.right, env, path, func)
        if isinstance(e, lang.Call):
            args = [eval_expr(a, env, path, func) for a in e.args]
            site = lang.call_sites(func)[id(e)]
            callee = prog.functions[e.name]
            return exec_function(callee, f"{path}>{e.name}@{site}", args)
        raise TypeError(e)

    def eval_cond(c: lang.Cond, env, path, func) -> bool:
        l = eval_expr(c.left, env, path, func)
        r = eval_expr(c.right, env, path, func)
        return {
            "<": l < r,
            ">": l > r,
            "<=": l <= r,
            ">=": l >= r,
            "==": l == r,
            "!=": l != r,
        }[c.op]

    def exec_stmts(stmts, env, path, func):
        for s in stmts:
            exec_stmt(s, env, path, func)

    def exec_stmt(s: lang.Stmt, env, path, func):
        if isinstance(s, lang.Decl):
            if s.bounds is not None:
                env[s.name] = sample(f"{path}:{s.name}", s.bounds[0], s.bounds[1])
            trace.add(f"{path}:{s.line}", env)
        elif isinstance(s, lang.Assign):
            env[s.name] = eval_expr(s.expr, env, path, func)
            trace.add(f"{path}:{s.line}", env)
        elif isinstance(s, lang.If):
            if eval_cond(s.cond, env, path, func):
                exec_stmts(s.then, env, path, func)
            else:
                exec_stmts(s.orelse, env, path, func)
            trace.add(f"{path}:{s.line}:join", env)
        elif isinstance(s, lang.While):
            trace.add(f"{path}:{s.line}:head", env)
            steps = 0
            while eval_cond(s.cond, env, path, func):
                exec_stmts(s.body, env, path, func)
                trace.add(f"{path}:{s.line}:head", env)
                steps += 1
                if steps > loop_cap:
                    raise ConcreteError("concrete loop exceeded its step budget")
        elif isinstance(s, lang.Return):
            raise ConcreteError("return must be the last statement")
        else:
            raise TypeError(s)

    def exec_function(func: lang.FunDef, path: str, args):
        env: dict[str, Fraction] = dict(zip(func.params, args))
        body = list(func.body)
        ret = None
        if body and isinstance(body[-1], lang.Return):
            ret = body[-1]
            body = body[:-1]
        exec_stmts(tuple(body), env, path, func)
        if ret is None:
            return None
        value = eval_expr(ret.expr, env, path, func)
        trace.add(f"{path}:{ret.line}", {**env, "ret": value})
        return value

    exec_function(prog.main, "main", [])
    return trace


def make_sampler(rng: random.Random, grid: int = 16):
    """Uniform rational sampler over [lo, hi], endpoints included."""

    def sample(key: str, lo: Fraction, hi: Fraction) -> Fraction:
        k = rng.randint(0, grid)
        return lo + (hi - lo) * Fraction(k, grid)

    return sample


def assert_trace_sound(report, trace: Trace) -> None:
    """Every observed concrete value must lie in the reported interval
    at the matching program point."""
    by_label: dict[str, object] = {}
    for pt in report.points:
        by_label.setdefault(pt.label, pt)
    for label, values in trace.entries:
        pt = by_label.get(label)
        assert pt is not None, f"concrete point {label} missing from report"
        for name, value in values.items():
            info = pt.vars.get(name)
            if info is None or info.unbounded:
                continue
            assert info.interval.contains(value), (
                f"{label}: {name}={value} outside {info.interval}"
            )

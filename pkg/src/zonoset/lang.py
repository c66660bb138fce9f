"""Toy imperative language: AST and recursive-descent parser.

Programs are lists of function definitions with one entry `main`.
Declarations may carry an interval (`float x in [-1,1];` or with the
membership sign), assignments use +, -, * and calls; `/` is accepted
only between numeric literals and folded at parse time.  Guards of if
and while are parsed but carry no abstract meaning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {col})" if line else message)
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class IntervalLit:
    lo: Fraction
    hi: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    expr: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Lit | IntervalLit | Var | Neg | Add | Sub | Mul | Call


@dataclass(frozen=True)
class Cond:
    left: Expr
    op: str
    right: Expr


@dataclass(frozen=True)
class Decl:
    name: str
    bounds: tuple[Fraction, Fraction] | None
    line: int


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr
    line: int


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]
    line: int


@dataclass(frozen=True)
class While:
    cond: Cond
    body: tuple["Stmt", ...]
    line: int


@dataclass(frozen=True)
class Return:
    expr: Expr
    line: int


Stmt = Decl | Assign | If | While | Return


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    line: int


@dataclass(frozen=True)
class Program:
    functions: dict[str, FunDef] = field(default_factory=dict)

    @property
    def main(self) -> FunDef:
        return self.functions["main"]


# ---------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op><=|>=|==|!=|∈|[-+*/<>=(){}\[\],;])
    """,
    re.VERBOSE,
)

KEYWORDS = {"float", "if", "else", "while", "return", "in"}


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, IDENT, keyword or operator text
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup == "number":
            tokens.append(Token("NUMBER", text, line, col))
        elif m.lastgroup == "ident":
            kind = text if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, line, col))
        elif m.lastgroup == "op":
            kind = "in" if text == "∈" else text
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ------------------------------------------------------------- parser

class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def eat(self, kind: str) -> Token:
        t = self.tok
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, got {t.text!r}", t.line, t.col)
        self.pos += 1
        return t

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    # program level -------------------------------------------------

    def program(self) -> Program:
        funcs: dict[str, FunDef] = {}
        while not self.at("EOF"):
            f = self.fundef()
            if f.name in funcs:
                raise ParseError(f"function {f.name!r} defined twice", f.line, 0)
            funcs[f.name] = f
        if "main" not in funcs:
            raise ParseError("no main function")
        prog = Program(funcs)
        _check_calls(prog)
        return prog

    def fundef(self) -> FunDef:
        start = self.eat("float")
        name = self.eat("IDENT").text
        self.eat("(")
        params: list[str] = []
        if not self.at(")"):
            while True:
                self.eat("float")
                params.append(self.eat("IDENT").text)
                if self.at(","):
                    self.eat(",")
                else:
                    break
        self.eat(")")
        body = self.block()
        return FunDef(name, tuple(params), body, start.line)

    def block(self) -> tuple[Stmt, ...]:
        self.eat("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.extend(self.statement())
        self.eat("}")
        return tuple(stmts)

    def stmt_or_block(self) -> tuple[Stmt, ...]:
        if self.at("{"):
            return self.block()
        return tuple(self.statement())

    def statement(self) -> list[Stmt]:
        t = self.tok
        if t.kind == "float":
            return self.declaration()
        if t.kind == "if":
            self.eat("if")
            self.eat("(")
            cond = self.condition()
            self.eat(")")
            then = self.stmt_or_block()
            orelse: tuple[Stmt, ...] = ()
            if self.at("else"):
                self.eat("else")
                orelse = self.stmt_or_block()
            return [If(cond, then, orelse, t.line)]
        if t.kind == "while":
            self.eat("while")
            self.eat("(")
            cond = self.condition()
            self.eat(")")
            body = self.stmt_or_block()
            return [While(cond, body, t.line)]
        if t.kind == "return":
            self.eat("return")
            e = self.expr()
            self.eat(";")
            return [Return(e, t.line)]
        if t.kind == "IDENT":
            name = self.eat("IDENT").text
            self.eat("=")
            e = self.expr()
            self.eat(";")
            return [Assign(name, e, t.line)]
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)

    def declaration(self) -> list[Stmt]:
        start = self.eat("float")
        decls: list[Stmt] = []
        while True:
            name = self.eat("IDENT").text
            bounds = None
            if self.at("in"):
                self.eat("in")
                bounds = self.interval()
            decls.append(Decl(name, bounds, start.line))
            if self.at(","):
                self.eat(",")
            else:
                break
        self.eat(";")
        return decls

    def interval(self) -> tuple[Fraction, Fraction]:
        self.eat("[")
        lo = self.signed_number()
        self.eat(",")
        hi = self.signed_number()
        self.eat("]")
        if lo > hi:
            raise ParseError(f"empty interval [{lo}, {hi}]", self.tok.line, self.tok.col)
        return lo, hi

    def signed_number(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.eat("-")
            sign = -1
        t = self.eat("NUMBER")
        return sign * Fraction(t.text)

    def condition(self) -> Cond:
        left = self.expr()
        t = self.tok
        if t.kind not in ("<", ">", "<=", ">=", "==", "!="):
            raise ParseError(f"expected comparison, got {t.text!r}", t.line, t.col)
        self.eat(t.kind)
        right = self.expr()
        return Cond(left, t.kind, right)

    # expressions ----------------------------------------------------

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.eat(self.tok.kind).kind
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            t = self.tok
            op = self.eat(self.tok.kind).kind
            rhs = self.unary()
            if op == "*":
                node = Mul(node, rhs)
            else:
                if isinstance(node, Lit) and isinstance(rhs, Lit):
                    if rhs.value == 0:
                        raise ParseError("division by zero literal", t.line, t.col)
                    node = Lit(node.value / rhs.value)
                else:
                    raise ParseError(
                        "division is only supported between numeric literals",
                        t.line,
                        t.col,
                    )
        return node

    def unary(self) -> Expr:
        if self.at("-"):
            self.eat("-")
            inner = self.unary()
            if isinstance(inner, Lit):
                return Lit(-inner.value)
            return Neg(inner)
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "NUMBER":
            self.eat("NUMBER")
            return Lit(Fraction(t.text))
        if t.kind == "[":
            lo, hi = self.interval()
            return IntervalLit(lo, hi)
        if t.kind == "(":
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "IDENT":
            name = self.eat("IDENT").text
            if self.at("("):
                self.eat("(")
                args: list[Expr] = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if self.at(","):
                            self.eat(",")
                        else:
                            break
                self.eat(")")
                return Call(name, tuple(args))
            return Var(name)
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)


def _calls_in(e: Expr) -> list[Call]:
    if isinstance(e, Call):
        return [e] + [c for a in e.args for c in _calls_in(a)]
    if isinstance(e, Neg):
        return _calls_in(e.expr)
    if isinstance(e, (Add, Sub, Mul)):
        return _calls_in(e.left) + _calls_in(e.right)
    return []


def _stmt_calls(stmts: tuple[Stmt, ...]) -> list[Call]:
    out: list[Call] = []
    for s in stmts:
        if isinstance(s, Assign):
            out.extend(_calls_in(s.expr))
        elif isinstance(s, Return):
            out.extend(_calls_in(s.expr))
        elif isinstance(s, If):
            out.extend(_stmt_calls(s.then))
            out.extend(_stmt_calls(s.orelse))
        elif isinstance(s, While):
            out.extend(_stmt_calls(s.body))
    return out


def _check_calls(prog: Program) -> None:
    """Callees must exist with matching arity, and the call graph must
    be acyclic (calls are inlined)."""
    edges: dict[str, set[str]] = {}
    for name, f in prog.functions.items():
        callees = set()
        for c in _stmt_calls(f.body):
            callee = prog.functions.get(c.name)
            if callee is None:
                raise ParseError(f"call to undefined function {c.name!r}")
            if len(callee.params) != len(c.args):
                raise ParseError(
                    f"{c.name!r} takes {len(callee.params)} argument(s), got {len(c.args)}"
                )
            callees.add(c.name)
        edges[name] = callees

    state: dict[str, int] = {}

    def visit(u: str) -> None:
        if state.get(u) == 1:
            raise ParseError(f"recursion detected through {u!r}")
        if state.get(u) == 2:
            return
        state[u] = 1
        for v in edges[u]:
            visit(v)
        state[u] = 2

    for name in prog.functions:
        visit(name)


def call_sites(func: FunDef) -> dict[int, int]:
    """Stable numbering of the call sites of a function body: maps
    id(call node) to a 1-based index in a fixed left-to-right walk.
    Analysis and any mirroring interpreter must share this numbering so
    that inlined program points get identical labels."""
    out: dict[int, int] = {}

    def walk_expr(e: Expr) -> None:
        if isinstance(e, Call):
            for a in e.args:
                walk_expr(a)
            out[id(e)] = len(out) + 1
        elif isinstance(e, Neg):
            walk_expr(e.expr)
        elif isinstance(e, (Add, Sub, Mul)):
            walk_expr(e.left)
            walk_expr(e.right)

    def walk_stmts(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                walk_expr(s.expr)
            elif isinstance(s, Return):
                walk_expr(s.expr)
            elif isinstance(s, If):
                walk_stmts(s.then)
                walk_stmts(s.orelse)
            elif isinstance(s, While):
                walk_stmts(s.body)

    walk_stmts(func.body)
    return out


def parse(source: str) -> Program:
    """Parse a program; raises ParseError with line/column on bad input."""
    if not source.strip():
        raise ParseError("no main function")
    return _Parser(tokenize(source)).program()

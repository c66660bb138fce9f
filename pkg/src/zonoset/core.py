"""Representation of (perturbed) affine sets over exact rationals.

An abstract value for p program variables is a tuple of affine forms

    x_k  =  c0 + sum_i c_i * eps_i + sum_j p_j * eta_j

where the noise symbols eps_i (central) and eta_j (perturbation) range
over [-1, 1].  Central symbols carry input/output meaning; perturbation
symbols only express uncertainty introduced by control-flow merges.

Geometrically a tuple of forms concretises to a zonotope: the module
provides per-axis intervals, support functions in arbitrary directions,
2D projections with exact vertex enumeration, and a canonical form for
generator matrices (unique up to the symmetries of a zonotope).

All coefficients are `fractions.Fraction`; every operation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Mapping, Sequence, Union

Scalar = Fraction
ScalarLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x: ScalarLike) -> Fraction:
    """Convert ints, rational strings ("3/4") or decimal strings ("1.5")
    to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class SymbolKind(Enum):
    CENTRAL = "eps"
    PERTURBATION = "eta"


@dataclass(frozen=True, eq=True)
class SymbolId:
    """A noise symbol: eps_i (central) or eta_j (perturbation)."""

    kind: SymbolKind
    index: int

    def __str__(self) -> str:
        prefix = "ε" if self.kind is SymbolKind.CENTRAL else "η"
        return f"{prefix}{self.index}"


@dataclass
class SymbolRegistry:
    """Allocator of noise-symbol indices, monotone per kind.

    One registry per analysis; abstract values built against it share a
    common symbol space so they can be compared and joined.
    """

    next_central: int = 1
    next_perturbation: int = 1

    def fresh(self, kind: SymbolKind) -> SymbolId:
        if kind is SymbolKind.CENTRAL:
            idx = self.next_central
            self.next_central += 1
        else:
            idx = self.next_perturbation
            self.next_perturbation += 1
        return SymbolId(kind, idx)

    def fresh_central(self) -> SymbolId:
        return self.fresh(SymbolKind.CENTRAL)

    def fresh_perturbation(self) -> SymbolId:
        return self.fresh(SymbolKind.PERTURBATION)


def fresh_symbol(registry: SymbolRegistry, kind: SymbolKind) -> SymbolId:
    """Allocate a new symbol id, strictly greater than all previous ones
    of the same kind."""
    return registry.fresh(kind)


@dataclass(frozen=True)
class Interval:
    """Closed rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval: [{self.lo}, {self.hi}]")

    @staticmethod
    def of(lo: ScalarLike, hi: ScalarLike) -> "Interval":
        return Interval(rat(lo), rat(hi))

    @staticmethod
    def point(v: ScalarLike) -> "Interval":
        v = rat(v)
        return Interval(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, v: ScalarLike) -> bool:
        v = rat(v)
        return self.lo <= v <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self) -> str:
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


def fmt(x: Fraction) -> str:
    """Render a rational: integers without denominator, else num/den."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _clean(coeffs: Mapping[int, Fraction]) -> dict[int, Fraction]:
    return {i: c for i, c in coeffs.items() if c != 0}


@dataclass(frozen=True)
class AffineForm:
    """One column of a perturbed affine set: the form for one variable.

    `central` maps eps indices to coefficients, `perturbation` maps eta
    indices; zero coefficients are never stored.
    """

    center: Fraction = ZERO
    central: Mapping[int, Fraction] = field(default_factory=dict)
    perturbation: Mapping[int, Fraction] = field(default_factory=dict)

    @staticmethod
    def make(
        center: ScalarLike = 0,
        central: Mapping[int, ScalarLike] | None = None,
        perturbation: Mapping[int, ScalarLike] | None = None,
    ) -> "AffineForm":
        return AffineForm(
            rat(center),
            _clean({i: rat(c) for i, c in (central or {}).items()}),
            _clean({j: rat(c) for j, c in (perturbation or {}).items()}),
        )

    @staticmethod
    def constant(v: ScalarLike) -> "AffineForm":
        return AffineForm(rat(v), {}, {})

    @property
    def radius(self) -> Fraction:
        return sum((abs(c) for c in self.central.values()), ZERO) + sum(
            (abs(c) for c in self.perturbation.values()), ZERO
        )

    def interval(self) -> Interval:
        r = self.radius
        return Interval(self.center - r, self.center + r)

    def central_radius(self) -> Fraction:
        return sum((abs(c) for c in self.central.values()), ZERO)

    def evaluate(
        self,
        central_values: Mapping[int, Fraction],
        perturbation_values: Mapping[int, Fraction],
    ) -> Fraction:
        """Concrete value at a point of the noise-symbol cube."""
        v = self.center
        for i, c in self.central.items():
            v += c * central_values.get(i, ZERO)
        for j, c in self.perturbation.items():
            v += c * perturbation_values.get(j, ZERO)
        return v

    def add(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(
            self.center + other.center,
            _merge(self.central, other.central),
            _merge(self.perturbation, other.perturbation),
        )

    def scale(self, lam: ScalarLike) -> "AffineForm":
        lam = rat(lam)
        if lam == 0:
            return AffineForm(ZERO, {}, {})
        return AffineForm(
            lam * self.center,
            {i: lam * c for i, c in self.central.items()},
            {j: lam * c for j, c in self.perturbation.items()},
        )

    def __str__(self) -> str:
        parts = [fmt(self.center)]
        for i in sorted(self.central):
            parts.append(f"{fmt_signed(self.central[i])}ε{i}")
        for j in sorted(self.perturbation):
            parts.append(f"{fmt_signed(self.perturbation[j])}η{j}")
        return " ".join(parts)


def fmt_signed(x: Fraction) -> str:
    s = fmt(abs(x))
    coeff = "" if abs(x) == 1 else f"{s}·"
    return ("+ " if x >= 0 else "- ") + coeff


def _merge(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> dict[int, Fraction]:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, ZERO) + v
        if s == 0:
            out.pop(k, None)
        else:
            out[k] = s
    return out


@dataclass(frozen=True)
class PerturbedAffineSet:
    """Abstract value: one affine form per program variable, plus
    explicit bottom/top flags.

    Values are immutable; operations return new sets.  The registry is
    shared by all values of one analysis and is the only mutable piece.
    """

    vars: tuple[str, ...]
    forms: tuple[AffineForm, ...]
    registry: SymbolRegistry
    is_bottom: bool = False
    is_top: bool = False

    def __post_init__(self) -> None:
        if self.is_bottom and self.is_top:
            raise ValueError("a value cannot be both bottom and top")
        if not (self.is_bottom or self.is_top) and len(self.vars) != len(self.forms):
            raise ValueError("one form per variable required")

    @staticmethod
    def bottom(vars: Sequence[str], registry: SymbolRegistry) -> "PerturbedAffineSet":
        return PerturbedAffineSet(tuple(vars), (), registry, is_bottom=True)

    @staticmethod
    def top(vars: Sequence[str], registry: SymbolRegistry) -> "PerturbedAffineSet":
        return PerturbedAffineSet(tuple(vars), (), registry, is_top=True)

    @staticmethod
    def of(
        vars: Sequence[str],
        forms: Sequence[AffineForm],
        registry: SymbolRegistry,
    ) -> "PerturbedAffineSet":
        return PerturbedAffineSet(tuple(vars), tuple(forms), registry)

    @property
    def is_regular(self) -> bool:
        return not (self.is_bottom or self.is_top)

    @property
    def dim(self) -> int:
        return len(self.vars)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def form(self, k: int | str) -> AffineForm:
        if not self.is_regular:
            raise ValueError("bottom/top has no forms")
        if isinstance(k, str):
            k = self.index(k)
        return self.forms[k]

    def with_form(self, k: int | str, f: AffineForm) -> "PerturbedAffineSet":
        if isinstance(k, str):
            k = self.index(k)
        forms = list(self.forms)
        forms[k] = f
        return PerturbedAffineSet(self.vars, tuple(forms), self.registry)

    def extended(self, name: str, f: AffineForm) -> "PerturbedAffineSet":
        if name in self.vars:
            raise ValueError(f"variable {name!r} already present")
        return PerturbedAffineSet(
            self.vars + (name,), self.forms + (f,), self.registry
        )

    def restricted(self, names: Sequence[str]) -> "PerturbedAffineSet":
        """Project onto a subset of variables (change of scope)."""
        if not self.is_regular:
            return PerturbedAffineSet(
                tuple(names), (), self.registry, self.is_bottom, self.is_top
            )
        forms = tuple(self.form(n) for n in names)
        return PerturbedAffineSet(tuple(names), forms, self.registry)

    def renamed(self, mapping: Mapping[str, str]) -> "PerturbedAffineSet":
        new_vars = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(new_vars)) != len(new_vars):
            raise ValueError("renaming must stay injective")
        return PerturbedAffineSet(
            new_vars, self.forms, self.registry, self.is_bottom, self.is_top
        )

    def central_symbols(self) -> list[int]:
        out: set[int] = set()
        for f in self.forms:
            out.update(f.central)
        return sorted(out)

    def perturbation_symbols(self) -> list[int]:
        out: set[int] = set()
        for f in self.forms:
            out.update(f.perturbation)
        return sorted(out)

    def central_matrix(self, symbol_order: Sequence[int] | None = None) -> list[list[Fraction]]:
        """Dense central matrix: first row holds the centers, then one
        row per eps index (given order, default: sorted symbols in use)."""
        order = list(symbol_order) if symbol_order is not None else self.central_symbols()
        rows = [[f.center for f in self.forms]]
        for i in order:
            rows.append([f.central.get(i, ZERO) for f in self.forms])
        return rows

    def perturbation_matrix(self, symbol_order: Sequence[int] | None = None) -> list[list[Fraction]]:
        order = list(symbol_order) if symbol_order is not None else self.perturbation_symbols()
        return [[f.perturbation.get(j, ZERO) for f in self.forms] for j in order]

    def __str__(self) -> str:
        if self.is_bottom:
            return "⊥"
        if self.is_top:
            return "⊤"
        return "; ".join(f"{v} = {f}" for v, f in zip(self.vars, self.forms))


@dataclass(frozen=True)
class Zonotope2D:
    """A zonotope projected onto two variables: center plus generator
    segments, used for geometric checks and figure export."""

    center: tuple[Fraction, Fraction]
    generators: tuple[tuple[Fraction, Fraction], ...]


def gamma_interval(
    X: PerturbedAffineSet,
    k: int | str,
    top_box: Interval | None = None,
) -> Interval | None:
    """Per-axis concretisation of variable k.

    Bottom yields None (the empty-interval signal); top yields the
    supplied bounding box, and is an error without one.
    """
    if X.is_bottom:
        return None
    if X.is_top:
        if top_box is None:
            raise ValueError("top concretisation needs a bounding box")
        return top_box
    return X.form(k).interval()


def linear_norm(rows: Sequence[Sequence[Fraction]], t: Sequence[Fraction]) -> Fraction:
    """Sum over rows of |<row, t>|, the l1 norm of M t."""
    total = ZERO
    for row in rows:
        if len(row) != len(t):
            raise ValueError("dimension mismatch")
        total += abs(sum(a * b for a, b in zip(row, t)))
    return total


def support(X: PerturbedAffineSet, t: Sequence[ScalarLike]) -> Interval:
    """Range of <t, x> over the concretisation: center term plus/minus
    the l1 norms of the deviation matrices applied to t."""
    if not X.is_regular:
        raise ValueError("support of bottom/top is undefined")
    tv = [rat(v) for v in t]
    if len(tv) != X.dim:
        raise ValueError("dimension mismatch")
    mid = sum(f.center * v for f, v in zip(X.forms, tv))
    r = support_radius(X, tv)
    return Interval(mid - r, mid + r)


def support_radius(X: PerturbedAffineSet, t: Sequence[Fraction]) -> Fraction:
    """Deviation of <t, x> around the center: ||C' t||_1 + ||P t||_1
    with C' the central matrix without its center row."""
    r = ZERO
    for i in X.central_symbols():
        r += abs(sum(f.central.get(i, ZERO) * v for f, v in zip(X.forms, t)))
    for j in X.perturbation_symbols():
        r += abs(sum(f.perturbation.get(j, ZERO) * v for f, v in zip(X.forms, t)))
    return r


def canonical_generators(
    rows: Iterable[Sequence[Fraction]],
) -> tuple[tuple[Fraction, ...], ...]:
    """Canonical form of a generator matrix.

    Zero rows are dropped, each row is sign-normalised (first nonzero
    entry positive), parallel rows are merged by summing magnitudes, and
    rows are sorted lexicographically.  The generated zonotope is
    preserved, and two matrices generate the same zonotope iff their
    canonical forms are equal.
    """
    merged: dict[tuple[Fraction, ...], Fraction] = {}
    for row in rows:
        row = tuple(row)
        pivot = next((c for c in row if c != 0), None)
        if pivot is None:
            continue
        scale = abs(pivot)
        direction = tuple(c / pivot for c in row)
        if pivot < 0:
            # dividing by the (negative) pivot already flipped the sign
            pass
        merged[direction] = merged.get(direction, ZERO) + scale
    out = [tuple(scale * d for d in direction) for direction, scale in merged.items()]
    out.sort()
    return tuple(out)


def generator_rows_2d(
    X: PerturbedAffineSet, k1: int | str, k2: int | str
) -> list[tuple[Fraction, Fraction]]:
    if isinstance(k1, str):
        k1 = X.index(k1)
    if isinstance(k2, str):
        k2 = X.index(k2)
    f1, f2 = X.forms[k1], X.forms[k2]
    rows: list[tuple[Fraction, Fraction]] = []
    for i in X.central_symbols():
        rows.append((f1.central.get(i, ZERO), f2.central.get(i, ZERO)))
    for j in X.perturbation_symbols():
        rows.append((f1.perturbation.get(j, ZERO), f2.perturbation.get(j, ZERO)))
    return rows


def project_2d(X: PerturbedAffineSet, k1: int | str, k2: int | str) -> Zonotope2D:
    """Project onto the plane of two distinct variables."""
    if not X.is_regular:
        raise ValueError("cannot project bottom/top")
    i1 = X.index(k1) if isinstance(k1, str) else k1
    i2 = X.index(k2) if isinstance(k2, str) else k2
    if i1 == i2:
        raise ValueError("projection needs two distinct variables")
    center = (X.forms[i1].center, X.forms[i2].center)
    return Zonotope2D(center, tuple(generator_rows_2d(X, i1, i2)))


def _angle_cmp(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> int:
    # both generators lie in the (strict) upper half-plane or on the
    # positive x-axis; the cross product orders them by angle
    cross = a[0] * b[1] - a[1] * b[0]
    if cross > 0:
        return -1
    if cross < 0:
        return 1
    return 0


def vertices(Z: Zonotope2D) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the projected zonotope, counter-clockwise, starting
    at the lexicographically smallest vertex.

    Generators are normalised to the upper half-plane and sorted by
    angle; walking them from the bottom vertex traces one half of the
    boundary, central symmetry gives the other half.
    """
    gens = [g for g in canonical_generators(Z.generators)]
    cx, cy = Z.center
    if not gens:
        return [(cx, cy)]
    half: list[tuple[Fraction, Fraction]] = []
    for gx, gy in gens:
        if gy < 0 or (gy == 0 and gx < 0):
            gx, gy = -gx, -gy
        half.append((gx, gy))
    half.sort(key=cmp_to_key(_angle_cmp))
    sx = sum(g[0] for g in half)
    sy = sum(g[1] for g in half)
    v = (cx - sx, cy - sy)
    path = [v]
    for gx, gy in half:
        v = (v[0] + 2 * gx, v[1] + 2 * gy)
        path.append(v)
    if len(half) == 1:
        verts = path
    else:
        verts = path + [(2 * cx - x, 2 * cy - y) for x, y in path[1:-1]]
    start = verts.index(min(verts))
    return verts[start:] + verts[:start]

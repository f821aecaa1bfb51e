"""Immutable abstract syntax for terms, formulas, programs and problems.

Every node carries an optional source ``span`` that is ignored by equality
and hashing, so structurally identical trees compare equal regardless of
where they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Iterator, Optional, Tuple, Union

REAL = "R"
EPS_PREFIX = "eps_"


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, hash=False, repr=False, kw_only=True)


class Node:
    """Common helpers; subclasses are frozen dataclasses."""

    __slots__ = ()

    def children(self) -> tuple:
        out = []
        for f in fields(self):
            if f.name == "span":
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                out.append(v)
            elif isinstance(v, tuple):
                out.extend(x for x in v if isinstance(x, Node))
        return tuple(out)

    def map_children(self, fn):
        """Rebuild the node with ``fn`` applied to each direct child node."""
        changes = {}
        for f in fields(self):
            if f.name == "span":
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                nv = fn(v)
                if nv is not v:
                    changes[f.name] = nv
            elif isinstance(v, tuple) and any(isinstance(x, Node) for x in v):
                nv = tuple(fn(x) if isinstance(x, Node) else x for x in v)
                if any(a is not b for a, b in zip(nv, v)):
                    changes[f.name] = nv
        return replace(self, **changes) if changes else self

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children()))


# ---------------------------------------------------------------- terms


class Term(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Num(Term):
    value: Fraction
    span: Optional[Span] = _span()

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Fn(Term):
    name: str
    args: Tuple[Term, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Minus(Term):
    left: Term
    right: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Times(Term):
    left: Term
    right: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Neg(Term):
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Pow(Term):
    base: Term
    exp: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cond(Term):
    cond: "Formula"
    then: Term
    orelse: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Upd(Term):
    """Value of ``term`` after running the deterministic update ``prog``."""

    prog: "QAssign"
    term: Term
    span: Optional[Span] = _span()


ARITH = (Plus, Minus, Times, Neg, Pow, Num)

# ------------------------------------------------------------- formulas


class Formula(Node):
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FalseF(Formula):
    span: Optional[Span] = _span()


TRUE = TrueF()
FALSE = FalseF()

CMP_OPS = ("=", "!=", ">=", ">", "<=", "<")


@dataclass(frozen=True)
class Cmp(Formula):
    op: str
    left: Term
    right: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Imply(Formula):
    left: Formula
    right: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Equiv(Formula):
    left: Formula
    right: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Box(Formula):
    prog: "Program"
    body: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Diamond(Formula):
    prog: "Program"
    body: Formula
    span: Optional[Span] = _span()


Quant = (Forall, Exists)
Modal = (Box, Diamond)
BINARY = (And, Or, Imply, Equiv)

# ------------------------------------------------------------- programs


class Program(Node):
    __slots__ = ()


@dataclass(frozen=True)
class Eqn(Node):
    """``lhs := rhs`` in an assignment, ``lhs' = rhs`` in an ODE."""

    lhs: Fn
    rhs: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class QAssign(Program):
    qvar: Optional[str]
    sort: Optional[str]
    eqns: Tuple[Eqn, ...]
    span: Optional[Span] = _span()

    @property
    def symbols(self) -> tuple:
        return tuple(e.lhs.name for e in self.eqns)


@dataclass(frozen=True)
class QOde(Program):
    qvar: Optional[str]
    sort: Optional[str]
    eqns: Tuple[Eqn, ...]
    domain: Formula = TRUE
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Test(Program):
    cond: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Seq(Program):
    left: Program
    right: Program
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Star(Program):
    body: Program
    label: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NewAssign(Program):
    target: Fn
    sort: str
    span: Optional[Span] = _span()


AnyNode = Union[Term, Formula, Program]

# ------------------------------------------------------------ signature


@dataclass(frozen=True)
class FuncDecl:
    name: str
    args: Tuple[str, ...]
    result: str


def eps_name(sort: str) -> str:
    return EPS_PREFIX + sort


def eps(term: Term, sort: str) -> Fn:
    return Fn(eps_name(sort), (term,))


def created(term: Term, sort: str) -> Cmp:
    """The actualist guard ``eps_C(term) = 1``."""
    return Cmp("=", eps(term, sort), Num(1))


@dataclass(frozen=True)
class Signature:
    sorts: Tuple[str, ...] = ()
    functions: Tuple[FuncDecl, ...] = ()
    variables: Tuple[Tuple[str, str], ...] = ()
    velocities: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_funcs", {f.name: f for f in self.all_functions()})
        object.__setattr__(self, "_vars", dict(self.variables))

    def all_functions(self):
        for s in self.sorts:
            yield FuncDecl(eps_name(s), (s,), REAL)
        yield from self.functions

    def func(self, name: str) -> Optional[FuncDecl]:
        return self._funcs.get(name)

    def var(self, name: str) -> Optional[str]:
        return self._vars.get(name)

    def velocity_of(self, name: str) -> Optional[str]:
        return dict(self.velocities).get(name)

    def is_sort(self, name: str) -> bool:
        return name == REAL or name in self.sorts

    def with_function(self, decl: FuncDecl) -> "Signature":
        return replace(self, functions=self.functions + (decl,))

    def with_variable(self, name: str, sort: str) -> "Signature":
        return replace(self, variables=self.variables + ((name, sort),))

    def names(self) -> set:
        return set(self._funcs) | set(self._vars) | set(self.sorts)


@dataclass(frozen=True)
class Annotation:
    kind: str  # "invariant" | "variant"
    label: Optional[str]
    formula: Formula
    var: Optional[str] = None


@dataclass(frozen=True)
class Problem:
    signature: Signature
    conjecture: Formula
    annotations: Tuple[Annotation, ...] = ()
    macros: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    def hint(self, kind: str, label: Optional[str]) -> Optional[Annotation]:
        for a in self.annotations:
            if a.kind == kind and a.label == label:
                return a
        for a in self.annotations:
            if a.kind == kind and a.label is None:
                return a
        return None


# ------------------------------------------------------------- helpers


def strip_spans(node):
    """Copy of ``node`` with every span removed (used for hashing/printing)."""
    if not isinstance(node, Node):
        return node
    n = node.map_children(strip_spans)
    if getattr(n, "span", None) is not None:
        n = replace(n, span=None)
    return n


def conj(parts) -> Formula:
    parts = [p for p in parts if not isinstance(p, TrueF)]
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts) -> Formula:
    parts = [p for p in parts if not isinstance(p, FalseF)]
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def seq(progs) -> Program:
    progs = list(progs)
    out = progs[-1]
    for p in reversed(progs[:-1]):
        out = Seq(p, out)
    return out

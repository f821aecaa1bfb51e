"""Real-arithmetic formulas: atoms ``p rel 0`` under boolean connectives.

Atoms are kept normalized (integer primitive polynomial, positive leading
coefficient), so equal constraints are recognised syntactically.  The
smart constructors :func:`mk_and` / :func:`mk_or` merge atoms over the
same polynomial through their sets of admissible signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .poly import Poly

# admissible signs of p for each relation
SIGNS = {
    "=": frozenset({0}),
    "!=": frozenset({-1, 1}),
    ">": frozenset({1}),
    ">=": frozenset({0, 1}),
    "<": frozenset({-1}),
    "<=": frozenset({-1, 0}),
}
REL_OF = {v: k for k, v in SIGNS.items()}
NEGATE = {"=": "!=", "!=": "=", ">": "<=", ">=": "<", "<": ">=", "<=": ">"}
FLIP = {"=": "=", "!=": "!=", ">": "<", ">=": "<=", "<": ">", "<=": ">="}


class QF:
    __slots__ = ()


@dataclass(frozen=True)
class TT(QF):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class FF(QF):
    def __str__(self):
        return "false"


TRUE = TT()
FALSE = FF()


@dataclass(frozen=True)
class Atom(QF):
    poly: Poly
    rel: str

    def __str__(self):
        return f"{self.poly} {self.rel} 0"


@dataclass(frozen=True)
class AndQ(QF):
    args: Tuple[QF, ...]

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class OrQ(QF):
    args: Tuple[QF, ...]

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class NotQ(QF):
    arg: QF

    def __str__(self):
        return f"!{self.arg}"


@dataclass(frozen=True)
class ExQ(QF):
    var: str
    body: QF

    def __str__(self):
        return f"(exists {self.var}. {self.body})"


@dataclass(frozen=True)
class AllQ(QF):
    var: str
    body: QF

    def __str__(self):
        return f"(forall {self.var}. {self.body})"


def _sign(c: Fraction) -> int:
    return (c > 0) - (c < 0)


def atom(p: Poly, rel: str) -> QF:
    """Normalized atom ``p rel 0``; constant atoms are evaluated."""
    if p.is_const():
        return TRUE if _sign(p.const_value()) in SIGNS[rel] else FALSE
    q, s = p.primitive()
    return Atom(q, rel if s > 0 else FLIP[rel])


def cmp_atom(lhs: Poly, rel: str, rhs: Poly) -> QF:
    return atom(lhs - rhs, rel)


def _combine(args, is_and: bool) -> QF:
    unit, zero = (TT, FF) if is_and else (FF, TT)
    cls = AndQ if is_and else OrQ
    flat = []
    for a in args:
        if isinstance(a, zero):
            return a
        if isinstance(a, unit):
            continue
        if isinstance(a, cls):
            flat.extend(a.args)
        else:
            flat.append(a)
    # merge atoms over identical polynomials via sign sets
    signs = {}
    order = []
    others = []
    seen = set()
    for a in flat:
        if isinstance(a, Atom):
            s = SIGNS[a.rel]
            if a.poly in signs:
                signs[a.poly] = (signs[a.poly] & s) if is_and else (signs[a.poly] | s)
            else:
                signs[a.poly] = s
                order.append(a.poly)
        elif a not in seen:
            seen.add(a)
            others.append(a)
    out = []
    for p in order:
        s = signs[p]
        if not s:
            if is_and:
                return FALSE
            continue
        if len(s) == 3:
            if not is_and:
                return TRUE
            continue
        out.append(Atom(p, REL_OF[s]))
    out.extend(others)
    if not out:
        return unit()
    if len(out) == 1:
        return out[0]
    return cls(tuple(out))


def mk_and(*args) -> QF:
    if len(args) == 1 and not isinstance(args[0], QF):
        args = tuple(args[0])
    return _combine(args, True)


def mk_or(*args) -> QF:
    if len(args) == 1 and not isinstance(args[0], QF):
        args = tuple(args[0])
    return _combine(args, False)


def mk_not(f: QF) -> QF:
    return nnf(f, negate=True)


def nnf(f: QF, negate: bool = False) -> QF:
    """Negation normal form; negations are absorbed into atoms."""
    if isinstance(f, TT):
        return FALSE if negate else TRUE
    if isinstance(f, FF):
        return TRUE if negate else FALSE
    if isinstance(f, Atom):
        return Atom(f.poly, NEGATE[f.rel]) if negate else f
    if isinstance(f, NotQ):
        return nnf(f.arg, not negate)
    if isinstance(f, AndQ):
        parts = [nnf(a, negate) for a in f.args]
        return mk_or(parts) if negate else mk_and(parts)
    if isinstance(f, OrQ):
        parts = [nnf(a, negate) for a in f.args]
        return mk_and(parts) if negate else mk_or(parts)
    if isinstance(f, ExQ):
        body = nnf(f.body, negate)
        return AllQ(f.var, body) if negate else ExQ(f.var, body)
    if isinstance(f, AllQ):
        body = nnf(f.body, negate)
        return ExQ(f.var, body) if negate else AllQ(f.var, body)
    raise TypeError(f)


def free_vars(f: QF) -> set:
    if isinstance(f, Atom):
        return f.poly.vars()
    if isinstance(f, (AndQ, OrQ)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, NotQ):
        return free_vars(f.arg)
    if isinstance(f, (ExQ, AllQ)):
        return free_vars(f.body) - {f.var}
    return set()


def is_quantifier_free(f: QF) -> bool:
    if isinstance(f, (ExQ, AllQ)):
        return False
    if isinstance(f, (AndQ, OrQ)):
        return all(is_quantifier_free(a) for a in f.args)
    if isinstance(f, NotQ):
        return is_quantifier_free(f.arg)
    return True


def atoms(f: QF):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (AndQ, OrQ)):
        for a in f.args:
            yield from atoms(a)
    elif isinstance(f, NotQ):
        yield from atoms(f.arg)
    elif isinstance(f, (ExQ, AllQ)):
        yield from atoms(f.body)


def holds(f: QF, env) -> bool:
    """Exact truth value of a quantifier-free formula under a full assignment."""
    if isinstance(f, TT):
        return True
    if isinstance(f, FF):
        return False
    if isinstance(f, Atom):
        return _sign(f.poly.evaluate(env)) in SIGNS[f.rel]
    if isinstance(f, AndQ):
        return all(holds(a, env) for a in f.args)
    if isinstance(f, OrQ):
        return any(holds(a, env) for a in f.args)
    if isinstance(f, NotQ):
        return not holds(f.arg, env)
    raise ValueError("quantified formula: use qe first")


def eval_ground(f: QF) -> bool:
    """Decide a variable-free formula exactly."""
    if free_vars(f) or not is_quantifier_free(f):
        raise ValueError("eval_ground needs a closed quantifier-free formula")
    return holds(f, {})


def map_atoms(f: QF, fn) -> QF:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, AndQ):
        return mk_and([map_atoms(a, fn) for a in f.args])
    if isinstance(f, OrQ):
        return mk_or([map_atoms(a, fn) for a in f.args])
    if isinstance(f, NotQ):
        return mk_not(map_atoms(f.arg, fn))
    if isinstance(f, ExQ):
        return ExQ(f.var, map_atoms(f.body, fn))
    if isinstance(f, AllQ):
        return AllQ(f.var, map_atoms(f.body, fn))
    return f


def size(f: QF) -> int:
    if isinstance(f, (AndQ, OrQ)):
        return 1 + sum(size(a) for a in f.args)
    if isinstance(f, (NotQ,)):
        return 1 + size(f.arg)
    if isinstance(f, (ExQ, AllQ)):
        return 1 + size(f.body)
    return 1

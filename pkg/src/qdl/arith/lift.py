"""Translation between QdL formulas and real-arithmetic formulas.

Non-arithmetic real-valued subterms (function applications, update
terms) are abstracted by fresh variables; identical occurrences share one
variable.  The abstraction is undone by :func:`from_qf`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional

from ..errors import ObjectSortAtom, QeInapplicable
from ..subst import free_vars as ast_free_vars
from ..syntax import ast as A
from ..syntax.desugar import desugar_conditional
from ..syntax.printer import term_str
from ..syntax.typecheck import sort_of
from .poly import Poly
from .qf import FALSE, TRUE, AllQ, ExQ, QF, atom, mk_and, mk_not, mk_or

ALIEN_PREFIX = "#"


@dataclass
class Abstraction:
    """Fresh variable <-> abstracted term."""

    var_of: Dict[A.Term, str] = field(default_factory=dict)
    term_of: Dict[str, A.Term] = field(default_factory=dict)

    def var_for(self, t: A.Term) -> str:
        key = A.strip_spans(t)
        v = self.var_of.get(key)
        if v is None:
            v = ALIEN_PREFIX + term_str(key)
            self.var_of[key] = v
            self.term_of[v] = key
        return v


class _Lift:
    def __init__(self, sig: A.Signature, ab: Abstraction,
                 object_eval: Optional[Callable[[A.Cmp], Optional[bool]]], alien_key=None):
        self.sig = sig
        self.ab = ab
        self.object_eval = object_eval
        self.alien_key = alien_key or (lambda t: t)

    def term(self, t: A.Term, bound: frozenset) -> Poly:
        if isinstance(t, A.Num):
            return Poly.const(t.value)
        if isinstance(t, A.Var):
            if t.sort != A.REAL:
                raise ObjectSortAtom(f"object-sorted variable {t.name} in arithmetic")
            return Poly.var(t.name)
        if isinstance(t, A.Plus):
            return self.term(t.left, bound) + self.term(t.right, bound)
        if isinstance(t, A.Minus):
            return self.term(t.left, bound) - self.term(t.right, bound)
        if isinstance(t, A.Times):
            return self.term(t.left, bound) * self.term(t.right, bound)
        if isinstance(t, A.Neg):
            return -self.term(t.arg, bound)
        if isinstance(t, A.Pow):
            return self.term(t.base, bound) ** t.exp
        if isinstance(t, (A.Fn, A.Upd)):
            if ast_free_vars(t) & bound:
                raise QeInapplicable(f"{term_str(t)} depends on a quantified variable")
            return Poly.var(self.ab.var_for(self.alien_key(t)))
        if isinstance(t, A.Cond):
            raise QeInapplicable("conditional term left after desugaring")
        raise QeInapplicable(f"cannot abstract {type(t).__name__}")

    def formula(self, f: A.Formula, bound: frozenset) -> QF:
        if isinstance(f, A.TrueF):
            return TRUE
        if isinstance(f, A.FalseF):
            return FALSE
        if isinstance(f, A.Cmp):
            s = sort_of(f.left, self.sig)
            if s is not None and s != A.REAL:
                if self.object_eval is None:
                    raise ObjectSortAtom(f"object equation {f.op}")
                r = self.object_eval(f)
                if r is None:
                    raise ObjectSortAtom("undetermined object equation")
                return TRUE if r else FALSE
            return atom(self.term(f.left, bound) - self.term(f.right, bound), f.op)
        if isinstance(f, A.Not):
            return mk_not(self.formula(f.arg, bound))
        if isinstance(f, A.And):
            return mk_and(self.formula(f.left, bound), self.formula(f.right, bound))
        if isinstance(f, A.Or):
            return mk_or(self.formula(f.left, bound), self.formula(f.right, bound))
        if isinstance(f, A.Imply):
            return mk_or(mk_not(self.formula(f.left, bound)), self.formula(f.right, bound))
        if isinstance(f, A.Equiv):
            a, b = self.formula(f.left, bound), self.formula(f.right, bound)
            return mk_or(mk_and(a, b), mk_and(mk_not(a), mk_not(b)))
        if isinstance(f, (A.Forall, A.Exists)):
            if f.sort != A.REAL:
                raise QeInapplicable(f"quantifier over object sort {f.sort}")
            body = self.formula(f.body, bound | {f.var})
            return AllQ(f.var, body) if isinstance(f, A.Forall) else ExQ(f.var, body)
        if isinstance(f, (A.Box, A.Diamond)):
            raise QeInapplicable("modality in arithmetic formula")
        raise QeInapplicable(f"unexpected {type(f).__name__}")


def to_qf(f: A.Formula, sig: A.Signature, ab: Optional[Abstraction] = None,
          object_eval=None, alien_key=None):
    """Abstract aliens; returns (QF formula with quantifiers, Abstraction)."""
    ab = ab or Abstraction()
    f = desugar_conditional(f)
    return _Lift(sig, ab, object_eval, alien_key).formula(f, frozenset()), ab


# ---------------------------------------------------------------- back


def _mono_term(m, coeff: Fraction, ab: Abstraction) -> A.Term:
    factors = []
    for v, e in m:
        base = ab.term_of.get(v) or A.Var(v, A.REAL)
        factors.append(base if e == 1 else A.Pow(base, e))
    if coeff != 1 or not factors:
        factors.insert(0, A.Num(coeff))
    out = factors[0]
    for fct in factors[1:]:
        out = A.Times(out, fct)
    return out


def poly_to_term(p: Poly, ab: Abstraction) -> A.Term:
    items = p.sorted_terms()
    if not items:
        return A.Num(0)
    out = None
    for m, c in items:
        if out is None:
            out = _mono_term(m, c, ab) if c > 0 or not m else A.Neg(_mono_term(m, -c, ab))
            if c < 0 and not m:
                out = A.Num(c)
        elif c > 0:
            out = A.Plus(out, _mono_term(m, c, ab))
        else:
            out = A.Minus(out, _mono_term(m, -c, ab))
    return out


def _sum(items, ab) -> A.Term:
    if not items:
        return A.Num(0)
    out = _mono_term(items[0][0], items[0][1], ab)
    for m, c in items[1:]:
        out = A.Plus(out, _mono_term(m, c, ab))
    return out


def atom_to_formula(p: Poly, rel: str, ab: Abstraction) -> A.Formula:
    """``p rel 0`` printed as ``positive part rel negative part``."""
    items = p.sorted_terms()
    pos = [(m, c) for m, c in items if c > 0 and m]
    neg = [(m, -c) for m, c in items if c < 0 and m]
    const = p.const_value()
    if const > 0:
        pos.append(((), const))
    elif const < 0:
        neg.append(((), -const))
    if not pos:
        # all on the right: flip to keep the variable part on the left
        from .qf import FLIP

        return A.Cmp(FLIP[rel], _sum(neg, ab), A.Num(0))
    return A.Cmp(rel, _sum(pos, ab), _sum(neg, ab))


def from_qf(f: QF, ab: Optional[Abstraction] = None) -> A.Formula:
    from .qf import AndQ, Atom, FF, NotQ, OrQ, TT

    ab = ab or Abstraction()
    if isinstance(f, TT):
        return A.TRUE
    if isinstance(f, FF):
        return A.FALSE
    if isinstance(f, Atom):
        return atom_to_formula(f.poly, f.rel, ab)
    if isinstance(f, AndQ):
        return A.conj([from_qf(a, ab) for a in f.args])
    if isinstance(f, OrQ):
        return A.disj([from_qf(a, ab) for a in f.args])
    if isinstance(f, NotQ):
        return A.Not(from_qf(f.arg, ab))
    if isinstance(f, ExQ):
        return A.Exists(f.var, A.REAL, from_qf(f.body, ab))
    if isinstance(f, AllQ):
        return A.Forall(f.var, A.REAL, from_qf(f.body, ab))
    raise TypeError(f)

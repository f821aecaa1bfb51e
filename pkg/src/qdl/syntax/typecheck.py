from __future__ import annotations

from typing import Optional

from ..errors import SortError
from . import ast as A


def sort_of(t: A.Term, sig: A.Signature, scope: Optional[dict] = None) -> Optional[str]:
    """Sort of a term, or None when it cannot be determined."""
    if isinstance(t, A.Var):
        return t.sort
    if isinstance(t, A.Fn):
        d = sig.func(t.name)
        return d.result if d else None
    if isinstance(t, A.Cond):
        return sort_of(t.then, sig, scope)
    if isinstance(t, A.Upd):
        return sort_of(t.term, sig, scope)
    return A.REAL


class _Checker:
    def __init__(self, sig: A.Signature):
        self.sig = sig
        self.errors: list = []

    def err(self, node, msg, expected=None, found=None):
        self.errors.append(SortError(msg, getattr(node, "span", None), expected, found))

    # terms
    def term(self, t: A.Term) -> Optional[str]:
        if isinstance(t, A.Num):
            return A.REAL
        if isinstance(t, A.Var):
            if not self.sig.is_sort(t.sort):
                self.err(t, f"unknown sort {t.sort}")
            return t.sort
        if isinstance(t, A.Fn):
            d = self.sig.func(t.name)
            if d is None:
                self.err(t, f"unknown function {t.name}")
                for a in t.args:
                    self.term(a)
                return None
            if len(d.args) != len(t.args):
                self.err(t, f"{t.name} expects {len(d.args)} arguments")
            for want, a in zip(d.args, t.args):
                got = self.term(a)
                if got is not None and got != want:
                    self.err(a, f"argument of {t.name} has sort {got}, expected {want}", want, got)
            return d.result
        if isinstance(t, (A.Plus, A.Minus, A.Times, A.Neg, A.Pow)):
            for c in t.children():
                got = self.term(c)
                if got is not None and got != A.REAL:
                    self.err(c, f"arithmetic on sort {got}", A.REAL, got)
            return A.REAL
        if isinstance(t, A.Cond):
            self.formula(t.cond)
            a, b = self.term(t.then), self.term(t.orelse)
            if a is not None and b is not None and a != b:
                self.err(t, f"conditional branches of sorts {a} and {b}", a, b)
            return a or b
        if isinstance(t, A.Upd):
            self.program(t.prog)
            return self.term(t.term)
        self.err(t, f"unexpected term node {type(t).__name__}")
        return None

    # formulas
    def formula(self, f: A.Formula) -> None:
        if isinstance(f, (A.TrueF, A.FalseF)):
            return
        if isinstance(f, A.Cmp):
            a, b = self.term(f.left), self.term(f.right)
            if f.op in ("=", "!="):
                if a is not None and b is not None and a != b:
                    self.err(f, f"equation between sorts {a} and {b}", a, b)
            else:
                for s, side in ((a, f.left), (b, f.right)):
                    if s is not None and s != A.REAL:
                        self.err(side, f"no order on sort {s}", A.REAL, s)
            return
        if isinstance(f, (A.Forall, A.Exists)):
            if not self.sig.is_sort(f.sort):
                self.err(f, f"unknown sort {f.sort}")
            self.formula(f.body)
            return
        if isinstance(f, (A.Box, A.Diamond)):
            self.program(f.prog)
            self.formula(f.body)
            return
        for c in f.children():
            self.formula(c)

    # programs
    def _quantified(self, p, eqns):
        if p.qvar is None:
            return
        if p.sort not in self.sig.sorts:
            self.err(p, f"program quantifier over non-object sort {p.sort}")
        v = A.Var(p.qvar, p.sort)
        for e in eqns:
            if e.lhs.args and v not in e.lhs.args:
                self.err(e, f"arguments of {e.lhs.name} must contain {p.qvar} (injectivity)")

    def program(self, p: A.Program) -> None:
        if isinstance(p, A.QAssign):
            self._quantified(p, p.eqns)
            seen = set()
            for e in p.eqns:
                lt, rt = self.term(e.lhs), self.term(e.rhs)
                if lt is not None and rt is not None and lt != rt:
                    self.err(e, f"assigning sort {rt} to {e.lhs.name} of sort {lt}", lt, rt)
                if e.lhs in seen:
                    self.err(e, f"position {e.lhs.name} assigned twice")
                seen.add(e.lhs)
            return
        if isinstance(p, A.QOde):
            self._quantified(p, p.eqns)
            names = [e.lhs.name for e in p.eqns]
            if len(set(names)) != len(names):
                self.err(p, "differential equations must have distinct left-hand symbols")
            for e in p.eqns:
                lt, rt = self.term(e.lhs), self.term(e.rhs)
                if lt is not None and lt != A.REAL:
                    self.err(e, f"cannot differentiate {e.lhs.name} of sort {lt}", A.REAL, lt)
                if rt is not None and rt != A.REAL:
                    self.err(e, f"slope of sort {rt}", A.REAL, rt)
                for a in e.lhs.args:
                    if any(isinstance(n, A.Fn) and n.name == e.lhs.name for n in a.walk()):
                        self.err(e, f"{e.lhs.name} occurs in its own arguments")
            if any(isinstance(n, (A.Box, A.Diamond)) for n in p.domain.walk()):
                self.err(p.domain, "evolution domain must be first-order")
            self.formula(p.domain)
            return
        if isinstance(p, A.Test):
            self.formula(p.cond)
            return
        if isinstance(p, A.NewAssign):
            got = self.term(p.target)
            if p.sort not in self.sig.sorts:
                self.err(p, f"new needs an object sort, got {p.sort}")
            elif got is not None and got != p.sort:
                self.err(p, f"target of sort {got} receives new {p.sort}", p.sort, got)
            return
        for c in p.children():
            self.program(c)


def typecheck(node, sig: Optional[A.Signature] = None) -> list:
    """Return the list of sort errors (empty means well-typed)."""
    if isinstance(node, A.Problem):
        c = _Checker(node.signature)
        c.formula(node.conjecture)
        for a in node.annotations:
            c.formula(a.formula)
        return c.errors
    c = _Checker(sig or A.Signature())
    if isinstance(node, A.Formula):
        c.formula(node)
    elif isinstance(node, A.Program):
        c.program(node)
    else:
        c.term(node)
    return c.errors


def check(node, sig: Optional[A.Signature] = None):
    errs = typecheck(node, sig)
    if errs:
        raise errs[0]
    return node

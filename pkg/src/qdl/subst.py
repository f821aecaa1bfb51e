"""Binding analysis and admissible, capture-free substitution."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import NotAdmissible
from .syntax import ast as A

# ------------------------------------------------------------ analysis


def free_vars(node) -> set:
    """Free logical variables of a term, formula or program."""
    if isinstance(node, A.Var):
        return {node.name}
    if isinstance(node, (A.Forall, A.Exists)):
        return free_vars(node.body) - {node.var}
    if isinstance(node, (A.QAssign, A.QOde)):
        out = set()
        for c in node.children():
            out |= free_vars(c)
        if node.qvar is not None:
            out.discard(node.qvar)
        return out
    out = set()
    for c in node.children():
        out |= free_vars(c)
    return out


def symbols(node) -> set:
    """Function symbols occurring anywhere in ``node``."""
    return {n.name for n in node.walk() if isinstance(n, A.Fn)}


def bound_symbols(p: A.Program) -> set:
    """Symbols assigned or differentiated somewhere in ``p``."""
    out = set()
    for n in p.walk():
        if isinstance(n, (A.QAssign, A.QOde)):
            out.update(e.lhs.name for e in n.eqns)
        elif isinstance(n, A.NewAssign):
            out.add(n.target.name)
            out.add(A.eps_name(n.sort))
    return out


def all_names(*nodes) -> set:
    out = set()
    for node in nodes:
        for n in node.walk():
            if isinstance(n, (A.Var, A.Fn)):
                out.add(n.name)
            elif isinstance(n, (A.Forall, A.Exists)):
                out.add(n.var)
            elif isinstance(n, (A.QAssign, A.QOde)) and n.qvar:
                out.add(n.qvar)
    return out


class Fresh:
    """Generator of names that cannot clash with user names or each other."""

    def __init__(self, avoid: Iterable[str] = ()):
        self.used = set(avoid)
        self.counter = itertools.count(1)

    def avoid(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def __call__(self, base: str = "") -> str:
        base = base.split("$")[0]
        while True:
            name = f"{base}${next(self.counter)}"
            if name not in self.used:
                self.used.add(name)
                return name


# -------------------------------------------------------- substitution


@dataclass(frozen=True)
class Substitution:
    """Simultaneous replacement of terms (variables or applications)."""

    pairs: tuple = ()

    @staticmethod
    def of(mapping) -> "Substitution":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return Substitution(tuple((A.strip_spans(p), r) for p, r in items))

    def __bool__(self):
        return bool(self.pairs)


@dataclass(frozen=True)
class Violation:
    span: Optional[A.Span]
    symbol: str
    binder: str = ""

    def __str__(self):
        return f"{self.symbol} is bound by {self.binder}"


def _occurs(pat, node) -> bool:
    return any(n == pat for n in node.walk() if isinstance(n, A.Term))


def _binder_free(pat, node) -> bool:
    """pattern occurs in node at a place where none of its variables is shadowed."""
    pv = free_vars(pat)

    def go(n, shadow):
        if isinstance(n, A.Term) and n == pat:
            return not (pv & shadow)
        if isinstance(n, (A.Forall, A.Exists)):
            return go(n.body, shadow | {n.var})
        if isinstance(n, (A.QAssign, A.QOde)) and n.qvar:
            shadow = shadow | {n.qvar}
        return any(go(c, shadow) for c in n.children())

    return go(node, frozenset())


def admissible(sigma: Substitution, target) -> Optional[Violation]:
    """First violation of the admissibility condition, or None."""
    if not sigma:
        return None
    info = [(p, r, (symbols(p) | symbols(r))) for p, r in sigma.pairs]

    def go(n, shadow):
        if isinstance(n, (A.Box, A.Diamond, A.Upd)):
            prog = n.prog
            bound = bound_symbols(prog)
            body = n.body if not isinstance(n, A.Upd) else n.term
            for p, r, syms in info:
                hit = bound & syms
                if hit and (_binder_free(p, prog) or _binder_free(p, body)):
                    if not (free_vars(p) & shadow):
                        kind = "update" if isinstance(n, A.Upd) else "modality"
                        return Violation(n.span, sorted(hit)[0], kind)
        if isinstance(n, (A.Forall, A.Exists)):
            return go(n.body, shadow | {n.var})
        if isinstance(n, (A.QAssign, A.QOde)) and n.qvar:
            shadow = shadow | {n.qvar}
        for c in n.children():
            v = go(c, shadow)
            if v is not None:
                return v
        return None

    return go(target, frozenset())


def apply_subst(sigma: Substitution, target, fresh: Optional[Fresh] = None, check: bool = True):
    """Capture-free simultaneous substitution; binders are renamed as needed."""
    if not sigma:
        return target
    if check:
        v = admissible(sigma, target)
        if v is not None:
            raise NotAdmissible(f"substitution not admissible: {v}", v.span)
    if fresh is None:
        fresh = Fresh(all_names(target, *[x for pr in sigma.pairs for x in pr]))
    pairs = [(p, r, free_vars(p), free_vars(r)) for p, r in sigma.pairs]
    return _apply(target, pairs, fresh)


def _rename(node, old: str, new: str, sort: str):
    return _apply(node, [(A.Var(old, sort), A.Var(new, sort), {old}, {new})], None)


def _apply(n, pairs, fresh):
    if not pairs:
        return n
    if isinstance(n, A.Term):
        for p, r, _, _ in pairs:
            if n == p:
                return r
        if isinstance(n, A.Var):
            return n
    if isinstance(n, (A.Forall, A.Exists)):
        var, body = n.var, n.body
        inner = [q for q in pairs if var not in q[2]]
        if any(var in q[3] for q in inner) and any(_occurs(q[0], body) for q in inner):
            new = fresh(var) if fresh else var + "$"
            body = _rename(body, var, new, n.sort)
            var = new
        return type(n)(var, n.sort, _apply(body, inner, fresh), span=n.span)
    if isinstance(n, (A.QAssign, A.QOde)) and n.qvar is not None:
        var = n.qvar
        inner = [q for q in pairs if var not in q[2]]
        node = n
        if any(var in q[3] for q in inner) and any(_occurs(q[0], n) for q in inner):
            new = fresh(var) if fresh else var + "$"
            ren = [(A.Var(var, n.sort), A.Var(new, n.sort), {var}, {new})]
            node = _program_parts(n, ren, None)
            node = type(n)(new, n.sort, node.eqns, *((node.domain,) if isinstance(n, A.QOde) else ()), span=n.span)
        return _program_parts(node, inner, fresh)
    if isinstance(n, (A.QAssign, A.QOde)):
        return _program_parts(n, pairs, fresh)
    if isinstance(n, A.NewAssign):
        return A.NewAssign(n.target.map_children(lambda c: _apply(c, pairs, fresh)), n.sort, span=n.span)
    return n.map_children(lambda c: _apply(c, pairs, fresh))


def _program_parts(n, pairs, fresh):
    eqns = tuple(
        A.Eqn(e.lhs.map_children(lambda c: _apply(c, pairs, fresh)), _apply(e.rhs, pairs, fresh), span=e.span)
        for e in n.eqns)
    if isinstance(n, A.QOde):
        return A.QOde(n.qvar, n.sort, eqns, _apply(n.domain, pairs, fresh), span=n.span)
    return A.QAssign(n.qvar, n.sort, eqns, span=n.span)


def subst_vars(node, mapping: dict, fresh: Optional[Fresh] = None, check: bool = True):
    """Replace free variables by terms; ``mapping`` is name -> term."""
    if not mapping:
        return node
    sorts = {}
    for n in node.walk():
        if isinstance(n, A.Var) and n.name in mapping:
            sorts.setdefault(n.name, n.sort)
    pairs = [(A.Var(k, sorts[k]), v) for k, v in mapping.items() if k in sorts]
    return apply_subst(Substitution.of(pairs), node, fresh, check)


def rename_var(node, old: str, new: str, sort: str):
    return _rename(node, old, new, sort)

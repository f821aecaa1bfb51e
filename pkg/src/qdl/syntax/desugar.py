"""Elimination of conditional terms."""

from __future__ import annotations

from . import ast as A


def _subterms(t: A.Term):
    # stays at the arithmetic level: conditions are formulas and the body
    # of an update is evaluated in another state
    yield t
    if isinstance(t, A.Cond):
        yield from _subterms(t.then)
        yield from _subterms(t.orelse)
    elif not isinstance(t, A.Upd):
        for c in t.children():
            yield from _subterms(c)


def _first_cond(t: A.Term):
    """Outermost Cond: conditionals in its branches are then split under its guard only."""
    for n in _subterms(t):
        if isinstance(n, A.Cond):
            return n
    return None


def _has_cond_term(t) -> bool:
    return any(isinstance(n, A.Cond) for n in _subterms(t))


def _replace(t, target, by):
    if t is target:
        return by
    if isinstance(t, (A.Formula, A.Program, A.Upd)):
        return t  # do not descend into conditions or nested modalities
    return t.map_children(lambda c: _replace(c, target, by))


def _atom(f: A.Cmp) -> A.Formula:
    for side in (f.left, f.right):
        c = _first_cond(side)
        if c is None:
            continue
        a = A.Cmp(f.op, _replace(f.left, c, c.then), _replace(f.right, c, c.then))
        b = A.Cmp(f.op, _replace(f.left, c, c.orelse), _replace(f.right, c, c.orelse))
        guard = desugar_conditional(c.cond)
        return A.And(A.Imply(guard, _atom(a)), A.Imply(A.Not(guard), _atom(b)))
    return f


def desugar_conditional(f: A.Formula) -> A.Formula:
    """Replace each atom psi(if phi then a else b) by (phi -> psi(a)) & (!phi -> psi(b)).

    Conditionals nested inside modalities' programs are left alone; only
    atoms reachable through the formula structure are rewritten.
    """
    if isinstance(f, A.Cmp):
        if not (_has_cond_term(f.left) or _has_cond_term(f.right)):
            return f
        return _atom(f)
    if isinstance(f, (A.Box, A.Diamond)):
        return f.map_children(lambda c: desugar_conditional(c) if isinstance(c, A.Formula) else c)
    return f.map_children(desugar_conditional)


def has_cond(f) -> bool:
    return any(isinstance(n, A.Cond) for n in f.walk())

"""Quantifier elimination by virtual substitution.

Linear occurrences are eliminated with the Loos-Weispfenning test points
(-infinity, roots of weak atoms, roots plus an infinitesimal for strict
atoms).  Equations with a constant coefficient are used for exact
Gaussian elimination first.  A variable that only occurs in powers of a
common exponent k is replaced by ``u = x^k``.  When the last remaining
variable has higher degree and no parameters are left, the univariate
Sturm decision finishes the job.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import List, Tuple

from ..errors import UnsupportedDegree
from . import sturm
from .poly import Poly
from .qf import (FALSE, TRUE, AllQ, AndQ, Atom, ExQ, FF, NotQ, OrQ, QF, TT, atom, free_vars,
                 mk_and, mk_not, mk_or, nnf)

# ------------------------------------------------------------ test points

NEG_INF = "-inf"


def _norm_point(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    """Canonical representative of the root -b/a (a made primitive)."""
    prim, _ = a.primitive()
    m = next(iter(a.t))
    k = prim.t[m] / a.t[m]
    return a.scale(k), b.scale(k)


def _linear_parts(p: Poly, x: str) -> Tuple[Poly, Poly]:
    cs = p.coeffs(x)
    return cs.get(1, Poly()), cs.get(0, Poly())


def _rel_value(q: Poly, a: Poly, rel: str) -> QF:
    """Truth of ``(q / a) rel 0`` given a != 0."""
    if rel in ("=", "!="):
        return atom(q, rel)
    if a.is_const():
        if a.const_value() > 0:
            return atom(q, rel)
        return atom(-q, rel)
    return mk_or(mk_and(atom(a, ">"), atom(q, rel)), mk_and(atom(a, "<"), atom(-q, rel)))


def _sub_exact(c: Poly, d: Poly, a: Poly, b: Poly, rel: str) -> QF:
    # c*(-b/a) + d = (d*a - c*b)/a
    return _rel_value(d * a - c * b, a, rel)


def _sub_eps(c: Poly, d: Poly, a: Poly, b: Poly, rel: str) -> QF:
    if rel == "=":
        return mk_and(_sub_exact(c, d, a, b, "="), atom(c, "="))
    if rel == "!=":
        return mk_or(_sub_exact(c, d, a, b, "!="), atom(c, "!="))
    strict = {">": ">", ">=": ">", "<": "<", "<=": "<"}[rel]
    return mk_or(_sub_exact(c, d, a, b, strict), mk_and(_sub_exact(c, d, a, b, "="), atom(c, rel)))


def _sub_neg_inf(c: Poly, d: Poly, rel: str) -> QF:
    if rel == "=":
        return mk_and(atom(c, "="), atom(d, "="))
    if rel == "!=":
        return mk_or(atom(c, "!="), atom(d, "!="))
    dom = {">": "<", ">=": "<", "<": ">", "<=": ">"}[rel]
    return mk_or(atom(c, dom), mk_and(atom(c, "="), atom(d, rel)))


def _substitute(f: QF, x: str, point) -> QF:
    def go(g: QF) -> QF:
        if isinstance(g, Atom):
            if x not in g.poly.vars():
                return g
            c, d = _linear_parts(g.poly, x)
            if point == NEG_INF:
                return _sub_neg_inf(c, d, g.rel)
            a, b, eps = point
            return (_sub_eps if eps else _sub_exact)(c, d, a, b, g.rel)
        if isinstance(g, AndQ):
            out = []
            for h in g.args:
                r = go(h)
                if isinstance(r, FF):
                    return FALSE
                out.append(r)
            return mk_and(out)
        if isinstance(g, OrQ):
            out = []
            for h in g.args:
                r = go(h)
                if isinstance(r, TT):
                    return TRUE
                out.append(r)
            return mk_or(out)
        return g

    return go(f)


def _atoms_with(f: QF, x: str) -> List[Atom]:
    out = []
    seen = set()

    def go(g):
        if isinstance(g, Atom):
            if x in g.poly.vars() and g not in seen:
                seen.add(g)
                out.append(g)
        elif isinstance(g, (AndQ, OrQ)):
            for h in g.args:
                go(h)

    go(f)
    return out


def elim_linear(x: str, f: QF) -> QF:
    """Eliminate ``x`` from ``exists x. f`` where every atom is linear in x."""
    f = nnf(f)
    points = []
    seen = set()
    for at in _atoms_with(f, x):
        a, b = _linear_parts(at.poly, x)
        a, b = _norm_point(a, b)
        key = (a, b, at.rel in ("!=", ">", "<"))
        if key not in seen:
            seen.add(key)
            points.append(key)
    disjuncts = [_substitute(f, x, NEG_INF)]
    if isinstance(disjuncts[0], TT):
        return TRUE
    for a, b, eps in points:
        guard = atom(a, "!=")
        if isinstance(guard, FF):
            continue
        body = _substitute(f, x, (a, b, eps))
        d = mk_and(guard, body)
        if isinstance(d, TT):
            return TRUE
        disjuncts.append(d)
    return mk_or(disjuncts)


# ------------------------------------------------------------ other steps


def _conjuncts(f: QF):
    return f.args if isinstance(f, AndQ) else (f,)


def _gauss_candidate(f: QF, x: str):
    for g in _conjuncts(f):
        if isinstance(g, Atom) and g.rel == "=" and g.poly.degree(x) == 1:
            a, b = _linear_parts(g.poly, x)
            if a.is_const():
                return g, a.const_value(), b
    return None


def _gauss(f: QF, x: str, a: Fraction, b: Poly) -> QF:
    value = b.scale(-1 / a)

    def go(g):
        if isinstance(g, Atom):
            return atom(g.poly.subst(x, value), g.rel) if x in g.poly.vars() else g
        if isinstance(g, AndQ):
            return mk_and([go(h) for h in g.args])
        if isinstance(g, OrQ):
            return mk_or([go(h) for h in g.args])
        return g

    return go(f)


def _power_gcd(f: QF, x: str) -> int:
    exps = set()
    for at in _atoms_with(f, x):
        for m in at.poly.t:
            for v, e in m:
                if v == x:
                    exps.add(e)
    return reduce(gcd, exps, 0)


def _deflate(f: QF, x: str, k: int, u: str) -> QF:
    def fix(p: Poly) -> Poly:
        d = {}
        for m, c in p.t.items():
            nm = tuple(sorted((u if v == x else v, e // k if v == x else e) for v, e in m))
            d[nm] = c
        return Poly(d)

    def go(g):
        if isinstance(g, Atom):
            return atom(fix(g.poly), g.rel) if x in g.poly.vars() else g
        if isinstance(g, AndQ):
            return mk_and([go(h) for h in g.args])
        if isinstance(g, OrQ):
            return mk_or([go(h) for h in g.args])
        return g

    return go(f)


def _max_degree(f: QF, x: str) -> int:
    return max((at.poly.degree(x) for at in _atoms_with(f, x)), default=0)


# ------------------------------------------------------- univariate decision


def _to_upoly(p: Poly, x: str) -> list:
    cs = p.coeffs(x)
    deg = max(cs)
    return sturm.trim([cs[e].const_value() if e in cs else Fraction(0) for e in range(deg + 1)])


def decide_univariate(x: str, f: QF, quantifier: str = "exists") -> QF:
    """Decide ``exists x. f`` (or ``forall``) for f univariate in x."""
    f = nnf(f)
    if free_vars(f) - {x}:
        raise ValueError("decide_univariate: formula has parameters")
    if quantifier == "forall":
        return mk_not(decide_univariate(x, nnf(f, negate=True)))
    polys = []
    for at in _atoms_with(f, x):
        up = _to_upoly(at.poly, x)
        if up not in polys:
            polys.append(up)
    if not polys:
        return f
    # lcm of the square-free parts: its roots are exactly the atoms' roots
    big = [Fraction(1)]
    for up in polys:
        s = sturm.squarefree(up)
        g = sturm.gcd(big, s)
        big = sturm.mul(big, sturm.divmod_(s, g)[0])
    big = sturm.monic(big)
    roots = sturm.isolate(big)
    samples = []
    if roots:
        samples.append(("q", roots[0].lo - 1))
        for i, r in enumerate(roots):
            samples.append(("r", r))
            if i + 1 < len(roots):
                nxt = roots[i + 1]
                samples.append(("q", (r.hi + nxt.lo) / 2 if r.hi < nxt.lo else r.hi))
        samples.append(("q", roots[-1].hi + 1))
    else:
        samples.append(("q", Fraction(0)))
    for kind, s in samples:
        if _holds_at(f, x, kind, s, big):
            return TRUE
    return FALSE


def _holds_at(f: QF, x: str, kind: str, s, big) -> bool:
    from .qf import SIGNS

    def sgn(p: Poly) -> int:
        up = _to_upoly(p, x)
        if kind == "q":
            return sturm.sign_at(up, s)
        return sturm.sign_at_root(up, big, s)

    def go(g) -> bool:
        if isinstance(g, TT):
            return True
        if isinstance(g, FF):
            return False
        if isinstance(g, Atom):
            return sgn(g.poly) in SIGNS[g.rel]
        if isinstance(g, AndQ):
            return all(go(h) for h in g.args)
        if isinstance(g, OrQ):
            return any(go(h) for h in g.args)
        raise TypeError(g)

    return go(f)


# -------------------------------------------------------------- driver


class QE:
    """Stateful driver (fresh names for power deflation)."""

    def __init__(self, max_size: int = 200000):
        self.counter = 0
        self.max_size = max_size

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}%{self.counter}"

    def qe(self, f: QF) -> QF:
        if isinstance(f, ExQ):
            vars_, body = [], f
            while isinstance(body, ExQ):
                vars_.append(body.var)
                body = body.body
            return self.exists(vars_, self.qe(body))
        if isinstance(f, AllQ):
            vars_, body = [], f
            while isinstance(body, AllQ):
                vars_.append(body.var)
                body = body.body
            inner = self.qe(body)
            return mk_not(self.exists(vars_, mk_not(inner)))
        if isinstance(f, AndQ):
            return mk_and([self.qe(a) for a in f.args])
        if isinstance(f, OrQ):
            return mk_or([self.qe(a) for a in f.args])
        if isinstance(f, NotQ):
            return mk_not(self.qe(f.arg))
        return f

    def exists(self, vars_, f: QF) -> QF:
        f = nnf(f)
        fv = free_vars(f)
        vars_ = [v for v in vars_ if v in fv]
        if not vars_:
            return f
        if isinstance(f, OrQ):
            out = []
            for d in f.args:
                r = self.exists(vars_, d)
                if isinstance(r, TT):
                    return TRUE
                out.append(r)
            return mk_or(out)
        x = self.choose(vars_, f)
        rest = [v for v in vars_ if v != x]
        return self.exists(rest, self.eliminate(x, f, last=not (fv - {x})))

    def choose(self, vars_, f: QF) -> str:
        def key(v):
            gauss = _gauss_candidate(f, v) is not None
            deg = _max_degree(f, v)
            k = _power_gcd(f, v)
            eff = deg // k if k > 1 else deg
            return (not gauss, eff, len(_atoms_with(f, v)), v)

        return min(vars_, key=key)

    def eliminate(self, x: str, f: QF, last: bool) -> QF:
        g = _gauss_candidate(f, x)
        if g is not None:
            _, a, b = g
            return _gauss(f, x, a, b)
        k = _power_gcd(f, x)
        if k > 1:
            u = self.fresh(x)
            g = _deflate(f, x, k, u)
            if k % 2 == 0:
                g = mk_and(atom(Poly.var(u), ">="), g)
            return self.exists([u], g)
        deg = _max_degree(f, x)
        if deg <= 1:
            return elim_linear(x, f)
        if last:
            return decide_univariate(x, f)
        raise UnsupportedDegree(x, deg)


def qe(f: QF) -> QF:
    """Equivalent quantifier-free formula (Def.: no new free variables)."""
    return QE().qe(f)

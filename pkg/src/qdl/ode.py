"""Closed-form solutions of (quantified) polynomial derivative chains.

A system is solvable here when its equations form an acyclic chain such
as ``x' = v, v' = a``: every right-hand side mentions differentiated
positions only through left-hand sides of the same system.  Solutions
are obtained by repeated integration in the time variable and are always
re-checked by :func:`check_solution` before use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from .arith.lift import Abstraction, _Lift
from .arith.poly import Poly
from .errors import NoSolution, UnsupportedOde
from .subst import Substitution, apply_subst
from .syntax import ast as A


@dataclass(frozen=True)
class QOdeSystem:
    qvar: Optional[str]
    sort: Optional[str]
    eqns: Tuple[A.Eqn, ...]
    domain: A.Formula
    time_var: str = "t"

    @staticmethod
    def of(p: A.QOde, time_var: str = "t") -> "QOdeSystem":
        return QOdeSystem(p.qvar, p.sort, p.eqns, p.domain, time_var)


@dataclass(frozen=True)
class Solution:
    updates: Tuple[Tuple[A.Fn, A.Term], ...]
    time_var: str
    masked: bool = False

    def at(self, t: A.Term) -> Tuple[Tuple[A.Fn, A.Term], ...]:
        sub = Substitution.of([(A.Var(self.time_var, A.REAL), t)])
        return tuple((lhs, apply_subst(sub, rhs, check=False)) for lhs, rhs in self.updates)


@dataclass(frozen=True)
class Mismatch:
    index: int
    residual: Poly

    def __str__(self):
        return f"equation {self.index}: residual {self.residual}"


# ---------------------------------------------------------------- masks


def mask_of(sys: QOdeSystem):
    """If every slope is ``eps_C(i) * theta``, return the unmasked slopes."""
    if sys.qvar is None:
        return None
    guard = A.eps(A.Var(sys.qvar, sys.sort), sys.sort)
    out = []
    for e in sys.eqns:
        r = e.rhs
        if isinstance(r, A.Times) and A.strip_spans(r.left) == guard:
            out.append(A.Eqn(e.lhs, r.right))
        else:
            return None
    return tuple(out)


# ---------------------------------------------------------------- polys


def _to_poly(t: A.Term, ab: Abstraction) -> Poly:
    return _Lift(A.Signature(), ab, None).term(t, frozenset())


def _derive(p: Poly, t: str) -> Poly:
    out: Dict = {}
    for m, c in p.t.items():
        e = dict(m).get(t, 0)
        if e:
            nm = tuple(sorted(((v, x - 1) if v == t else (v, x)) for v, x in m if not (v == t and x == 1)))
            out[nm] = out.get(nm, 0) + c * e
    return Poly(out)


def _integrate(p: Poly, t: str) -> Poly:
    out: Dict = {}
    for m, c in p.t.items():
        d = dict(m)
        e = d.get(t, 0)
        d[t] = e + 1
        out[tuple(sorted(d.items()))] = c / (e + 1)
    return Poly(out)


def _poly_in_t_to_term(p: Poly, t: str, ab: Abstraction) -> A.Term:
    from .arith.lift import poly_to_term

    tv = A.Var(t, A.REAL)
    cs = p.coeffs(t)
    acc = None
    for k in sorted(cs):
        c = cs[k]
        neg = c.leading_coeff() < 0
        mag = -c if neg else c
        base = poly_to_term(mag, ab)
        if k == 0:
            term = base
        else:
            tp = tv if k == 1 else A.Pow(tv, k)
            if mag == Poly.const(1):
                term = tp
            elif len(mag.t) == 1:
                term = A.Times(base, tp)
            else:
                term = A.Times(base, tp)
        if acc is None:
            acc = A.Neg(term) if neg else term
        else:
            acc = A.Minus(acc, term) if neg else A.Plus(acc, term)
    return acc if acc is not None else A.Num(0)


# ------------------------------------------------------------- solving


def _check_shape(eqns: Sequence[A.Eqn]):
    lhs = {A.strip_spans(e.lhs) for e in eqns}
    names = {e.lhs.name for e in eqns}
    deps = {}
    for e in eqns:
        d = set()
        for n in e.rhs.walk():
            if isinstance(n, (A.Cond, A.Upd)):
                raise UnsupportedOde("conditional or update term in a slope")
            if isinstance(n, A.Fn) and n.name in names:
                key = A.strip_spans(n)
                if key not in lhs:
                    raise UnsupportedOde(f"slope of {e.lhs.name} couples to {n.name} at another position")
                d.add(key)
        deps[A.strip_spans(e.lhs)] = d
    return deps


def _solve_eqns(eqns: Sequence[A.Eqn], t: str) -> Tuple[Tuple[A.Fn, A.Term], ...]:
    deps = _check_shape(eqns)
    ab = Abstraction()
    sol: Dict[A.Term, Poly] = {}
    pending = [A.strip_spans(e.lhs) for e in eqns]
    rhs_of = {A.strip_spans(e.lhs): e.rhs for e in eqns}
    while pending:
        ready = [k for k in pending if deps[k] <= set(sol)]
        if not ready:
            raise UnsupportedOde("cyclic dependency (not a derivative chain)")
        for k in ready:
            slope = _to_poly(rhs_of[k], ab)
            for d in deps[k]:
                slope = slope.subst(ab.var_for(d), sol[d])
            sol[k] = _to_poly(k, ab) + _integrate(slope, t)
            pending.remove(k)
    return tuple((A.strip_spans(e.lhs), _poly_in_t_to_term(sol[A.strip_spans(e.lhs)], t, ab)) for e in eqns)


def solve_qode(sys: QOdeSystem) -> Solution:
    """Synthesize and verify a polynomial solution."""
    unmasked = mask_of(sys)
    eqns = unmasked if unmasked is not None else sys.eqns
    sol = Solution(_solve_eqns(eqns, sys.time_var), sys.time_var, masked=unmasked is not None)
    res = check_solution(sys, sol)
    if res is not None:
        raise NoSolution(f"synthesized solution rejected: {res}")
    return sol


def check_solution(sys: QOdeSystem, cand: Solution) -> Optional[Mismatch]:
    """None if ``cand`` solves the system (the unmasked one for masked solutions)."""
    eqns = sys.eqns
    if cand.masked:
        eqns = mask_of(sys)
        if eqns is None:
            return Mismatch(0, Poly.const(1))
    t = cand.time_var
    ab = Abstraction()
    upd = {A.strip_spans(lhs): rhs for lhs, rhs in cand.updates}
    if set(upd) != {A.strip_spans(e.lhs) for e in eqns}:
        return Mismatch(0, Poly.const(1))
    polys = {k: _to_poly(v, ab) for k, v in upd.items()}
    for idx, e in enumerate(eqns):
        k = A.strip_spans(e.lhs)
        init = polys[k].subst(t, Poly())
        r0 = init - _to_poly(k, ab)
        if not r0.is_zero():
            return Mismatch(idx, r0)
        slope = _to_poly(e.rhs, ab)
        for other, p in polys.items():
            v = ab.var_of.get(other)
            if v is not None:
                slope = slope.subst(v, p)
        res = _derive(polys[k], t) - slope
        if not res.is_zero():
            return Mismatch(idx, res)
    return None


def mk_evolve_update(sys: QOdeSystem, sol: Solution, t: A.Term, keep: Optional[set] = None) -> A.QAssign:
    """The assignment reaching the state at duration ``t``.

    ``keep`` restricts the update to the listed symbols (others are not
    observed by the postcondition).  Masked systems yield actualist
    updates ``f(s) := if eps(i)=1 then S else f(s)``.
    """
    eqns = []
    for lhs, rhs in sol.at(t):
        if keep is not None and lhs.name not in keep:
            continue
        if sol.masked:
            rhs = A.Cond(A.created(A.Var(sys.qvar, sys.sort), sys.sort), rhs, lhs)
        eqns.append(A.Eqn(lhs, rhs))
    return A.QAssign(sys.qvar, sys.sort, tuple(eqns))


def evolve_guard(sys: QOdeSystem, sol: Solution, t: A.Term, tilde: str, keep=None) -> A.Formula:
    """``forall R tilde. 0 <= tilde <= t -> [S(tilde)] domain`` (true for trivial domains)."""
    if isinstance(sys.domain, A.TrueF):
        return A.TRUE
    tv = A.Var(tilde, A.REAL)
    upd = mk_evolve_update(sys, sol, tv, keep)
    rng = A.And(A.Cmp("<=", A.Num(0), tv), A.Cmp("<=", tv, t))
    return A.Forall(tilde, A.REAL, A.Imply(rng, A.Box(upd, sys.domain)))


def numeric_flow(values: Dict, steps: int, duration: float, slope_fn):
    """Fixed-step RK4 for vector fields given as ``slope_fn(state) -> dict``."""
    h = duration / steps
    y = dict(values)
    for _ in range(steps):
        k1 = slope_fn(y)
        k2 = slope_fn({k: y[k] + h / 2 * k1[k] for k in y})
        k3 = slope_fn({k: y[k] + h / 2 * k2[k] for k in y})
        k4 = slope_fn({k: y[k] + h * k3[k] for k in y})
        y = {k: y[k] + h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]) for k in y}
    return y

"""Bounded transition semantics and three-valued formula evaluation.

Truth values are ``True``, ``False`` and ``None`` (unknown).  A box
formula is only reported true when the enumerated successor set is known
to be complete; ODEs are sampled on a time grid, so anything after a
continuous evolution is at best refuted, never confirmed.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..arith.lift import to_qf
from ..arith.qf import eval_ground
from ..arith.vs import qe
from ..errors import BoundExceeded, MissingBinding, QdlError, UnsupportedOde
from ..ode import QOdeSystem, mk_evolve_update, numeric_flow, solve_qode
from ..subst import free_vars
from ..syntax import ast as A
from ..syntax.printer import program_str
from .state import SimBounds, State, show

TOL = Fraction(1, 10 ** 9)
_TIME = "t$sim"

Step = Tuple[str, str]
Trace = Tuple[Step, ...]


class _Unknown(Exception):
    """Raised inside evaluation when a value cannot be determined."""


def and3(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def or3(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


def not3(a):
    return None if a is None else not a


class Simulator:
    def __init__(self, sig: A.Signature, bounds: SimBounds = SimBounds()):
        self.sig = sig
        self.bounds = bounds
        self._solutions: Dict[A.QOde, object] = {}

    # ---------------------------------------------------------- terms

    def eval_term(self, t: A.Term, s: State, env: Optional[dict] = None):
        env = env or {}
        if isinstance(t, A.Num):
            return t.value
        if isinstance(t, A.Var):
            if t.name in env:
                return env[t.name]
            if t.name in s.env:
                return s.env[t.name]
            raise MissingBinding(f"unbound variable {t.name}", t.span)
        if isinstance(t, A.Fn):
            args = tuple(self.eval_term(a, s, env) for a in t.args)
            return s.lookup(t.name, args)
        if isinstance(t, A.Plus):
            return self.eval_term(t.left, s, env) + self.eval_term(t.right, s, env)
        if isinstance(t, A.Minus):
            return self.eval_term(t.left, s, env) - self.eval_term(t.right, s, env)
        if isinstance(t, A.Times):
            return self.eval_term(t.left, s, env) * self.eval_term(t.right, s, env)
        if isinstance(t, A.Neg):
            return -self.eval_term(t.arg, s, env)
        if isinstance(t, A.Pow):
            return self.eval_term(t.base, s, env) ** t.exp
        if isinstance(t, A.Cond):
            c = self.decide(t.cond, s, env)
            if c is None:
                raise _Unknown("undetermined condition")
            return self.eval_term(t.then if c else t.orelse, s, env)
        if isinstance(t, A.Upd):
            succ, _ = self._succ(t.prog, s, env)
            vals = {self.eval_term(t.term, s2, env) for s2, _ in succ}
            if len(vals) != 1:
                raise _Unknown("update term without a unique value")
            return vals.pop()
        raise TypeError(t)

    # -------------------------------------------------------- formulas

    def decide(self, f: A.Formula, s: State, env: Optional[dict] = None) -> Optional[bool]:
        return self.decide_traced(f, s, env)[0]

    def decide_traced(self, f: A.Formula, s: State, env: Optional[dict] = None):
        """(truth, trace); the trace explains a refuted box or a witnessed diamond."""
        env = env or {}
        try:
            return self._decide(f, s, env)
        except (_Unknown, BoundExceeded):
            return None, ()

    def _decide(self, f, s, env):
        if isinstance(f, A.TrueF):
            return True, ()
        if isinstance(f, A.FalseF):
            return False, ()
        if isinstance(f, A.Cmp):
            return self._cmp(f, s, env), ()
        if isinstance(f, A.Not):
            v, tr = self._decide(f.arg, s, env)
            return not3(v), tr
        if isinstance(f, (A.And, A.Or, A.Imply, A.Equiv)):
            a, ta = self._decide(f.left, s, env)
            if isinstance(f, A.And) and a is False:
                return False, ta
            if isinstance(f, A.Or) and a is True:
                return True, ta
            if isinstance(f, A.Imply) and a is False:
                return True, ()
            b, tb = self._decide(f.right, s, env)
            if isinstance(f, A.And):
                return and3(a, b), tb
            if isinstance(f, A.Or):
                return or3(a, b), tb
            if isinstance(f, A.Imply):
                return or3(not3(a), b), tb
            return (None if a is None or b is None else a == b), ta + tb
        if isinstance(f, (A.Forall, A.Exists)):
            if f.sort == A.REAL:
                return self._real_quantifier(f, s, env), ()
            universal = isinstance(f, A.Forall)
            acc = universal
            for o in s.domain(f.sort):
                v, tr = self._decide(f.body, s, {**env, f.var: o})
                if v is (not universal):
                    return v, tr
                if v is None:
                    acc = None
            return acc, ()
        if isinstance(f, (A.Box, A.Diamond)):
            succ, exact = self._succ(f.prog, s, env)
            box = isinstance(f, A.Box)
            acc = True if box else False
            for s2, tr in succ:
                v, tr2 = self._decide(f.body, s2, env)
                if box and v is False:
                    return False, tr + tr2
                if not box and v is True:
                    return True, tr + tr2
                if v is None:
                    acc = None
            if not exact and acc is not None:
                acc = None
            return acc, ()
        raise TypeError(f)

    def _cmp(self, f: A.Cmp, s, env):
        left = self.eval_term(f.left, s, env)
        right = self.eval_term(f.right, s, env)
        if isinstance(left, str) or isinstance(right, str):
            if f.op == "=":
                return left == right
            if f.op == "!=":
                return left != right
            raise _Unknown("order on objects")
        if s.tainted and abs(left - right) <= TOL:
            return None
        return {"=": left == right, "!=": left != right, ">=": left >= right,
                ">": left > right, "<=": left <= right, "<": left < right}[f.op]

    # real quantifiers: ground everything else, then decide exactly by QE

    def _real_quantifier(self, f, s, env):
        g = self._ground(f, s, env, frozenset())
        try:
            qf, _ = to_qf(g, self.sig)
            return eval_ground(qe(qf))
        except QdlError:
            return None

    def _ground(self, f, s, env, rb):
        if isinstance(f, (A.TrueF, A.FalseF)):
            return f
        if isinstance(f, A.Cmp):
            if not (free_vars(f) & rb):
                v = self._cmp(f, s, env)
                if v is None:
                    raise _Unknown("undetermined comparison")
                return A.TRUE if v else A.FALSE
            return A.Cmp(f.op, self._ground_term(f.left, s, env, rb), self._ground_term(f.right, s, env, rb))
        if isinstance(f, A.Not):
            return A.Not(self._ground(f.arg, s, env, rb))
        if isinstance(f, A.BINARY):
            return type(f)(self._ground(f.left, s, env, rb), self._ground(f.right, s, env, rb))
        if isinstance(f, (A.Forall, A.Exists)):
            if f.sort == A.REAL:
                return type(f)(f.var, f.sort, self._ground(f.body, s, env, rb | {f.var}))
            parts = [self._ground(f.body, s, {**env, f.var: o}, rb) for o in s.domain(f.sort)]
            return A.conj(parts) if isinstance(f, A.Forall) else A.disj(parts)
        if isinstance(f, (A.Box, A.Diamond)):
            if free_vars(f) & rb:
                raise _Unknown("modality under a real quantifier")
            v = self.decide(f, s, env)
            if v is None:
                raise _Unknown("undetermined modality")
            return A.TRUE if v else A.FALSE
        raise TypeError(f)

    def _ground_term(self, t, s, env, rb):
        if not (free_vars(t) & rb):
            v = self.eval_term(t, s, env)
            if isinstance(v, str):
                raise _Unknown("object value in arithmetic")
            return A.Num(v)
        if isinstance(t, A.Var):
            return t
        if isinstance(t, (A.Plus, A.Minus, A.Times)):
            return type(t)(self._ground_term(t.left, s, env, rb), self._ground_term(t.right, s, env, rb))
        if isinstance(t, A.Neg):
            return A.Neg(self._ground_term(t.arg, s, env, rb))
        if isinstance(t, A.Pow):
            return A.Pow(self._ground_term(t.base, s, env, rb), t.exp)
        if isinstance(t, A.Cond):
            return A.Cond(self._ground(t.cond, s, env, rb), self._ground_term(t.then, s, env, rb),
                          self._ground_term(t.orelse, s, env, rb))
        raise _Unknown("function applied to a quantified real")

    # -------------------------------------------------------- programs

    def successors(self, p: A.Program, s: State, env: Optional[dict] = None) -> List[Tuple[State, Trace]]:
        return self._succ(p, s, env or {})[0]

    def successors_exact(self, p: A.Program, s: State, env: Optional[dict] = None):
        """(successor list, whether the list is the complete transition set)."""
        return self._succ(p, s, env or {})

    def _succ(self, p, s, env):
        out, exact = self._succ_raw(p, s, env)
        seen = {}
        for st, tr in out:
            seen.setdefault(st, tr)
        if len(seen) > self.bounds.max_branch:
            raise BoundExceeded(f"more than {self.bounds.max_branch} successors")
        return list(seen.items()), exact

    def _succ_raw(self, p, s, env):
        if isinstance(p, A.Test):
            v = self.decide(p.cond, s, env)
            if v is True:
                return [(s, ())], True
            return [], v is False
        if isinstance(p, A.Choice):
            a, ea = self._succ(p.left, s, env)
            b, eb = self._succ(p.right, s, env)
            return a + b, ea and eb
        if isinstance(p, A.Seq):
            out, exact = [], True
            first, e1 = self._succ(p.left, s, env)
            exact = exact and e1
            for s1, t1 in first:
                nxt, e2 = self._succ(p.right, s1, env)
                exact = exact and e2
                out.extend((s2, t1 + t2) for s2, t2 in nxt)
                if len(out) > self.bounds.max_branch:
                    raise BoundExceeded(f"more than {self.bounds.max_branch} successors")
            return out, exact
        if isinstance(p, A.Star):
            return self._star(p, s, env)
        if isinstance(p, A.QAssign):
            return self._assign(p, s, env), True
        if isinstance(p, A.QOde):
            return self._ode(p, s, env), False
        if isinstance(p, A.NewAssign):
            return self._new(p, s, env), True
        raise TypeError(p)

    def _star(self, p, s, env):
        seen = {s: ()}
        frontier = [(s, ())]
        exact = True
        for _ in range(self.bounds.max_loop_unroll):
            nxt = []
            for st, tr in frontier:
                succ, e = self._succ(p.body, st, env)
                exact = exact and e
                for s2, t2 in succ:
                    if s2 not in seen:
                        seen[s2] = tr + t2
                        nxt.append((s2, tr + t2))
                if len(seen) > self.bounds.max_branch:
                    raise BoundExceeded(f"more than {self.bounds.max_branch} loop states")
            frontier = nxt
            if not frontier:
                return list(seen.items()), exact
        # stopped by the unroll bound: the fixpoint was not reached
        return list(seen.items()), exact and not frontier

    # --- assignments

    def _writes(self, p: A.QAssign, s: State, env, objects=None):
        """position -> list of candidate values (several only without injectivity)."""
        writes: Dict[tuple, list] = {}
        envs = [env] if p.qvar is None else [{**env, p.qvar: o} for o in (objects or s.domain(p.sort))]
        for e in envs:
            for eq in p.eqns:
                args = tuple(self.eval_term(a, s, e) for a in eq.lhs.args)
                val = self.eval_term(eq.rhs, s, e)
                vals = writes.setdefault((eq.lhs.name, args), [])
                if val not in vals:
                    vals.append(val)
        return writes

    def _assign(self, p: A.QAssign, s: State, env):
        writes = self._writes(p, s, env)
        keys = list(writes)
        frag = program_str(p)
        out = []
        for combo in itertools.product(*(writes[k] for k in keys)):
            s2 = s.update(dict(zip(keys, combo)))
            out.append((s2, ((frag, s.diff(s2)),)))
        return out

    def _new(self, p: A.NewAssign, s: State, env):
        eps = A.eps_name(p.sort)
        cands = [(s, o) for o in s.domain(p.sort) if s.lookup(eps, (o,)) != 1]
        cands.append(s.allocate(p.sort))
        args = tuple(self.eval_term(a, s, env) for a in p.target.args)
        out = []
        for base, o in cands:
            s2 = base.update({(p.target.name, args): o, (eps, (o,)): Fraction(1)})
            out.append((s2, ((program_str(p), s.diff(s2)),)))
        return out

    # --- continuous evolution

    def _solution(self, p: A.QOde):
        key = A.strip_spans(p)
        if key not in self._solutions:
            sys = QOdeSystem.of(key, _TIME)
            try:
                self._solutions[key] = (sys, solve_qode(sys))
            except (UnsupportedOde, QdlError):
                self._solutions[key] = (sys, None)
        return self._solutions[key]

    def _ode(self, p: A.QOde, s: State, env):
        injective = p.qvar is None or all(
            any(isinstance(a, A.Var) and a.name == p.qvar for a in e.lhs.args) for e in p.eqns)
        if not injective:
            # every object is a possible match; one evolution per choice
            out = []
            for o in s.domain(p.sort):
                single = A.QOde(None, None, p.eqns, p.domain)
                out.extend(self._ode(single, s, {**env, p.qvar: o}))
            return out
        sys, sol = self._solution(p)
        frag = program_str(p)
        out = []
        for T in self.bounds.time_grid:
            ok = True
            states = []
            n = self.bounds.ode_substeps
            for k in range(n + 1):
                tau = T * k / n
                st = self._flow(p, sys, sol, s, env, tau)
                if st is None:
                    ok = False
                    break
                if not self._domain_holds(p, st, env):
                    ok = False
                    break
                states.append(st)
                if T == 0:
                    break
            if ok:
                end = states[-1]
                out.append((end, ((f"{frag} for {show(T)}", s.diff(end)),)))
        return out

    def _domain_holds(self, p, st, env):
        if isinstance(p.domain, A.TrueF):
            return True
        if p.qvar is None:
            return self.decide(p.domain, st, env) is True
        return all(self.decide(p.domain, st, {**env, p.qvar: o}) is True for o in st.domain(p.sort))

    def _flow(self, p, sys, sol, s, env, tau):
        if tau == 0:
            return s
        if sol is not None:
            upd = mk_evolve_update(sys, sol, A.Num(tau))
            res = self._assign(upd, s, env)
            return res[0][0] if len(res) == 1 else None
        return self._numeric(p, s, env, tau)

    def _numeric(self, p, s, env, tau):
        envs = [env] if p.qvar is None else [{**env, p.qvar: o} for o in s.domain(p.sort)]
        jobs = []
        for e in envs:
            for eq in p.eqns:
                args = tuple(self.eval_term(a, s, e) for a in eq.lhs.args)
                jobs.append(((eq.lhs.name, args), eq.rhs, e))
        init = {pos: float(s.lookup(*pos)) for pos, _, _ in jobs}

        def slope(y):
            st = s.update({pos: Fraction(v) for pos, v in y.items()})
            return {pos: float(self.eval_term(rhs, st, e)) for pos, rhs, e in jobs}

        steps = max(self.bounds.ode_substeps * 16, 64)
        try:
            y = numeric_flow(init, steps, float(tau), slope)
        except (OverflowError, ValueError):
            return None
        return s.update({pos: Fraction(v) for pos, v in y.items()}, tainted=True)


def format_trace(trace: Trace) -> List[str]:
    return [f"step {n}: {frag} -> {diff}" for n, (frag, diff) in enumerate(trace, 1)]

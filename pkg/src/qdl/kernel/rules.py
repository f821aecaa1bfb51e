"""Proof rules.

Three kinds of rules:

* ``local`` rules rewrite a subformula into an equivalent one and may be
  applied at any path inside a sequent formula;
* ``top`` rules work on a top-level sequent formula and may branch;
* ``goal`` rules look at the whole sequent (no position).

Premises are returned as sequents, or as ``(sequent, True)`` for global
premises that are proved without the surrounding context.
"""

from __future__ import annotations

import itertools
import shlex
from typing import Callable, Dict, List, Optional, Tuple

from ..arith.lift import from_qf, to_qf
from ..arith.qf import TT
from ..arith.vs import QE
from ..errors import (NoSolution, NonAdmissibleInstantiation, NotAdmissible, NotInjective, QdlError,
                      QeInapplicable, RuleMismatch, SkolemDependency, UnsupportedDegree, UnsupportedOde,
                      VariantVariableOccurs)
from ..ode import QOdeSystem, mk_evolve_update, solve_qode
from ..subst import Substitution, admissible, apply_subst, free_vars, rename_var, subst_vars, symbols
from ..syntax import ast as A
from ..syntax.desugar import desugar_conditional
from ..syntax.parser import parse_formula, parse_term
from ..syntax.printer import formula_str, term_str
from ..syntax.typecheck import check, sort_of
from .core import ANTE, SUCC, Sequent, alpha_eq, replace_sub, subformula

Premise = object  # Sequent | (Sequent, bool)


class Rule:
    def __init__(self, name: str, kind: str, fn: Callable, sides=(ANTE, SUCC)):
        self.name, self.kind, self.fn, self.sides = name, kind, fn, sides


RULES: Dict[str, Rule] = {}


def rule(*names, kind="top", sides=(ANTE, SUCC)):
    def deco(fn):
        for n in names:
            RULES[n] = Rule(names[0], kind, fn, sides)
        return fn

    return deco


def run_rule(tree, node, app) -> List[Premise]:
    r = RULES.get(app.rule)
    if r is None:
        raise RuleMismatch(f"unknown rule {app.rule!r}")
    seq = node.sequent
    if r.kind == "goal":
        if app.pos is not None and r.name != "qe":
            raise RuleMismatch(f"{app.rule} takes no position")
        return r.fn(tree, node, app.args, app.pos)
    if app.pos is None:
        raise RuleMismatch(f"{app.rule} needs a position")
    pos = app.pos
    fs = seq.side(pos.side)
    if not 0 <= pos.index < len(fs):
        raise RuleMismatch(f"no formula at {pos}")
    if r.kind == "local":
        sub = subformula(fs[pos.index], pos.path)
        new = r.fn(tree, sub, app.args)
        return [seq.replace_at(pos.side, pos.index, [replace_sub(fs[pos.index], pos.path, new)])]
    if pos.path:
        raise RuleMismatch(f"{app.rule} applies to top-level formulas only")
    if pos.side not in r.sides:
        raise RuleMismatch(f"{app.rule} does not apply in the {'antecedent' if pos.side == ANTE else 'succedent'}")
    return r.fn(tree, seq, pos, fs[pos.index], app.args)


# ------------------------------------------------------------ helpers


def _want(f, cls, rname):
    if not isinstance(f, cls):
        names = cls.__name__ if isinstance(cls, type) else "/".join(c.__name__ for c in cls)
        raise RuleMismatch(f"{rname} expects {names}, found {formula_str(f)}")
    return f


def _scope(tree):
    return list(tree.vars.items())


def parse_arg_formula(tree, text: str, extra=()) -> A.Formula:
    f = parse_formula(text, tree.sig, allow_internal=True, scope=_scope(tree) + list(extra))
    return check(f, tree.sig)


def parse_arg_term(tree, text: str) -> A.Term:
    t = parse_term(text, tree.sig, allow_internal=True, scope=_scope(tree))
    return check(t, tree.sig)


def _no_args(args, rname):
    if args:
        raise RuleMismatch(f"{rname} takes no arguments")


# ------------------------------------------------------- propositional


@rule("notr", sides=(SUCC,))
def _notr(tree, seq, pos, f, args):
    f = _want(f, A.Not, "notr")
    s = seq.replace_at(SUCC, pos.index, [])
    return [s.add(ANTE, f.arg)]


@rule("notl", sides=(ANTE,))
def _notl(tree, seq, pos, f, args):
    f = _want(f, A.Not, "notl")
    s = seq.replace_at(ANTE, pos.index, [])
    return [s.add(SUCC, f.arg)]


@rule("andr", sides=(SUCC,))
def _andr(tree, seq, pos, f, args):
    f = _want(f, A.And, "andr")
    return [seq.replace_at(SUCC, pos.index, [f.left]), seq.replace_at(SUCC, pos.index, [f.right])]


@rule("andl", sides=(ANTE,))
def _andl(tree, seq, pos, f, args):
    f = _want(f, A.And, "andl")
    return [seq.replace_at(ANTE, pos.index, [f.left, f.right])]


@rule("orr", sides=(SUCC,))
def _orr(tree, seq, pos, f, args):
    f = _want(f, A.Or, "orr")
    return [seq.replace_at(SUCC, pos.index, [f.left, f.right])]


@rule("orl", sides=(ANTE,))
def _orl(tree, seq, pos, f, args):
    f = _want(f, A.Or, "orl")
    return [seq.replace_at(ANTE, pos.index, [f.left]), seq.replace_at(ANTE, pos.index, [f.right])]


@rule("implyr", "->r", sides=(SUCC,))
def _implyr(tree, seq, pos, f, args):
    f = _want(f, A.Imply, "implyr")
    return [seq.replace_at(SUCC, pos.index, [f.right]).add(ANTE, f.left)]


@rule("implyl", "->l", sides=(ANTE,))
def _implyl(tree, seq, pos, f, args):
    f = _want(f, A.Imply, "implyl")
    rest = seq.replace_at(ANTE, pos.index, [])
    return [rest.add(SUCC, f.left), seq.replace_at(ANTE, pos.index, [f.right])]


@rule("equivr", "<->r", sides=(SUCC,))
def _equivr(tree, seq, pos, f, args):
    f = _want(f, A.Equiv, "equivr")
    return [seq.replace_at(SUCC, pos.index, [f.right]).add(ANTE, f.left),
            seq.replace_at(SUCC, pos.index, [f.left]).add(ANTE, f.right)]


@rule("equivl", "<->l", sides=(ANTE,))
def _equivl(tree, seq, pos, f, args):
    f = _want(f, A.Equiv, "equivl")
    rest = seq.replace_at(ANTE, pos.index, [])
    return [seq.replace_at(ANTE, pos.index, [f.left, f.right]), rest.add(SUCC, f.left).add(SUCC, f.right)]


@rule("hidel", "weakenl", sides=(ANTE,))
def _hidel(tree, seq, pos, f, args):
    return [seq.replace_at(ANTE, pos.index, [])]


@rule("hider", "weakenr", sides=(SUCC,))
def _hider(tree, seq, pos, f, args):
    return [seq.replace_at(SUCC, pos.index, [])]


@rule("ax", "close", kind="goal")
def _ax(tree, node, args, pos):
    seq = node.sequent
    if any(isinstance(f, A.TrueF) for f in seq.succ) or any(isinstance(f, A.FalseF) for f in seq.ante):
        return []
    for a in seq.ante:
        for s in seq.succ:
            if alpha_eq(a, s):
                return []
    raise RuleMismatch("no formula occurs on both sides")


@rule("truer", kind="goal")
def _truer(tree, node, args, pos):
    if any(isinstance(f, A.TrueF) for f in node.sequent.succ):
        return []
    raise RuleMismatch("no 'true' in the succedent")


@rule("falsel", kind="goal")
def _falsel(tree, node, args, pos):
    if any(isinstance(f, A.FalseF) for f in node.sequent.ante):
        return []
    raise RuleMismatch("no 'false' in the antecedent")


@rule("cut", kind="goal")
def _cut(tree, node, args, pos):
    if len(args) != 1:
        raise RuleMismatch("cut needs one formula argument")
    phi = parse_arg_formula(tree, args[0])
    seq = node.sequent
    return [seq.add(SUCC, phi), seq.add(ANTE, phi)]


@rule("cond", kind="local")
def _cond(tree, f, args):
    _no_args(args, "cond")
    out = desugar_conditional(f)
    if out == f:
        raise RuleMismatch("no conditional term")
    return out


# ---------------------------------------------------------- quantifiers


def _skolemize(tree, seq, pos, f, cls, rname):
    f = _want(f, cls, rname)
    fv = free_vars(f)
    deps = [v for v in tree.vars if v in fv]
    name = tree.new_name(f.var)
    tree.declare_function(name, tuple(tree.vars[v] for v in deps), f.sort)
    tree.skolems[name] = tuple(deps)
    sk = A.Fn(name, tuple(A.Var(v, tree.vars[v]) for v in deps))
    body = subst_vars(f.body, {f.var: sk}, tree.fresh)
    return [seq.replace_at(pos.side, pos.index, [body])]


@rule("allr", "forallr", sides=(SUCC,))
def _allr(tree, seq, pos, f, args):
    _no_args(args, "allr")
    return _skolemize(tree, seq, pos, f, A.Forall, "allr")


@rule("existsl", sides=(ANTE,))
def _existsl(tree, seq, pos, f, args):
    _no_args(args, "existsl")
    return _skolemize(tree, seq, pos, f, A.Exists, "existsl")


def _instantiate(tree, seq, pos, f, cls, rname, args):
    """Instantiate leading quantifiers (one per argument; none gives a fresh variable)."""
    f = _want(f, cls, rname)
    terms = list(args) or [None]
    body = f
    guards = []
    for text in terms:
        while cls is A.Forall and isinstance(body, A.Imply) and isinstance(body.right, A.Forall):
            # forall i. P -> forall j. Q  instantiates like  forall i, j. P -> Q
            if body.right.var in free_vars(body.left):
                raise RuleMismatch(f"{rname}: inner quantifier captures a guard variable")
            guards.append(body.left)
            body = body.right
        if not isinstance(body, cls):
            raise RuleMismatch(f"{rname}: more terms than quantifiers")
        if text is not None:
            t = parse_arg_term(tree, text)
            s = sort_of(t, tree.sig)
            if s != body.sort:
                raise NonAdmissibleInstantiation(f"{text} has sort {s}, expected {body.sort}")
        else:
            name = tree.new_name(body.var.upper())
            tree.declare_var(name, body.sort)
            t = A.Var(name, body.sort)
        try:
            sigma = {body.var: t}
            guards = [subst_vars(g, sigma, tree.fresh) for g in guards]
            body = subst_vars(body.body, sigma, tree.fresh)
        except NotAdmissible as e:
            raise NonAdmissibleInstantiation(str(e))
    for g in reversed(guards):
        body = A.Imply(g, body)
    return [seq.add(pos.side, body)]


@rule("alll", "foralll", sides=(ANTE,))
def _alll(tree, seq, pos, f, args):
    return _instantiate(tree, seq, pos, f, A.Forall, "alll", args)


@rule("existsr", sides=(SUCC,))
def _existsr(tree, seq, pos, f, args):
    return _instantiate(tree, seq, pos, f, A.Exists, "existsr", args)


# ------------------------------------------------------- program rules


def _modal(f, prog_cls, rname):
    if not isinstance(f, (A.Box, A.Diamond)) or not isinstance(f.prog, prog_cls):
        raise RuleMismatch(f"{rname} does not match {formula_str(f)}")
    return isinstance(f, A.Box)


@rule("[;]", "<;>", "seq", kind="local")
def _seq(tree, f, args):
    box = _modal(f, A.Seq, "[;]")
    M = A.Box if box else A.Diamond
    return M(f.prog.left, M(f.prog.right, f.body))


@rule("[++]", "<++>", "choice", kind="local")
def _choice(tree, f, args):
    box = _modal(f, A.Choice, "[++]")
    M = A.Box if box else A.Diamond
    a, b = M(f.prog.left, f.body), M(f.prog.right, f.body)
    return A.And(a, b) if box else A.Or(a, b)


@rule("[?]", "<?>", "test", kind="local")
def _test(tree, f, args):
    box = _modal(f, A.Test, "[?]")
    return A.Imply(f.prog.cond, f.body) if box else A.And(f.prog.cond, f.body)


@rule("[*]", "<*>", "unfold", kind="local")
def _unfold(tree, f, args):
    box = _modal(f, A.Star, "[*]")
    M = A.Box if box else A.Diamond
    step = M(f.prog.body, f)
    return A.And(f.body, step) if box else A.Or(f.body, step)


def check_injective(p) -> None:
    """Syntactic injectivity: each symbol once, and the quantified variable as a direct argument."""
    names = [e.lhs.name for e in p.eqns]
    if len(set(names)) != len(names):
        raise NotInjective(f"symbol assigned twice in {term_str(A.Upd(p, A.Num(0)))}")
    if p.qvar is not None:
        qv = A.Var(p.qvar, p.sort)
        for e in p.eqns:
            if not any(A.strip_spans(a) == qv for a in e.lhs.args):
                raise NotInjective(f"{e.lhs.name} is not indexed by {p.qvar}")


def _fv_prog(p) -> set:
    return free_vars(p)


def push_update(tree, U: A.QAssign, node):
    """Push the deterministic update ``U`` into a formula or term."""
    assigned = set(U.symbols)
    fvU = _fv_prog(U)

    def touched(n) -> bool:
        return bool(symbols(n) & assigned)

    def pf(f):
        if not touched(f):
            return f
        if isinstance(f, A.Cmp):
            return A.Cmp(f.op, pt(f.left), pt(f.right))
        if isinstance(f, A.Not):
            return A.Not(pf(f.arg))
        if isinstance(f, A.BINARY):
            return type(f)(pf(f.left), pf(f.right))
        if isinstance(f, (A.Forall, A.Exists)):
            var, body = f.var, f.body
            if var in fvU:
                new = tree.new_name(var)
                body = rename_var(body, var, new, f.sort)
                var = new
            return type(f)(var, f.sort, pf(body))
        if isinstance(f, (A.Box, A.Diamond)):
            return A.Box(U, f)
        return f

    def pt(t):
        if not touched(t):
            return t
        if isinstance(t, A.Fn):
            if t.name in assigned:
                return A.Upd(U, t)
            return A.Fn(t.name, tuple(pt(a) for a in t.args))
        if isinstance(t, A.Cond):
            return A.Cond(pf(t.cond), pt(t.then), pt(t.orelse))
        if isinstance(t, A.Upd):
            return A.Upd(U, t)
        return t.map_children(pt)

    return pf(node) if isinstance(node, A.Formula) else pt(node)


@rule("[:]", "<:>", "update", kind="local")
def _update(tree, f, args):
    _no_args(args, "[:]")
    _modal(f, A.QAssign, "[:]")
    U = A.strip_spans(f.prog)
    if U.qvar is not None and U.eqns and all(
            A.Var(U.qvar, U.sort) not in [A.strip_spans(a) for a in e.lhs.args] for e in U.eqns):
        raise NotInjective("quantified assignment without indexed left-hand sides; use [:*]")
    check_injective(U)
    # deterministic and total: box and diamond agree
    out = push_update(tree, U, A.strip_spans(f.body))
    if isinstance(out, A.Box) and out.prog == U and out.body == A.strip_spans(f.body):
        raise RuleMismatch("update cannot be pushed into a modality")
    return out


@rule("[:*]", "<:*>", "anyassign", kind="local")
def _anyassign(tree, f, args):
    _no_args(args, "[:*]")
    box = _modal(f, A.QAssign, "[:*]")
    p = A.strip_spans(f.prog)
    if p.qvar is None:
        raise RuleMismatch("[:*] needs a quantified assignment")
    qv = A.Var(p.qvar, p.sort)
    if any(qv in [A.strip_spans(a) for a in e.lhs.args] for e in p.eqns):
        raise RuleMismatch("left-hand sides mention the quantified variable; use [:]")
    var = p.qvar
    body = f.body
    if var in free_vars(body):
        var = tree.new_name(var)
    eqns = tuple(A.Eqn(e.lhs, subst_vars(e.rhs, {p.qvar: A.Var(var, p.sort)}) if var != p.qvar else e.rhs)
                 for e in p.eqns)
    inner = A.QAssign(None, None, eqns)
    check_injective(inner)
    if box:
        return A.Forall(var, p.sort, A.Box(inner, body))
    return A.Exists(var, p.sort, A.Diamond(inner, body))


def resolve_upd(tree, t: A.Upd) -> Optional[A.Term]:
    """One [:=] step on ``upd[U](f(u))``; None when ``t`` is not of that shape."""
    U, inner = t.prog, t.term
    if not isinstance(inner, A.Fn):
        return None
    eq = next((e for e in U.eqns if e.lhs.name == inner.name), None)
    if eq is None:
        return inner if not (symbols(inner) & set(U.symbols)) else None
    u = tuple(push_update(tree, U, a) for a in inner.args)
    s = tuple(A.strip_spans(a) for a in eq.lhs.args)
    theta = A.strip_spans(eq.rhs)
    if U.qvar is not None:
        qv = A.Var(U.qvar, U.sort)
        k = s.index(qv)
        sigma = {U.qvar: u[k]}
        theta = subst_vars(theta, sigma, tree.fresh)
        s = tuple(subst_vars(a, sigma, tree.fresh) for a in s)
    guards = [A.Cmp("=", a, b) for a, b in zip(s, u) if a != b]
    if not guards:
        return theta
    return A.Cond(A.conj(guards), theta, A.Fn(inner.name, u))


def _resolve_all(tree, node):
    """Rewrite every resolvable update term (innermost first) until none is left."""
    changed = False

    def term(t):
        nonlocal changed
        if isinstance(t, A.Upd):
            inner = term(t.term) if not isinstance(t.term, A.Fn) else t.term
            if inner != t.term:
                t = A.Upd(t.prog, inner)
            r = resolve_upd(tree, t)
            if r is not None:
                changed = True
                return term(r)
            return t
        if isinstance(t, A.Cond):
            return A.Cond(form(t.cond), term(t.then), term(t.orelse))
        return t.map_children(term)

    def form(f):
        if isinstance(f, A.Cmp):
            return A.Cmp(f.op, term(f.left), term(f.right))
        if isinstance(f, (A.Box, A.Diamond)):
            return type(f)(f.prog, form(f.body))
        if isinstance(f, A.Formula):
            return f.map_children(form)
        return f

    out = form(node)
    return out, changed


@rule("[:=]", "<:=>", "assign", kind="local")
def _assign(tree, f, args):
    _no_args(args, "[:=]")
    out, changed = _resolve_all(tree, A.strip_spans(f))
    if not changed:
        raise RuleMismatch("no update term to resolve")
    return out


@rule("[']", "<'>", "ode", kind="local")
def _ode(tree, f, args):
    _no_args(args, "[']")
    box = _modal(f, A.QOde, "[']")
    p = A.strip_spans(f.prog)
    check_injective(p)
    t = tree.new_name("t")
    sys = QOdeSystem.of(p, time_var=t)
    try:
        sol = solve_qode(sys)
    except UnsupportedOde as e:
        raise NoSolution(str(e))
    keep = symbols(f.body) | symbols(p.domain)
    tv = A.Var(t, A.REAL)

    def after(tt, body, M):
        upd = mk_evolve_update(sys, sol, tt, keep)
        return M(upd, body) if upd.eqns else body

    guard = A.TRUE
    if not isinstance(p.domain, A.TrueF):
        tilde = tree.new_name("s")
        sv = A.Var(tilde, A.REAL)
        rng = A.And(A.Cmp("<=", A.Num(0), sv), A.Cmp("<=", sv, tv))
        guard = A.Forall(tilde, A.REAL, A.Imply(rng, after(sv, p.domain, A.Box)))
    nonneg = A.Cmp(">=", tv, A.Num(0))
    if box:
        inner = after(tv, f.body, A.Box)
        if not isinstance(guard, A.TrueF):
            inner = A.Imply(guard, inner)
        return A.Forall(t, A.REAL, A.Imply(nonneg, inner))
    inner = A.conj([nonneg, guard, after(tv, f.body, A.Diamond)])
    return A.Exists(t, A.REAL, inner)


def _eps_update(p) -> Optional[Tuple[str, A.Term]]:
    """``eps_C(nu) := 1`` -> (C, nu)."""
    if not isinstance(p, A.QAssign) or p.qvar is not None or len(p.eqns) != 1:
        return None
    e = p.eqns[0]
    if not e.lhs.name.startswith(A.EPS_PREFIX) or A.strip_spans(e.rhs) != A.Num(1) or len(e.lhs.args) != 1:
        return None
    return e.lhs.name[len(A.EPS_PREFIX):], A.strip_spans(e.lhs.args[0])


def eps_assign(nu: A.Term, sort: str) -> A.QAssign:
    return A.QAssign(None, None, (A.Eqn(A.eps(nu, sort), A.Num(1)),))


@rule("new", "[new]", "<new>", kind="local")
def _new(tree, f, args):
    _no_args(args, "new")
    box = _modal(f, A.NewAssign, "new")
    p = A.strip_spans(f.prog)
    if p.target.args:
        raise RuleMismatch("new is supported for nullary targets only")
    nu = tree.new_name("nu")
    nv = A.Var(nu, p.sort)
    body = A.strip_spans(f.body)
    sub = Substitution.of([(p.target, nv)])
    if admissible(sub, body) is None:
        body = apply_subst(sub, body, tree.fresh, check=False)
    else:
        M = A.Box if box else A.Diamond
        body = M(A.QAssign(None, None, (A.Eqn(p.target, nv),)), body)
    fresh_obj = A.Not(A.created(nv, p.sort))
    if box:
        return A.Forall(nu, p.sort, A.Imply(fresh_obj, A.Box(eps_assign(nv, p.sort), body)))
    return A.Exists(nu, p.sort, A.And(fresh_obj, A.Diamond(eps_assign(nv, p.sort), body)))


def _split_actual(body, sort, conn):
    """Match ``forall C i. eps_C(i)=1 -> phi`` (conn=Imply) or the exists/And form."""
    q = A.Forall if conn is A.Imply else A.Exists
    if not isinstance(body, q) or body.sort != sort or not isinstance(body.body, conn):
        return None
    guard = A.strip_spans(body.body.left)
    if guard != A.created(A.Var(body.var, sort), sort):
        return None
    return body.var, body.body.right


def _nu_quant(tree, f, conn, rname):
    if not isinstance(f, (A.Box, A.Diamond)):
        raise RuleMismatch(f"{rname} expects [eps_C(nu) := 1] applied to an actualist quantifier")
    hit = _eps_update(A.strip_spans(f.prog))
    if hit is None:
        raise RuleMismatch(f"{rname} expects a createdness update")
    sort, nu = hit
    m = _split_actual(A.strip_spans(f.body), sort, conn)
    if m is None:
        raise RuleMismatch(f"{rname} expects an actualist {'forall' if conn is A.Imply else 'exists'} over {sort}")
    var, phi = m
    M = type(f)
    at_nu = M(f.prog, subst_vars(phi, {var: nu}, tree.fresh))
    if var in free_vars(nu):
        new = tree.new_name(var)
        phi = rename_var(phi, var, new, sort)
        var = new
    rest = M(f.prog, phi)
    guard = A.created(A.Var(var, sort), sort)
    if conn is A.Imply:
        return A.And(at_nu, A.Forall(var, sort, A.Imply(guard, rest)))
    return A.Or(at_nu, A.Exists(var, sort, A.And(guard, rest)))


@rule("nuall", "ν∀", kind="local")
def _nuall(tree, f, args):
    _no_args(args, "nuall")
    return _nu_quant(tree, f, A.Imply, "nuall")


@rule("nuexists", "ν∃", kind="local")
def _nuexists(tree, f, args):
    _no_args(args, "nuexists")
    return _nu_quant(tree, f, A.And, "nuexists")


@rule("nuA", "νA", kind="local")
def _nuA(tree, f, args):
    _no_args(args, "nuA")
    if not isinstance(f, (A.Box, A.Diamond)) or not isinstance(f.body, (A.Box, A.Diamond)):
        raise RuleMismatch("nuA expects [eps_C(nu) := 1][forallE C i. ...]phi")
    hit = _eps_update(A.strip_spans(f.prog))
    if hit is None:
        raise RuleMismatch("nuA expects a createdness update first")
    sort, nu = hit
    inner = f.body
    a = A.strip_spans(inner.prog)
    if not isinstance(a, A.QAssign) or a.qvar is None or a.sort != sort:
        raise RuleMismatch(f"nuA expects an actualist assignment over {sort}")
    check_injective(a)
    i = a.qvar
    if i in free_vars(nu):
        new = tree.new_name(i)
        a = rename_var(A.Box(a, A.TRUE), i, new, sort).prog
        a = A.QAssign(new, sort, a.eqns)
        i = new
    iv = A.Var(i, sort)
    eps = A.eps_name(sort)
    assigned = set(a.symbols)
    if eps in assigned:
        raise RuleMismatch("assignment changes createdness")
    if symbols(nu) & assigned:
        raise RuleMismatch("the new object's term mentions an assigned symbol")
    eqns = []
    for e in a.eqns:
        r = e.rhs
        if not (isinstance(r, A.Cond) and r.cond == A.created(iv, sort) and r.orelse == e.lhs):
            raise RuleMismatch(f"right-hand side of {e.lhs.name} is not actualist")
        if eps in symbols(r.then) or any(eps in symbols(x) for x in e.lhs.args):
            raise RuleMismatch("assignment reads createdness")
        guard = A.Or(A.Cmp("=", iv, nu), A.created(iv, sort))
        eqns.append(A.Eqn(e.lhs, A.Cond(guard, r.then, e.lhs)))
    plus = A.QAssign(i, sort, tuple(eqns))
    return type(inner)(plus, type(f)(f.prog, inner.body))


# ---------------------------------------------------------- global rules


def _star(f, box, rname):
    M = A.Box if box else A.Diamond
    if not isinstance(f, M) or not isinstance(f.prog, A.Star):
        raise RuleMismatch(f"{rname} expects {'[a*]' if box else '<a*>'}phi")
    return f.prog


@rule("ind", sides=(SUCC,))
def _ind(tree, seq, pos, f, args):
    star = _star(f, True, "ind")
    if args:
        if len(args) != 1:
            raise RuleMismatch("ind takes one invariant")
        inv = parse_arg_formula(tree, args[0])
    else:
        h = tree.problem.hint("invariant", star.label)
        if h is None:
            raise RuleMismatch(f"no invariant for loop {star.label or '(unlabelled)'}")
        inv = h.formula
    rest = seq.replace_at(SUCC, pos.index, [])
    return [rest.add(SUCC, inv),
            (Sequent((inv,), (A.Box(star.body, inv),)), True),
            (Sequent((inv,), (f.body,)), True)]


@rule("con", sides=(SUCC,))
def _con(tree, seq, pos, f, args):
    star = _star(f, False, "con")
    if args:
        if len(args) != 2:
            raise RuleMismatch("con takes a variable and a variant")
        var = args[0]
        phi = parse_arg_formula(tree, args[1], extra=[(var, A.REAL)])
    else:
        h = tree.problem.hint("variant", star.label)
        if h is None or h.var is None:
            raise RuleMismatch(f"no variant for loop {star.label or '(unlabelled)'}")
        var, phi = h.var, h.formula
    from ..subst import all_names

    if var in all_names(star.body):
        raise VariantVariableOccurs(f"variant variable {var} occurs in the loop body")
    v = A.Var(var, A.REAL)
    dec = subst_vars(phi, {var: A.Minus(v, A.Num(1))})
    step = A.Forall(var, A.REAL, A.Imply(A.And(A.Cmp(">", v, A.Num(0)), phi), A.Diamond(star.body, dec)))
    done = A.Exists(var, A.REAL, A.And(A.Cmp("<=", v, A.Num(0)), phi))
    rest = seq.replace_at(SUCC, pos.index, [])
    return [rest.add(SUCC, A.Exists(var, A.REAL, phi)),
            (Sequent((), (step,)), True),
            (Sequent((done,), (f.body,)), True)]


def _gen(tree, seq, pos, f, args, M, rname):
    if not isinstance(f, M):
        raise RuleMismatch(f"{rname} expects a {'box' if M is A.Box else 'diamond'}")
    if len(args) != 1:
        raise RuleMismatch(f"{rname} needs the intermediate postcondition")
    phi = parse_arg_formula(tree, args[0])
    return [seq.replace_at(SUCC, pos.index, [M(f.prog, phi)]), (Sequent((phi,), (f.body,)), True)]


@rule("[]gen", "boxgen", sides=(SUCC,))
def _boxgen(tree, seq, pos, f, args):
    return _gen(tree, seq, pos, f, args, A.Box, "[]gen")


@rule("<>gen", "diagen", sides=(SUCC,))
def _diagen(tree, seq, pos, f, args):
    return _gen(tree, seq, pos, f, args, A.Diamond, "<>gen")


# ------------------------------------------------------------ partitions


def set_partitions(items, same_kind=lambda a, b: True):
    """All partitions of ``items`` into blocks, each block of one kind."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest, same_kind):
        for k, block in enumerate(part):
            if same_kind(first, block[0]):
                yield part[:k] + [[first] + block] + part[k + 1:]
        yield [[first]] + part


def _rep_map(part) -> Dict[A.Term, A.Term]:
    out = {}
    for block in part:
        for m in block:
            out[m] = block[0]
    return out


def partition_guard(part) -> A.Formula:
    eqs = [A.Cmp("=", m, b[0]) for b in part for m in b[1:]]
    reps = [b[0] for b in part]
    neqs = [A.Cmp("!=", a, b) for a, b in itertools.combinations(reps, 2)]
    return A.conj(eqs + neqs)


def _obj_literal(f):
    """(a, b, equal?) for object (dis)equalities, else None."""
    neg = False
    while isinstance(f, A.Not):
        neg, f = not neg, f.arg
    if isinstance(f, A.Cmp) and f.op in ("=", "!="):
        eq = (f.op == "=") != neg
        return A.strip_spans(f.left), A.strip_spans(f.right), eq
    return None


def _consistent(part, literals, sig) -> bool:
    rep = _rep_map(part)
    for a, b, eq in literals:
        if a in rep and b in rep and (rep[a] == rep[b]) != eq:
            return False
    return True


# ------------------------------------------------------------------- i∀


def _is_real(t, sig) -> bool:
    return sort_of(t, sig) == A.REAL


def _occurrences(f, syms, sig):
    """Eligible occurrences: R-valued applications of ``syms`` with unbound args, outside modalities."""
    found = []

    def term(t, bound):
        if isinstance(t, A.Upd):
            return
        if isinstance(t, A.Fn) and t.name in syms and _is_real(t, sig):
            if not (free_vars(t) & bound) and not any(isinstance(n, A.Upd) for n in t.walk()):
                found.append(t)
                return
        if isinstance(t, A.Cond):
            form(t.cond, bound)
            term(t.then, bound)
            term(t.orelse, bound)
            return
        for c in t.children():
            term(c, bound)

    def form(g, bound):
        if isinstance(g, A.Cmp):
            term(g.left, bound)
            term(g.right, bound)
        elif isinstance(g, (A.Forall, A.Exists)):
            form(g.body, bound | {g.var})
        elif isinstance(g, (A.Box, A.Diamond)):
            return
        else:
            for c in g.children():
                form(c, bound)

    form(f, frozenset())
    return found


def _replace_occ(f, mapping: Dict[A.Term, A.Term]):
    def term(t):
        if isinstance(t, A.Upd):
            return t
        if t in mapping:
            return mapping[t]
        if isinstance(t, A.Cond):
            return A.Cond(form(t.cond), term(t.then), term(t.orelse))
        return t.map_children(term)

    def form(g):
        if isinstance(g, A.Cmp):
            return A.Cmp(g.op, term(g.left), term(g.right))
        if isinstance(g, (A.Box, A.Diamond)):
            return g
        return g.map_children(form)

    return form(f)


def _var_base(name: str) -> str:
    core = name[len(A.EPS_PREFIX):] if name.startswith(A.EPS_PREFIX) else name.split("$")[0]
    letter = "E" if name.startswith(A.EPS_PREFIX) else (core[:1].upper() or "X")
    return letter if letter.isalpha() else "X"


@rule("iall", "i∀", kind="goal")
def _iall(tree, node, args, pos):
    seq = node.sequent
    sig = tree.sig
    if args:
        syms = set(args)
        for s in syms:
            d = sig.func(s)
            if d is None or d.result != A.REAL:
                raise RuleMismatch(f"{s} is not a real-valued function symbol")
    else:
        syms = {d.name for d in sig.all_functions() if d.result == A.REAL}
    for s in syms:
        d = sig.func(s)
        if d is not None and any(a == A.REAL for a in d.args):
            raise RuleMismatch(f"i∀ handles object or nullary arguments only ({s})")
    ante = [A.strip_spans(f) for f in seq.ante]
    succ = [A.strip_spans(f) for f in seq.succ]
    occ = {}
    for f in ante + succ:
        if not liftable(f):
            continue
        for o in _occurrences(f, syms, sig):
            occ.setdefault(o, None)
    if not occ:
        raise RuleMismatch("no abstractable occurrence")
    hit_a = [f for f in ante if liftable(f) and _occurrences(f, syms, sig)]
    hit_s = [f for f in succ if liftable(f) and _occurrences(f, syms, sig)]
    rest_a = [f for f in ante if f not in hit_a]
    rest_s = [f for f in succ if f not in hit_s]
    terms = []
    for o in occ:
        for a in o.args:
            if a not in terms:
                terms.append(a)
    sorts = {t: sort_of(t, sig) for t in terms}
    lits = [x for x in (_obj_literal(f) for f in ante) if x is not None]
    parts = [p for p in set_partitions(terms, lambda a, b: sorts[a] == sorts[b]) if _consistent(p, lits, sig)]
    if not parts:
        # the antecedent is contradictory on object literals
        return []
    names: Dict[Tuple, str] = {}

    def var_for(key) -> A.Var:
        if key not in names:
            names[key] = tree.new_name(_var_base(key[0]))
        return A.Var(names[key], A.REAL)

    for o in occ:  # finest partition first: stable naming
        var_for((o.name, o.args))
    bodies = []
    for part in parts:
        rep = _rep_map(part)
        mapping = {o: var_for((o.name, tuple(rep[a] for a in o.args))) for o in occ}
        body = Sequent(tuple(_replace_occ(f, mapping) for f in hit_a),
                       tuple(_replace_occ(f, mapping) for f in hit_s)).as_formula()
        bodies.append(body if len(parts) == 1 else A.Imply(partition_guard(part), body))
    body = A.conj(bodies)
    used = [v for v in names.values() if v in free_vars(body)]
    for v in reversed(used):
        body = A.Forall(v, A.REAL, body)
    node.note = ", ".join(f"{names[(o.name, o.args)]}={term_str(o)}" for o in occ)
    return [Sequent(tuple(rest_a), (body,) + tuple(rest_s))]


@rule("iexists", "i∃", kind="goal")
def _iexists(tree, node, args, pos):
    if not args:
        raise RuleMismatch("iexists needs a variable and the goals to merge")
    var, others = args[0], args[1:]
    if tree.vars.get(var) != A.REAL:
        raise RuleMismatch(f"{var} is not a real free variable of the proof")
    try:
        ids = [int(x) for x in others]
    except ValueError:
        raise RuleMismatch("goal ids must be integers")
    goals = [node] + [tree.goal(g) for g in ids if g != node.id]
    for g in tree.open_goals():
        if g not in [n.id for n in goals] and var in _seq_fv(tree.nodes[g].sequent):
            raise RuleMismatch(f"{var} also occurs in goal {g}; list it")
    for g in goals:
        for f in g.sequent.ante + g.sequent.succ:
            for n in f.walk():
                if isinstance(n, A.Fn) and n.name in tree.skolems and var in free_vars(n):
                    raise SkolemDependency(f"{var} is an argument of Skolem symbol {n.name}")
    body = A.conj([g.sequent.as_formula() for g in goals])
    for g in goals[1:]:
        tree.merge_goal(g.id, node.id)
    return [Sequent((), (A.Exists(var, A.REAL, body),))]


def _seq_fv(seq):
    out = set()
    for f in seq.ante + seq.succ:
        out |= free_vars(f)
    return out


# -------------------------------------------------------------------- qe


def liftable(f) -> bool:
    for n in f.walk():
        if isinstance(n, (A.Box, A.Diamond)):
            return False
        if isinstance(n, (A.Forall, A.Exists)) and n.sort != A.REAL:
            return False
    return True


MAX_PARTITION_TERMS = 6


def _object_terms(f, sig):
    """Maximal object terms in object atoms and alien arguments."""
    out = []

    def add(t, bound):
        t = A.strip_spans(t)
        if free_vars(t) & bound:
            raise QeInapplicable(f"object term {term_str(t)} depends on a quantified variable")
        if t not in out:
            out.append(t)

    def term(t, bound):
        if isinstance(t, A.Fn) and sort_of(t, sig) == A.REAL:
            for a in t.args:
                if sort_of(a, sig) != A.REAL:
                    add(a, bound)
                else:
                    term(a, bound)
            return
        if isinstance(t, A.Upd):
            return
        for c in t.children():
            if isinstance(c, A.Term):
                term(c, bound)

    def form(g, bound):
        if isinstance(g, A.Cmp):
            s = sort_of(g.left, sig)
            if s is not None and s != A.REAL:
                add(g.left, bound)
                add(g.right, bound)
            else:
                term(g.left, bound)
                term(g.right, bound)
        elif isinstance(g, (A.Forall, A.Exists)):
            form(g.body, bound | {g.var})
        else:
            for c in g.children():
                form(c, bound)

    form(f, frozenset())
    return out


def qe_formula(f: A.Formula, sig: A.Signature, literals=()) -> A.Formula:
    """Quantifier elimination modulo object atoms (case split over partitions).

    ``literals`` are object (dis)equalities known to hold, as formulas or
    ``(a, b, equal?)`` triples; they prune the case split.
    """
    literals = [lit for lit in ((_obj_literal(x) if isinstance(x, A.Formula) else x) for x in literals)
                if lit is not None]
    f = desugar_conditional(A.strip_spans(f))
    terms = _object_terms(f, sig)
    if len(terms) > MAX_PARTITION_TERMS:
        raise QeInapplicable(f"too many object terms ({len(terms)}) for a case split")
    sorts = {t: sort_of(t, sig) for t in terms}
    parts = [p for p in set_partitions(terms, lambda a, b: sorts[a] == sorts[b])
             if _consistent(p, literals, sig)]
    results = []
    for part in parts:
        rep = _rep_map(part)

        def obj(c, rep=rep):
            a, b = A.strip_spans(c.left), A.strip_spans(c.right)
            if a == b:
                eq = True
            elif a in rep and b in rep:
                eq = rep[a] == rep[b]
            else:
                return None
            return eq if c.op == "=" else not eq

        def key(t, rep=rep):
            if isinstance(t, A.Fn) and t.args:
                return A.Fn(t.name, tuple(rep.get(A.strip_spans(a), a) for a in t.args))
            return t

        try:
            qf, ab = to_qf(f, sig, object_eval=obj, alien_key=key)
            res = QE().qe(qf)
        except UnsupportedDegree as e:
            raise QeInapplicable(str(e))
        except QdlError as e:
            if isinstance(e, QeInapplicable):
                raise
            raise QeInapplicable(str(e))
        if isinstance(res, TT):
            continue
        r = from_qf(res, ab)
        results.append(r if len(parts) == 1 else A.Imply(partition_guard(part), r))
    return A.conj(results)


@rule("qe", kind="goal")
def _qe(tree, node, args, pos):
    _no_args(args, "qe")
    seq = node.sequent
    lits = [x for x in (_obj_literal(f) for f in seq.ante) if x is not None]
    if pos is not None:
        if pos.path:
            raise RuleMismatch("qe applies to top-level formulas only")
        fs = seq.side(pos.side)
        if not 0 <= pos.index < len(fs):
            raise RuleMismatch(f"no formula at {pos}")
        f = fs[pos.index]
        if not liftable(f):
            raise QeInapplicable("formula is not first-order real arithmetic")
        ctx = lits if pos.side == SUCC else ()
        return [seq.replace_at(pos.side, pos.index, [qe_formula(f, tree.sig, ctx)])]
    la = [f for f in seq.ante if liftable(f)]
    ls = [f for f in seq.succ if liftable(f)]
    if not la and not ls:
        raise QeInapplicable("no arithmetic formula in the sequent")
    res = qe_formula(Sequent(tuple(la), tuple(ls)).as_formula(), tree.sig, lits)
    if isinstance(res, A.TrueF):
        return []
    rest_a = tuple(f for f in seq.ante if not liftable(f))
    rest_s = tuple(f for f in seq.succ if not liftable(f))
    return [Sequent(rest_a, (res,) + rest_s)]


def parse_args(text: str) -> Tuple[str, ...]:
    return tuple(shlex.split(text))

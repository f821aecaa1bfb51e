"""Hypothesis generators for well-typed closed formulas over a small car signature."""

from fractions import Fraction

from hypothesis import strategies as st

from qdl.syntax import ast as A
from qdl.syntax import parse_problem

SIG_TEXT = """sort C;
func R x(C);
func R v(C);
func R a(C);
func C l(C);
func R b();
func C n();
problem: true;
"""
SIG = parse_problem(SIG_TEXT).signature
REAL_FNS = ("x", "v", "a")
VARS = ("i", "j", "k")

nums = st.builds(Fraction, st.integers(-4, 4), st.sampled_from([1, 2, 3]))


@st.composite
def obj_terms(draw, scope):
    choices = [A.Fn("n")] + [A.Var(s, "C") for s in scope]
    base = draw(st.sampled_from(choices))
    if draw(st.integers(0, 3)) == 0:
        return A.Fn("l", (base,))
    return base


@st.composite
def real_terms(draw, scope, depth=2):
    k = draw(st.integers(0, 5 if depth > 0 else 2))
    if k == 0:
        return A.Num(draw(nums))
    if k == 1:
        return A.Fn("b")
    if k == 2:
        return A.Fn(draw(st.sampled_from(REAL_FNS)), (draw(obj_terms(scope)),))
    left = draw(real_terms(scope, depth - 1))
    right = draw(real_terms(scope, depth - 1))
    if k == 3:
        return A.Plus(left, right)
    if k == 4:
        return A.Times(left, right)
    return A.Neg(left) if draw(st.booleans()) else A.Minus(left, right)


@st.composite
def atoms(draw, scope):
    if draw(st.integers(0, 4)) == 0:
        op = draw(st.sampled_from(["=", "!="]))
        return A.Cmp(op, draw(obj_terms(scope)), draw(obj_terms(scope)))
    op = draw(st.sampled_from(["=", "!=", "<", "<=", ">", ">="]))
    return A.Cmp(op, draw(real_terms(scope)), draw(real_terms(scope)))


@st.composite
def programs(draw, scope, depth=1):
    k = draw(st.integers(0, 5 if depth > 0 else 2))
    if k == 0:
        i = draw(st.sampled_from([v for v in VARS if v not in scope] or ["q"]))
        f = draw(st.sampled_from(REAL_FNS))
        rhs = draw(real_terms(scope + [i], 1))
        return A.QAssign(i, "C", (A.Eqn(A.Fn(f, (A.Var(i, "C"),)), rhs),))
    if k == 1:
        return A.QAssign(None, None, (A.Eqn(A.Fn("b"), draw(real_terms(scope, 1))),))
    if k == 2:
        return A.Test(draw(formulas(scope, 0, modal=False)))
    left = draw(programs(scope, depth - 1))
    right = draw(programs(scope, depth - 1))
    if k == 3:
        return A.Choice(left, right)
    if k == 4:
        return A.Seq(left, right)
    return A.NewAssign(A.Fn("n"), "C")


@st.composite
def formulas(draw, scope=None, depth=2, modal=True):
    scope = list(scope or [])
    k = draw(st.integers(0, (9 if modal else 7) if depth > 0 else 0))
    if k == 0:
        return draw(atoms(scope))
    if k in (1, 2):
        var = draw(st.sampled_from(VARS))
        body = draw(formulas(scope + [var], depth - 1, modal))
        return (A.Forall if k == 1 else A.Exists)(var, "C", body)
    if k == 3:
        return A.Not(draw(formulas(scope, depth - 1, modal)))
    left = draw(formulas(scope, depth - 1, modal))
    right = draw(formulas(scope, depth - 1, modal))
    if k == 4:
        return A.And(left, right)
    if k == 5:
        return A.Or(left, right)
    if k == 6:
        return A.Imply(left, right)
    if k == 7:
        return A.Equiv(left, right)
    prog = draw(programs(scope))
    return (A.Box if k == 8 else A.Diamond)(prog, right)

"""Pretty printer whose output re-parses to the same tree."""

from __future__ import annotations

from fractions import Fraction

from . import ast as A


def fmt_num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# ---------------------------------------------------------------- terms

_TPREC = {A.Plus: 1, A.Minus: 1, A.Times: 2, A.Neg: 3, A.Pow: 4}


def _tprec(t: A.Term) -> int:
    if isinstance(t, A.Num) and t.value < 0:
        return 3
    return _TPREC.get(type(t), 5)


def term_str(t: A.Term, need: int = 0) -> str:
    s = _term(t)
    return f"({s})" if _tprec(t) < need else s


def _term(t: A.Term) -> str:
    if isinstance(t, A.Num):
        return fmt_num(t.value)
    if isinstance(t, A.Var):
        return t.name
    if isinstance(t, A.Fn):
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(term_str(a) for a in t.args)})"
    if isinstance(t, A.Plus):
        return f"{term_str(t.left, 1)} + {term_str(t.right, 2)}"
    if isinstance(t, A.Minus):
        return f"{term_str(t.left, 1)} - {term_str(t.right, 2)}"
    if isinstance(t, A.Times):
        return f"{term_str(t.left, 2)} * {term_str(t.right, 3)}"
    if isinstance(t, A.Neg):
        a = t.arg
        if isinstance(a, A.Num):
            return f"-({_term(a)})"
        return "-" + term_str(a, 3)
    if isinstance(t, A.Pow):
        return f"{term_str(t.base, 5)}^{t.exp}"
    if isinstance(t, A.Cond):
        return f"(if {formula_str(t.cond)} then {term_str(t.then)} else {term_str(t.orelse)})"
    if isinstance(t, A.Upd):
        return f"upd[{program_str(t.prog)}]({term_str(t.term)})"
    raise TypeError(f"not a term: {t!r}")


# ------------------------------------------------------------- formulas

_FPREC = {A.Equiv: 1, A.Imply: 2, A.Or: 3, A.And: 4}
# required precedence of (left, right) operands
_OPERANDS = {A.Equiv: (1, 2), A.Imply: (3, 2), A.Or: (3, 4), A.And: (4, 5)}
_OPSYM = {A.Equiv: "<->", A.Imply: "->", A.Or: "|", A.And: "&"}


def _fprec(f: A.Formula) -> int:
    if isinstance(f, (A.Not, A.Box, A.Diamond, A.Forall, A.Exists)):
        return 5
    return _FPREC.get(type(f), 6)


def _open_right(f: A.Formula) -> bool:
    """True if the printed text would swallow whatever follows it."""
    if isinstance(f, (A.Forall, A.Exists)):
        return True
    if isinstance(f, A.Not):
        return _open_right(f.arg)
    if isinstance(f, (A.Box, A.Diamond)):
        return _open_right(f.body)
    if isinstance(f, A.BINARY):
        return _open_right(f.right)
    return False


def _wrap(f: A.Formula, need: int, followed: bool) -> str:
    s = _formula(f)
    if _fprec(f) < need or (followed and _open_right(f)):
        return f"({s})"
    return s


def formula_str(f: A.Formula) -> str:
    return _formula(f)


def _formula(f: A.Formula) -> str:
    if isinstance(f, A.TrueF):
        return "true"
    if isinstance(f, A.FalseF):
        return "false"
    if isinstance(f, A.Cmp):
        return f"{term_str(f.left)} {f.op} {term_str(f.right)}"
    if isinstance(f, A.Not):
        if isinstance(f.arg, A.Cmp):
            return f"!({_formula(f.arg)})"
        return "!" + _wrap(f.arg, 5, False)
    if isinstance(f, A.BINARY):
        ln, rn = _OPERANDS[type(f)]
        return f"{_wrap(f.left, ln, True)} {_OPSYM[type(f)]} {_wrap(f.right, rn, False)}"
    if isinstance(f, (A.Forall, A.Exists)):
        q = "forall" if isinstance(f, A.Forall) else "exists"
        return f"{q} {f.sort} {f.var}. {_formula(f.body)}"
    if isinstance(f, A.Box):
        return f"[{program_str(f.prog)}]{_wrap(f.body, 5, False)}"
    if isinstance(f, A.Diamond):
        return f"<{program_str(f.prog)}>{_wrap(f.body, 5, False)}"
    raise TypeError(f"not a formula: {f!r}")


# ------------------------------------------------------------- programs


def _pprec(p: A.Program) -> int:
    if isinstance(p, A.Choice):
        return 1
    if isinstance(p, A.Seq):
        return 2
    if isinstance(p, (A.QAssign, A.QOde)) and p.qvar is not None:
        return 2  # the quantifier prefix must not capture a following '*'
    return 3


def _pwrap(p: A.Program, need: int) -> str:
    s = program_str(p)
    return f"({s})" if _pprec(p) < need else s


def _eqns(p) -> str:
    return ", ".join(f"{term_str(e.lhs)} := {term_str(e.rhs)}" for e in p.eqns)


def program_str(p: A.Program) -> str:
    if isinstance(p, A.QAssign):
        body = _eqns(p)
        return f"forall {p.sort} {p.qvar}. {body}" if p.qvar is not None else body
    if isinstance(p, A.QOde):
        eq = ", ".join(f"{term_str(e.lhs)}' = {term_str(e.rhs)}" for e in p.eqns)
        if not isinstance(p.domain, A.TrueF):
            eq += f" & {formula_str(p.domain)}"
        body = "{" + eq + "}"
        return f"forall {p.sort} {p.qvar}. {body}" if p.qvar is not None else body
    if isinstance(p, A.Test):
        return "?" + formula_str(p.cond)
    if isinstance(p, A.Choice):
        return f"{_pwrap(p.left, 2)} ++ {_pwrap(p.right, 1)}"
    if isinstance(p, A.Seq):
        return f"{_pwrap(p.left, 3)}; {_pwrap(p.right, 2)}"
    if isinstance(p, A.Star):
        s = f"({program_str(p.body)})*"
        return s + (f"@{p.label}" if p.label else "")
    if isinstance(p, A.NewAssign):
        return f"{term_str(p.target)} := new {p.sort}"
    raise TypeError(f"not a program: {p!r}")


# --------------------------------------------------------------- entry


def to_str(node) -> str:
    if isinstance(node, A.Term):
        return term_str(node)
    if isinstance(node, A.Formula):
        return formula_str(node)
    if isinstance(node, A.Program):
        return program_str(node)
    if isinstance(node, A.Problem):
        return problem_str(node)
    raise TypeError(f"cannot print {type(node).__name__}")


def signature_lines(sig: A.Signature) -> list:
    out = [f"sort {s};" for s in sig.sorts]
    for f in sig.functions:
        out.append(f"func {f.result} {f.name}({', '.join(f.args)});")
    for v, s in sig.variables:
        out.append(f"var {s} {v};")
    for x, v in sig.velocities:
        out.append(f"velocity {v} of {x};")
    return out


def problem_str(p: A.Problem) -> str:
    lines = signature_lines(p.signature)
    for a in p.annotations:
        label = f" {a.label}" if a.label else ""
        var = f" ({a.var})" if a.var else ""
        lines.append(f"{a.kind}{label}{var}: {formula_str(a.formula)};")
    lines.append(f"problem: {formula_str(p.conjecture)};")
    return "\n".join(lines) + "\n"

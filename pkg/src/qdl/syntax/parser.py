"""Recursive-descent parser for the ASCII concrete syntax.

Formula precedence, loosest first: ``<->``, ``->`` (right assoc), ``|``,
``&``, then prefix operators (``!``, ``[a]``, ``<a>``, quantifiers).
Quantifier bodies extend as far right as possible; modalities and ``!``
bind tightly.  Programs: ``++`` < ``;`` < postfix ``*``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..errors import QdlSyntaxError, UnsupportedFeature
from . import ast as A
from .lexer import Token, tokenize

CMP = ("=", "!=", ">=", ">", "<=", "<")


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, sig: Optional[A.Signature] = None, *,
                 lenient: bool = False, allow_internal: bool = False):
        self.toks = tokenize(text, allow_internal)
        self.i = 0
        self.sig = sig or A.Signature()
        self.lenient = lenient
        self.scope: list = []
        self.macros: dict = {}

    # -------------------------------------------------------- token utils

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}", text)
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            self.fail("expected identifier", "identifier")
        self.i += 1
        return t

    def fail(self, msg: str, expected: str | None = None):
        t = self.tok
        found = t.text or "end of input"
        raise QdlSyntaxError(f"{msg}, found {found!r}", t.span, expected)

    def span_from(self, start: Token) -> A.Span:
        end = self.toks[self.i - 1].span if self.i > 0 else start.span
        return A.Span(start.span.line, start.span.col, start.span.start, end.end)

    def sort_name(self) -> str:
        t = self.ident()
        if not self.sig.is_sort(t.text):
            raise QdlSyntaxError(f"unknown sort {t.text!r}", t.span, "sort")
        return t.text

    def lookup_var(self, name: str) -> Optional[str]:
        for n, s in reversed(self.scope):
            if n == name:
                return s
        return self.sig.var(name)

    # -------------------------------------------------------- problems

    def problem(self) -> A.Problem:
        annotations = []
        conjecture = None
        while self.tok.kind != "eof":
            if self.accept("sort"):
                name = self.ident()
                if name.text == A.REAL or name.text in self.sig.sorts:
                    raise QdlSyntaxError(f"sort {name.text!r} already declared", name.span)
                self.sig = A.Signature(self.sig.sorts + (name.text,), self.sig.functions,
                                       self.sig.variables, self.sig.velocities)
                self.expect(";")
            elif self.accept("func"):
                res = self.sort_name()
                name = self.ident()
                self._check_fresh(name)
                args = []
                self.expect("(")
                if not self.at(")"):
                    args.append(self.sort_name())
                    while self.accept(","):
                        args.append(self.sort_name())
                self.expect(")")
                self.expect(";")
                self.sig = self.sig.with_function(A.FuncDecl(name.text, tuple(args), res))
            elif self.accept("var"):
                s = self.sort_name()
                while True:
                    name = self.ident()
                    self._check_fresh(name)
                    self.sig = self.sig.with_variable(name.text, s)
                    if not self.accept(","):
                        break
                self.expect(";")
            elif self.accept("velocity"):
                v = self.ident()
                self.expect("of")
                x = self.ident()
                for n in (v, x):
                    if self.sig.func(n.text) is None:
                        raise QdlSyntaxError(f"unknown function {n.text!r}", n.span)
                self.sig = A.Signature(self.sig.sorts, self.sig.functions, self.sig.variables,
                                       self.sig.velocities + ((x.text, v.text),))
                self.expect(";")
            elif self.accept("def"):
                self._macro()
            elif self.at("invariant") or self.at("variant"):
                annotations.append(self._annotation())
            elif self.accept("problem"):
                if conjecture is not None:
                    self.fail("second problem statement")
                self.expect(":")
                conjecture = self.formula()
                if self.tok.kind != "eof":
                    self.expect(";")
            else:
                self.fail("expected a declaration or 'problem:'")
        if conjecture is None:
            self.fail("missing 'problem:'", "problem")
        return A.Problem(self.sig, conjecture, tuple(annotations),
                         tuple((k, v[2]) for k, v in self.macros.items()))

    def _check_fresh(self, name: Token):
        if name.text in self.sig.names() or name.text in self.macros or name.text.startswith(A.EPS_PREFIX):
            raise QdlSyntaxError(f"name {name.text!r} already declared or reserved", name.span)

    def _macro(self):
        start = self.i
        name = self.ident()
        self._check_fresh(name)
        params = []
        if self.accept("("):
            while True:
                s = self.sort_name()
                p = self.ident()
                params.append((p.text, s))
                if not self.accept(","):
                    break
            self.expect(")")
        self.expect("=")
        self.scope.extend(params)
        body = self.formula()
        del self.scope[len(self.scope) - len(params):]
        src = " ".join(t.text for t in self.toks[start:self.i])
        self.expect(";")
        self.macros[name.text] = (tuple(params), body, src)

    def _annotation(self) -> A.Annotation:
        kind = self.tok.text
        self.i += 1
        label = None
        if self.tok.kind == "ident":
            label = self.ident().text
        var = None
        if kind == "variant":
            self.expect("(")
            var = self.ident().text
            self.expect(")")
            self.scope.append((var, A.REAL))
        self.expect(":")
        f = self.formula()
        if var is not None:
            self.scope.pop()
        self.expect(";")
        return A.Annotation(kind, label, f, var)

    # -------------------------------------------------------- formulas

    def formula(self) -> A.Formula:
        start = self.tok
        left = self.imply()
        while self.accept("<->"):
            right = self.imply()
            left = A.Equiv(left, right, span=self.span_from(start))
        return left

    def imply(self) -> A.Formula:
        start = self.tok
        left = self.disj()
        if self.accept("->"):
            right = self.imply()
            return A.Imply(left, right, span=self.span_from(start))
        return left

    def disj(self) -> A.Formula:
        start = self.tok
        left = self.conj()
        while self.accept("|"):
            left = A.Or(left, self.conj(), span=self.span_from(start))
        return left

    def conj(self) -> A.Formula:
        start = self.tok
        left = self.unary()
        while self.accept("&"):
            left = A.And(left, self.unary(), span=self.span_from(start))
        return left

    def unary(self) -> A.Formula:
        start = self.tok
        if self.accept("!"):
            return A.Not(self.unary(), span=self.span_from(start))
        if self.accept("["):
            p = self.program()
            self.expect("]")
            return A.Box(p, self.unary(), span=self.span_from(start))
        if self.accept("<"):
            p = self.program()
            self.expect(">")
            return A.Diamond(p, self.unary(), span=self.span_from(start))
        if self.tok.kind == "kw" and self.tok.text in ("forall", "exists", "forallE", "existsE"):
            return self.quantifier()
        return self.atom()

    def quantifier(self) -> A.Formula:
        start = self.tok
        q = self.tok.text
        self.i += 1
        sort = self.sort_name()
        names = [self.ident().text]
        while self.accept(","):
            names.append(self.ident().text)
        self.expect(".")
        actual = q.endswith("E")
        if actual and sort == A.REAL:
            raise QdlSyntaxError("actualist quantifiers need an object sort", start.span)
        self.scope.extend((n, sort) for n in names)
        body = self.formula()
        del self.scope[len(self.scope) - len(names):]
        span = self.span_from(start)
        for n in reversed(names):
            if q.startswith("forall"):
                if actual:
                    body = A.Imply(A.created(A.Var(n, sort), sort), body)
                body = A.Forall(n, sort, body, span=span)
            else:
                if actual:
                    body = A.And(A.created(A.Var(n, sort), sort), body)
                body = A.Exists(n, sort, body, span=span)
        return body

    def atom(self) -> A.Formula:
        start = self.tok
        if self.accept("true"):
            return A.TrueF(span=self.span_from(start))
        if self.accept("false"):
            return A.FalseF(span=self.span_from(start))
        if self.tok.kind == "ident" and self.tok.text in self.macros and self.lookup_var(self.tok.text) is None:
            return self.macro_app()
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                f = self.formula()
                self.expect(")")
                nxt = self.tok
                if nxt.kind == "sym" and nxt.text in CMP + ("+", "-", "*", "^"):
                    raise _Backtrack
                return f
            except (QdlSyntaxError, _Backtrack):
                self.i = save
        left = self.term()
        if not (self.tok.kind == "sym" and self.tok.text in CMP):
            self.fail("expected comparison operator", "comparison")
        op = self.tok.text
        self.i += 1
        right = self.term()
        return A.Cmp(op, left, right, span=self.span_from(start))

    def macro_app(self) -> A.Formula:
        from ..subst import subst_vars

        name = self.ident()
        params, body, _ = self.macros[name.text]
        args = []
        if self.accept("("):
            if not self.at(")"):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
            self.expect(")")
        if len(args) != len(params):
            raise QdlSyntaxError(f"{name.text} expects {len(params)} arguments", name.span)
        return subst_vars(body, {p: a for (p, _), a in zip(params, args)})

    # -------------------------------------------------------- terms

    def term(self) -> A.Term:
        start = self.tok
        left = self.product()
        while self.tok.kind == "sym" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            right = self.product()
            cls = A.Plus if op == "+" else A.Minus
            left = cls(left, right, span=self.span_from(start))
        return left

    def product(self) -> A.Term:
        start = self.tok
        left = self.signed()
        while self.accept("*"):
            left = A.Times(left, self.signed(), span=self.span_from(start))
        return left

    def signed(self) -> A.Term:
        start = self.tok
        if self.accept("-"):
            if self.tok.kind == "num":
                save = self.i
                val = self.numeral()
                if not self.at("^"):
                    return A.Num(-val, span=self.span_from(start))
                self.i = save
            return A.Neg(self.signed(), span=self.span_from(start))
        return self.power()

    def power(self) -> A.Term:
        start = self.tok
        base = self.primary()
        if self.accept("^"):
            t = self.tok
            if t.kind != "num":
                self.fail("expected natural exponent", "numeral")
            self.i += 1
            return A.Pow(base, int(t.text), span=self.span_from(start))
        return base

    def numeral(self) -> Fraction:
        t = self.tok
        self.i += 1
        val = Fraction(int(t.text))
        if self.at("/") and self.peek().kind == "num":
            self.i += 1
            d = int(self.tok.text)
            self.i += 1
            if d == 0:
                raise QdlSyntaxError("zero denominator", t.span)
            val = val / d
        return val

    def primary(self) -> A.Term:
        start = self.tok
        t = self.tok
        if t.kind == "num":
            return A.Num(self.numeral(), span=self.span_from(start))
        if self.accept("("):
            e = self.term()
            self.expect(")")
            return e
        if self.accept("if"):
            c = self.formula()
            self.expect("then")
            a = self.term()
            self.expect("else")
            b = self.term()
            return A.Cond(c, a, b, span=self.span_from(start))
        if self.accept("upd"):
            self.expect("[")
            p = self.program()
            self.expect("]")
            if not isinstance(p, A.QAssign):
                raise QdlSyntaxError("upd[...] takes an assignment", t.span)
            self.expect("(")
            e = self.term()
            self.expect(")")
            return A.Upd(p, e, span=self.span_from(start))
        if t.kind == "ident":
            return self.application()
        self.fail("expected term", "term")

    def application(self) -> A.Term:
        start = self.tok
        name = self.ident().text
        vs = self.lookup_var(name)
        if vs is not None and not self.at("("):
            return A.Var(name, vs, span=self.span_from(start))
        decl = self.sig.func(name)
        args = []
        if self.accept("("):
            if not self.at(")"):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
            self.expect(")")
        if decl is None:
            if not self.lenient:
                raise QdlSyntaxError(f"unknown symbol {name!r}", start.span)
            if not args and not self.at("("):
                return A.Var(name, A.REAL, span=self.span_from(start))
            from .typecheck import sort_of

            sorts = tuple(sort_of(a, self.sig, dict(self.scope)) or A.REAL for a in args)
            self.sig = self.sig.with_function(A.FuncDecl(name, sorts, A.REAL))
        elif len(decl.args) != len(args):
            raise QdlSyntaxError(f"{name} expects {len(decl.args)} arguments, got {len(args)}", start.span)
        return A.Fn(name, tuple(args), span=self.span_from(start))

    # -------------------------------------------------------- programs

    def program(self) -> A.Program:
        start = self.tok
        left = self.sequence()
        if self.accept("++"):
            return A.Choice(left, self.program(), span=self.span_from(start))
        return left

    def sequence(self) -> A.Program:
        start = self.tok
        left = self.postfix()
        if self.accept(";"):
            return A.Seq(left, self.sequence(), span=self.span_from(start))
        return left

    def postfix(self) -> A.Program:
        start = self.tok
        p = self.atomic()
        while self.accept("*"):
            label = None
            if self.accept("@"):
                label = self.ident().text
            p = A.Star(p, label, span=self.span_from(start))
        return p

    def atomic(self) -> A.Program:
        start = self.tok
        if self.accept("("):
            p = self.program()
            self.expect(")")
            return p
        if self.accept("?"):
            return A.Test(self.formula(), span=self.span_from(start))
        if self.at("forall") or self.at("forallE"):
            actual = self.tok.text == "forallE"
            self.i += 1
            sort = self.sort_name()
            if sort == A.REAL:
                raise QdlSyntaxError("program quantifiers range over object sorts", start.span)
            var = self.ident().text
            self.expect(".")
            if self.at("forall") or self.at("forallE"):
                raise UnsupportedFeature("nested quantifier blocks in programs", self.tok.span)
            self.scope.append((var, sort))
            try:
                p = self.ode(var, sort, actual) if self.at("{") else self.assignments(var, sort, actual)
            finally:
                self.scope.pop()
            return p
        if self.at("{"):
            return self.ode(None, None, False)
        return self.assignments(None, None, False)

    def lhs(self) -> A.Fn:
        start = self.tok
        name = self.ident()
        decl = self.sig.func(name.text)
        if decl is None:
            if self.lenient and self.lookup_var(name.text) is None:
                self.sig = self.sig.with_function(A.FuncDecl(name.text, (), A.REAL))
                return A.Fn(name.text, (), span=self.span_from(start))
            raise QdlSyntaxError(f"{name.text!r} is not a function symbol", name.span)
        self.i -= 1
        f = self.application()
        return f

    def assignments(self, var, sort, actual) -> A.Program:
        start = self.tok
        eqns = []
        while True:
            lhs = self.lhs()
            self.expect(":=")
            if self.accept("new"):
                s = self.sort_name()
                if var is not None or eqns or self.at(","):
                    raise UnsupportedFeature("new cannot be combined with other assignments", start.span)
                return A.NewAssign(lhs, s, span=self.span_from(start))
            rhs = self.term()
            if actual:
                rhs = A.Cond(A.created(A.Var(var, sort), sort), rhs, lhs)
            eqns.append(A.Eqn(lhs, rhs, span=self.span_from(start)))
            if not self.accept(","):
                break
        return A.QAssign(var, sort, tuple(eqns), span=self.span_from(start))

    def ode(self, var, sort, actual) -> A.Program:
        start = self.tok
        self.expect("{")
        eqns = []
        while True:
            es = self.tok
            lhs = self.lhs()
            if self.accept("''"):
                vname = self.sig.velocity_of(lhs.name)
                if vname is None:
                    raise QdlSyntaxError(
                        f"second derivative of {lhs.name} needs 'velocity <v> of {lhs.name};'", es.span)
                self.expect("=")
                rhs = self.term()
                vel = A.Fn(vname, lhs.args)
                eqns.append(A.Eqn(lhs, self._mask(vel, var, sort, actual), span=self.span_from(es)))
                eqns.append(A.Eqn(vel, self._mask(rhs, var, sort, actual), span=self.span_from(es)))
            else:
                self.expect("'")
                self.expect("=")
                rhs = self.term()
                eqns.append(A.Eqn(lhs, self._mask(rhs, var, sort, actual), span=self.span_from(es)))
            if not self.accept(","):
                break
        domain = A.TRUE
        if self.accept("&"):
            domain = self.formula()
        self.expect("}")
        return A.QOde(var, sort, tuple(eqns), domain, span=self.span_from(start))

    @staticmethod
    def _mask(rhs, var, sort, actual):
        if not actual:
            return rhs
        return A.Times(A.eps(A.Var(var, sort), sort), rhs)


# ------------------------------------------------------------ entry points


def _finish(p: Parser, value):
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    return value


def parse_problem(text: str, *, allow_internal: bool = False) -> A.Problem:
    p = Parser(text, allow_internal=allow_internal)
    return _finish(p, p.problem())


def parse_formula(text: str, sig: Optional[A.Signature] = None, *, lenient: bool = False,
                  allow_internal: bool = True, scope=None) -> A.Formula:
    p = Parser(text, sig, lenient=lenient, allow_internal=allow_internal)
    if scope:
        p.scope.extend(scope)
    return _finish(p, p.formula())


def parse_formula_lenient(text: str, sig: Optional[A.Signature] = None):
    """Parse a formula, declaring unknown identifiers as real-valued.

    Returns the formula and the extended signature.
    """
    p = Parser(text, sig, lenient=True, allow_internal=False)
    f = _finish(p, p.formula())
    return f, p.sig


def parse_term(text: str, sig: Optional[A.Signature] = None, *, allow_internal: bool = True,
               scope=None) -> A.Term:
    p = Parser(text, sig, allow_internal=allow_internal)
    if scope:
        p.scope.extend(scope)
    return _finish(p, p.term())


def parse_program(text: str, sig: Optional[A.Signature] = None, *, allow_internal: bool = True,
                  scope=None) -> A.Program:
    p = Parser(text, sig, allow_internal=allow_internal)
    if scope:
        p.scope.extend(scope)
    return _finish(p, p.program())

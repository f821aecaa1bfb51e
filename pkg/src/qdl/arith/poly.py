"""Exact multivariate polynomials over the rationals.

A monomial is a sorted tuple of ``(variable, exponent)`` pairs; the
constant monomial is ``()``.  Polynomials keep no zero coefficients, so
structural equality is mathematical equality.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Tuple

Mono = Tuple[Tuple[str, int], ...]

ONE_MONO: Mono = ()


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_degree(m: Mono, var: str) -> int:
    for v, e in m:
        if v == var:
            return e
    return 0


def mono_without(m: Mono, var: str) -> Mono:
    return tuple(p for p in m if p[0] != var)


class Poly:
    __slots__ = ("t", "_hash")

    def __init__(self, terms: Mapping[Mono, Fraction] | None = None):
        self.t: Dict[Mono, Fraction] = {m: c for m, c in (terms or {}).items() if c != 0}
        self._hash = None

    # construction
    @staticmethod
    def const(c) -> "Poly":
        return Poly({ONE_MONO: Fraction(c)})

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly({((name, 1),): Fraction(1)})

    # queries
    def is_zero(self) -> bool:
        return not self.t

    def is_const(self) -> bool:
        return not self.t or (len(self.t) == 1 and ONE_MONO in self.t)

    def const_value(self) -> Fraction:
        return self.t.get(ONE_MONO, Fraction(0))

    def vars(self) -> set:
        return {v for m in self.t for v, _ in m}

    def degree(self, var: str) -> int:
        return max((mono_degree(m, var) for m in self.t), default=0)

    def total_degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.t), default=0)

    def coeffs(self, var: str) -> Dict[int, "Poly"]:
        """View as a polynomial in ``var``: exponent -> coefficient polynomial."""
        out: Dict[int, Dict[Mono, Fraction]] = {}
        for m, c in self.t.items():
            e = mono_degree(m, var)
            rest = mono_without(m, var) if e else m
            out.setdefault(e, {})[rest] = c
        return {e: Poly(d) for e, d in out.items()}

    def sorted_terms(self):
        return sorted(self.t.items())

    # arithmetic
    def __add__(self, other: "Poly") -> "Poly":
        d = dict(self.t)
        for m, c in other.t.items():
            d[m] = d.get(m, 0) + c
        return Poly(d)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.t.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.t or not other.t:
            return Poly()
        d: Dict[Mono, Fraction] = {}
        for m1, c1 in self.t.items():
            for m2, c2 in other.t.items():
                m = mono_mul(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return Poly(d)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly({m: v * c for m, v in self.t.items()}) if c else Poly()

    def __pow__(self, n: int) -> "Poly":
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def subst(self, var: str, value: "Poly") -> "Poly":
        """Replace ``var`` by a polynomial."""
        if var not in self.vars():
            return self
        out = Poly()
        powers = {0: Poly.const(1)}
        by_exp = self.coeffs(var)
        for e in sorted(by_exp):
            if e not in powers:
                powers[e] = value ** e
            out = out + by_exp[e] * powers[e]
        return out

    def evaluate(self, env: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.t.items():
            v = c
            for x, e in m:
                v *= env[x] ** e
            total += v
        return total

    def eval_float(self, env: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self.t.items():
            v = float(c)
            for x, e in m:
                v *= env[x] ** e
            total += v
        return total

    # normalization
    def primitive(self) -> Tuple["Poly", int]:
        """Integer primitive part with positive leading coefficient, and the sign used."""
        if not self.t:
            return self, 1
        den = 1
        for c in self.t.values():
            den = den * c.denominator // gcd(den, c.denominator)
        num = 0
        for c in self.t.values():
            num = gcd(num, int(c * den))
        lead = self.leading_coeff()
        sign = 1 if lead > 0 else -1
        k = Fraction(den * sign, num)
        return self.scale(k), sign

    def leading_coeff(self) -> Fraction:
        items = sorted(self.t.items())
        for m, c in items:
            if m:
                return c
        return items[0][1]

    # protocol
    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.t == other.t

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.t.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.t:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


def psum(ps: Iterable[Poly]) -> Poly:
    out = Poly()
    for p in ps:
        out = out + p
    return out

"""Univariate real-root isolation with Sturm sequences (exact rationals).

Polynomials are coefficient lists, lowest degree first, without trailing
zeros.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

UPoly = List[Fraction]


def trim(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: UPoly) -> int:
    return len(p) - 1


def evaluate(p: UPoly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def sign_at(p: UPoly, x: Fraction) -> int:
    v = evaluate(p, x)
    return (v > 0) - (v < 0)


def derivative(p: UPoly) -> UPoly:
    return trim([i * c for i, c in enumerate(p)][1:])


def mul(p: UPoly, q: UPoly) -> UPoly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_(p: UPoly, q: UPoly):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = list(p)
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 1)
    lead = q[-1]
    while len(p) >= len(q) and p:
        k = p[-1] / lead
        d = len(p) - len(q)
        quot[d] = k
        for i, c in enumerate(q):
            p[d + i] -= k * c
        p = trim(p)
    return trim(quot), p


def monic(p: UPoly) -> UPoly:
    return [c / p[-1] for c in p] if p else p


def gcd(p: UPoly, q: UPoly) -> UPoly:
    p, q = trim(p), trim(q)
    while q:
        p, q = q, divmod_(p, q)[1]
    return monic(p)


def squarefree(p: UPoly) -> UPoly:
    p = trim(p)
    if degree(p) < 1:
        return p
    g = gcd(p, derivative(p))
    return monic(divmod_(p, g)[0])


def sturm_chain(p: UPoly) -> List[UPoly]:
    chain = [trim(p), derivative(p)]
    while chain[-1]:
        r = divmod_(chain[-2], chain[-1])[1]
        if not r:
            break
        chain.append([-c for c in r])
    return [c for c in chain if c]


def variations(chain: List[UPoly], x: Fraction) -> int:
    signs = [s for s in (sign_at(p, x) for p in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: UPoly, lo: Fraction, hi: Fraction, chain=None) -> int:
    """Number of distinct real roots in the half-open interval (lo, hi]."""
    p = trim(p)
    if degree(p) < 1:
        return 0
    chain = chain or sturm_chain(p)
    return variations(chain, lo) - variations(chain, hi)


def root_bound(p: UPoly) -> Fraction:
    """All real roots lie strictly inside (-B, B)."""
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0)) + 1


class Root:
    """A real root: exact rational or an isolating interval (lo, hi)."""

    __slots__ = ("lo", "hi", "exact")

    def __init__(self, lo: Fraction, hi: Fraction, exact: bool):
        self.lo, self.hi, self.exact = lo, hi, exact

    def __repr__(self):
        return f"Root({self.lo})" if self.exact else f"Root({self.lo}, {self.hi})"


def isolate(p: UPoly) -> List[Root]:
    """Sorted, disjoint isolating intervals for the distinct real roots of p.

    Interval endpoints are never roots; exact rational roots found by
    bisection are reported as such.
    """
    p = squarefree(p)
    if degree(p) < 1:
        return []
    chain = sturm_chain(p)
    b = root_bound(p)
    out: List[Root] = []

    def go(lo: Fraction, hi: Fraction, n: int):
        if n == 0:
            return
        if n == 1:
            out.append(Root(lo, hi, False))
            return
        mid = (lo + hi) / 2
        if evaluate(p, mid) == 0:
            left = count_roots(p, lo, mid, chain) - 1
            go(lo, _nudge_left(p, lo, mid, chain), left) if left else None
            out.append(Root(mid, mid, True))
            right = count_roots(p, mid, hi, chain)
            go(_nudge_right(p, mid, hi, chain), hi, right) if right else None
            return
        go(lo, mid, count_roots(p, lo, mid, chain))
        go(mid, hi, count_roots(p, mid, hi, chain))

    go(-b, b, count_roots(p, -b, b, chain))
    out.sort(key=lambda r: r.lo)
    return out


def _nudge_left(p, lo, root, chain):
    """A point strictly between the roots below ``root`` and ``root`` itself."""
    step = (root - lo) / 2
    cand = root - step
    while count_roots(p, cand, root, chain) > 1 or evaluate(p, cand) == 0:
        step /= 2
        cand = root - step
    return cand


def _nudge_right(p, root, hi, chain):
    step = (hi - root) / 2
    cand = root + step
    while count_roots(p, root, cand, chain) > 0 or evaluate(p, cand) == 0:
        step /= 2
        cand = root + step
    return cand


def refine(p: UPoly, r: Root, chain=None) -> Root:
    """Halve an isolating interval."""
    if r.exact:
        return r
    chain = chain or sturm_chain(p)
    mid = (r.lo + r.hi) / 2
    if evaluate(p, mid) == 0:
        return Root(mid, mid, True)
    if count_roots(p, r.lo, mid, chain) == 1:
        return Root(r.lo, mid, False)
    return Root(mid, r.hi, False)


def sign_at_root(q: UPoly, p: UPoly, r: Root) -> int:
    """Sign of q at the root r of the square-free polynomial p.

    Requires every root of q inside r's interval to be a root of p (true
    when p is a multiple of q's square-free part).
    """
    q = trim(q)
    if not q:
        return 0
    if r.exact:
        return sign_at(q, r.lo)
    g = gcd(q, p)
    if degree(g) >= 1 and sign_at(g, r.lo) * sign_at(g, r.hi) < 0:
        return 0
    return sign_at(q, r.hi)

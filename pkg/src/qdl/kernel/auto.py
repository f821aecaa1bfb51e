"""Deterministic proof search.

The strategy is a fixed priority list:

1. close by ``ax``;
2. non-branching propositional and quantifier rules, then ``andr``;
3. program rules on the outermost modality that can make progress
   (``ind``/``con`` use the problem's annotations), and ``[:=]``;
4. for first-order goals: instantiate antecedent object quantifiers with
   the object terms of the succedent, then close with ``iall`` + ``qe``
   (one stage, or first the real Skolem constants and then the rest when
   the single stage exceeds the degree the eliminator supports).

Every step is an ordinary rule application, so the resulting tree prints
as a replayable script.
"""

from __future__ import annotations

import itertools
from typing import List, Optional

from ..errors import QdlError
from ..subst import free_vars
from ..syntax import ast as A
from ..syntax.typecheck import sort_of
from .core import ANTE, SUCC, Pos, ProofTree, RuleApp, fchildren
from .rules import _eps_update, _split_actual, liftable


class Budget(Exception):
    pass


def _try(tree: ProofTree, app: RuleApp) -> bool:
    try:
        tree.apply(app)
        return True
    except QdlError:
        return False


def _modalities(f, path=()):
    """Modal subformulas in pre-order (not descending into programs)."""
    if isinstance(f, (A.Box, A.Diamond)):
        yield path, f
        yield from _modalities(f.body, path + (0,))
        return
    for k, c in enumerate(fchildren(f)):
        yield from _modalities(c, path + (k,))


def _has_upd(f) -> bool:
    def go(n):
        if isinstance(n, A.Upd):
            return True
        if isinstance(n, (A.Box, A.Diamond)):
            return go(n.body)
        return any(go(c) for c in n.children() if not isinstance(c, A.Program))

    return go(f)


def _program_rule(f, top_succ: bool) -> List[str]:
    p = f.prog
    if isinstance(p, A.Seq):
        return ["[;]"]
    if isinstance(p, A.Choice):
        return ["[++]"]
    if isinstance(p, A.Test):
        return ["[?]"]
    if isinstance(p, A.NewAssign):
        return ["new"]
    if isinstance(p, A.QOde):
        return ["[']"]
    if isinstance(p, A.Star):
        if top_succ:
            return ["ind"] if isinstance(f, A.Box) else ["con"]
        return []
    if isinstance(p, A.QAssign):
        out = []
        hit = _eps_update(A.strip_spans(p))
        if hit is not None:
            sort, _ = hit
            body = A.strip_spans(f.body)
            if isinstance(body, (A.Box, A.Diamond)):
                out.append("nuA")
            elif _split_actual(body, sort, A.Imply) is not None:
                out.append("nuall")
            elif _split_actual(body, sort, A.And) is not None:
                out.append("nuexists")
        out += ["[:]", "[:*]"]
        return out
    return []


def _ground_object_terms(tree, fs, sort) -> list:
    out = []

    def term(t, bound):
        if isinstance(t, (A.Fn, A.Var)) and sort_of(t, tree.sig) == sort:
            if not (free_vars(t) & bound) and not isinstance(t, A.Var) or (
                    isinstance(t, A.Var) and t.name in tree.vars):
                key = A.strip_spans(t)
                if key not in out:
                    out.append(key)
        if isinstance(t, A.Upd):
            return
        for c in t.children():
            if isinstance(c, A.Term):
                term(c, bound)
            elif isinstance(c, A.Formula):
                form(c, bound)

    def form(g, bound):
        if isinstance(g, (A.Forall, A.Exists)):
            form(g.body, bound | {g.var})
        elif isinstance(g, (A.Box, A.Diamond)):
            return
        else:
            for c in g.children():
                if isinstance(c, A.Term):
                    term(c, bound)
                elif isinstance(c, A.Formula):
                    form(c, bound)

    for f in fs:
        form(f, frozenset())
    return out


def _object_prefix(f) -> List[str]:
    """Sorts of the leading object quantifiers (looking through implications)."""
    sorts = []
    while True:
        if isinstance(f, A.Forall) and f.sort != A.REAL:
            sorts.append(f.sort)
            f = f.body
        elif isinstance(f, A.Imply) and isinstance(f.right, A.Forall) and sorts:
            f = f.right
        else:
            return sorts


class Auto:
    def __init__(self, tree: ProofTree, max_steps: int = 5000):
        self.tree = tree
        self.max_steps = max_steps
        self.stuck = set()

    def run(self) -> ProofTree:
        while True:
            goals = [g for g in self.tree.open_goals() if g not in self.stuck]
            if not goals:
                return self.tree
            g = goals[0]
            if not self.step(g):
                self.stuck.add(g)

    def apply(self, app) -> bool:
        if len(self.tree.log) >= self.max_steps:
            raise Budget()
        return _try(self.tree, app)

    # ----------------------------------------------------------- step

    def step(self, gid: int) -> bool:
        t = self.tree
        seq = t.nodes[gid].sequent
        if self.apply(RuleApp(gid, "ax")):
            return True
        for i, f in enumerate(seq.succ):
            for cls, rname in ((A.Imply, "implyr"), (A.Not, "notr"), (A.Or, "orr"), (A.Forall, "allr"),
                               (A.Equiv, "equivr")):
                if isinstance(f, cls) and self.apply(RuleApp(gid, rname, Pos(SUCC, i))):
                    return True
        for i, f in enumerate(seq.ante):
            for cls, rname in ((A.And, "andl"), (A.Exists, "existsl"), (A.Not, "notl")):
                if isinstance(f, cls) and self.apply(RuleApp(gid, rname, Pos(ANTE, i))):
                    return True
        for i, f in enumerate(seq.succ):
            if isinstance(f, A.And) and self.apply(RuleApp(gid, "andr", Pos(SUCC, i))):
                return True
        for side in (SUCC, ANTE):
            for i, f in enumerate(seq.side(side)):
                if _has_upd(f) and self.apply(RuleApp(gid, "[:=]", Pos(side, i))):
                    return True
                for path, m in _modalities(f):
                    top = side == SUCC and not path
                    for rname in _program_rule(m, top):
                        pos = Pos(side, i) if rname in ("ind", "con") else Pos(side, i, path)
                        if self.apply(RuleApp(gid, rname, pos)):
                            return True
        if self.instantiate(gid):
            return True
        return self.close(gid)

    # ---------------------------------------------------- first order

    def instantiate(self, gid: int) -> bool:
        t = self.tree
        seq = t.nodes[gid].sequent
        for i, f in enumerate(seq.ante):
            sorts = _object_prefix(f)
            if not sorts:
                continue
            pools = []
            for s in sorts:
                pool = _ground_object_terms(t, seq.succ, s) or _ground_object_terms(t, seq.ante + seq.succ, s)
                pools.append(pool)
            if not all(pools):
                continue
            from ..syntax.printer import term_str

            cur = gid
            for combo in itertools.product(*pools):
                args = tuple(term_str(x) for x in combo)
                if self.apply(RuleApp(cur, "alll", Pos(ANTE, i), args)):
                    cur = t.nodes[cur].children[0]
            self.apply(RuleApp(cur, "hidel", Pos(ANTE, i)))
            return True
        return False

    def _settled(self, gid: int) -> bool:
        # whatever QE left open is final for this strategy
        self.stuck.update(self.tree.nodes[gid].children)
        return True

    def close(self, gid: int) -> bool:
        t = self.tree
        seq = t.nodes[gid].sequent
        if not any(liftable(f) for f in seq.ante + seq.succ):
            return False
        cp = t.checkpoint()
        if self.apply(RuleApp(gid, "iall")):
            if not t.nodes[gid].children:
                return True
            child = t.nodes[gid].children[0]
            if self.apply(RuleApp(child, "qe")):
                return self._settled(child)
        elif self.apply(RuleApp(gid, "qe")):
            return self._settled(gid)
        t.rollback(cp)
        # two stages: real Skolem constants first
        consts = sorted({n.name for f in seq.ante + seq.succ for n in f.walk()
                         if isinstance(n, A.Fn) and not n.args and n.name in t.skolems
                         and sort_of(n, t.sig) == A.REAL})
        if consts and self.apply(RuleApp(gid, "iall", None, tuple(consts))):
            c1 = t.nodes[gid].children[0]
            if self.apply(RuleApp(c1, "qe", Pos(SUCC, 0))):
                c2 = t.nodes[c1].children[0]
                if self.apply(RuleApp(c2, "iall")):
                    c3 = t.nodes[c2].children[0]
                    if self.apply(RuleApp(c3, "qe")):
                        return self._settled(c3)
        t.rollback(cp)
        return False


def prove_auto(problem: A.Problem, max_steps: int = 5000, tree: Optional[ProofTree] = None) -> ProofTree:
    tree = tree or ProofTree(problem)
    try:
        Auto(tree, max_steps).run()
    except Budget:
        pass
    return tree

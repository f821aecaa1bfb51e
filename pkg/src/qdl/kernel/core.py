"""Sequents, positions and proof trees."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from ..errors import RuleMismatch
from ..subst import Fresh, all_names
from ..syntax import ast as A
from ..syntax.printer import formula_str

ANTE, SUCC = "L", "R"


@dataclass(frozen=True)
class Sequent:
    ante: Tuple[A.Formula, ...] = ()
    succ: Tuple[A.Formula, ...] = ()

    def side(self, s: str) -> Tuple[A.Formula, ...]:
        return self.ante if s == ANTE else self.succ

    def with_side(self, s: str, fs) -> "Sequent":
        fs = tuple(fs)
        return Sequent(fs, self.succ) if s == ANTE else Sequent(self.ante, fs)

    def replace_at(self, s: str, i: int, new: List[A.Formula]) -> "Sequent":
        fs = list(self.side(s))
        fs[i:i + 1] = new
        return self.with_side(s, fs)

    def add(self, s: str, f: A.Formula) -> "Sequent":
        return self.with_side(s, self.side(s) + (f,))

    def as_formula(self) -> A.Formula:
        lhs = A.conj(self.ante)
        rhs = A.disj(self.succ)
        return rhs if not self.ante else A.Imply(lhs, rhs)

    def __str__(self):
        return ", ".join(formula_str(f) for f in self.ante) + " |- " + ", ".join(formula_str(f) for f in self.succ)


@dataclass(frozen=True)
class Pos:
    side: str
    index: int
    path: Tuple[int, ...] = ()

    def __str__(self):
        p = f"{self.side}:{self.index}"
        return p + ("/" + ".".join(map(str, self.path)) if self.path else "")

    @staticmethod
    def parse(text: str) -> "Pos":
        try:
            head, _, path = text.partition("/")
            side, _, idx = head.partition(":")
            side = side.upper()
            if side not in (ANTE, SUCC):
                raise ValueError(side)
            steps = tuple(int(x) for x in path.split(".")) if path else ()
            return Pos(side, int(idx), steps)
        except ValueError:
            raise RuleMismatch(f"bad position {text!r} (expected L:<i> or R:<i>[/<path>])")


# ------------------------------------------------------- subformulas


def fchildren(f: A.Formula) -> tuple:
    if isinstance(f, A.Not):
        return (f.arg,)
    if isinstance(f, A.BINARY):
        return (f.left, f.right)
    if isinstance(f, (A.Forall, A.Exists, A.Box, A.Diamond)):
        return (f.body,)
    return ()


def with_fchild(f: A.Formula, k: int, new: A.Formula) -> A.Formula:
    if isinstance(f, A.Not):
        return A.Not(new)
    if isinstance(f, A.BINARY):
        return type(f)(new, f.right) if k == 0 else type(f)(f.left, new)
    if isinstance(f, (A.Forall, A.Exists)):
        return type(f)(f.var, f.sort, new)
    if isinstance(f, (A.Box, A.Diamond)):
        return type(f)(f.prog, new)
    raise RuleMismatch("position path leads into an atomic formula")


def subformula(f: A.Formula, path) -> A.Formula:
    for k in path:
        ch = fchildren(f)
        if k >= len(ch):
            raise RuleMismatch(f"path step {k} does not exist")
        f = ch[k]
    return f


def replace_sub(f: A.Formula, path, new: A.Formula) -> A.Formula:
    if not path:
        return new
    ch = fchildren(f)
    if path[0] >= len(ch):
        raise RuleMismatch(f"path step {path[0]} does not exist")
    return with_fchild(f, path[0], replace_sub(ch[path[0]], path[1:], new))


# ---------------------------------------------------------- alpha-eq


def alpha_normal(node):
    """Rename bound variables canonically (by nesting depth)."""
    from ..subst import rename_var

    def go(n, depth):
        if isinstance(n, (A.Forall, A.Exists)):
            new = f"_{depth}"
            body = rename_var(n.body, n.var, new, n.sort) if n.var != new else n.body
            return type(n)(new, n.sort, go(body, depth + 1))
        if isinstance(n, (A.QAssign, A.QOde)) and n.qvar is not None:
            new = f"_{depth}"
            m = n
            if n.qvar != new:
                m = rename_var(A.Box(n, A.TRUE), n.qvar, new, n.sort).prog
                m = replace(m, qvar=new)
            return m.map_children(lambda c: go(c, depth + 1))
        if isinstance(n, A.Node):
            return n.map_children(lambda c: go(c, depth))
        return n

    return go(A.strip_spans(node), 0)


def alpha_eq(a, b) -> bool:
    a, b = A.strip_spans(a), A.strip_spans(b)
    return a == b or alpha_normal(a) == alpha_normal(b)


# ------------------------------------------------------------ trees


@dataclass
class Node:
    id: int
    sequent: Sequent
    parent: Optional[int] = None
    status: str = "open"  # open | closed | expanded
    rule: Optional[str] = None
    args: Tuple[str, ...] = ()
    pos: Optional[Pos] = None
    children: List[int] = field(default_factory=list)
    global_premise: bool = False
    note: str = ""


@dataclass(frozen=True)
class RuleApp:
    goal: int
    rule: str
    pos: Optional[Pos] = None
    args: Tuple[str, ...] = ()

    def __str__(self):
        import shlex

        s = f"goal {self.goal} {self.rule}"
        if self.pos is not None:
            s += f" at {self.pos}"
        if self.args:
            s += " with " + " ".join(shlex.quote(a) for a in self.args)
        return s


class ProofTree:
    """Proof state; mutated only through :meth:`apply`."""

    def __init__(self, problem: A.Problem, root: Optional[Sequent] = None):
        self.problem = problem
        self.sig = problem.signature
        self.vars: Dict[str, str] = {}
        self.skolems: Dict[str, Tuple[str, ...]] = {}
        names = set(all_names(problem.conjecture)) | self.sig.names()
        for a in problem.annotations:
            names |= all_names(a.formula)
        self.fresh = Fresh(names)
        self.nodes: Dict[int, Node] = {}
        self.log: List[RuleApp] = []
        seq = root if root is not None else Sequent((), (problem.conjecture,))
        self.nodes[0] = Node(0, seq)
        self.root = 0

    # ------------------------------------------------------- queries

    def open_goals(self) -> List[int]:
        return [n.id for n in self.nodes.values() if n.status == "open"]

    def is_closed(self) -> bool:
        return not self.open_goals()

    def goal(self, gid: int) -> Node:
        n = self.nodes.get(gid)
        if n is None:
            raise RuleMismatch(f"no goal {gid}")
        if n.status != "open":
            raise RuleMismatch(f"goal {gid} is not open")
        return n

    # ------------------------------------------------------ mutation

    def new_name(self, base: str) -> str:
        return self.fresh(base)

    def declare_function(self, name: str, args: Tuple[str, ...], result: str):
        self.sig = self.sig.with_function(A.FuncDecl(name, tuple(args), result))

    def declare_var(self, name: str, sort: str):
        self.vars[name] = sort

    def merge_goal(self, gid: int, into: int):
        n = self.goal(gid)
        n.status = "closed"
        n.rule = "iexists"
        n.note = f"merged into goal {into}"

    def _state(self):
        return (copy.deepcopy(self.fresh), self.sig, dict(self.vars), dict(self.skolems))

    def _restore(self, st):
        self.fresh, self.sig, self.vars, self.skolems = st

    def checkpoint(self):
        return copy.deepcopy((self.nodes, self.log)), self._state()

    def rollback(self, cp):
        (self.nodes, self.log), st = cp
        self._restore(st)

    def apply(self, app: RuleApp) -> List[int]:
        """Apply one rule; on failure the tree (including name supply) is unchanged."""
        from .rules import run_rule

        node = self.goal(app.goal)
        st = self._state()
        try:
            premises = run_rule(self, node, app)
        except Exception:
            self._restore(st)
            raise
        node.rule = app.rule
        node.args = app.args
        node.pos = app.pos
        self.log.append(app)
        if not premises:
            node.status = "closed"
            return []
        node.status = "expanded"
        ids = []
        for prem in premises:
            seq, is_global = prem if isinstance(prem, tuple) else (prem, False)
            nid = len(self.nodes)
            self.nodes[nid] = Node(nid, seq, parent=node.id, global_premise=is_global)
            node.children.append(nid)
            ids.append(nid)
        return ids

    def script(self) -> List[str]:
        return [str(a) for a in self.log]

    # ------------------------------------------------------- display

    def render(self, nid: int = None, indent: int = 0) -> List[str]:
        nid = self.root if nid is None else nid
        n = self.nodes[nid]
        mark = {"open": "OPEN", "closed": f"closed by {n.rule}", "expanded": f"by {n.rule}"}[n.status]
        g = " [global]" if n.global_premise else ""
        lines = [f"{'  ' * indent}({n.id}){g} {n.sequent}    <- {mark}"]
        for c in n.children:
            lines.extend(self.render(c, indent + 1))
        return lines

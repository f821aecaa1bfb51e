"""Tactic scripts (.tac), replay, and JSON proof export.

A script is a list of lines ``goal <id> <rule> [at <pos>] [with <args>]``;
``#`` starts a comment.  Goal ids are assigned deterministically (root 0,
then premises in creation order), so a script replays to the same tree.
"""

from __future__ import annotations

import hashlib
import json
import re
import shlex
from typing import List, Optional

from ..errors import QdlError, ReplayError
from ..syntax import ast as A
from ..syntax.printer import problem_str
from .core import Pos, ProofTree, RuleApp

_LINE = re.compile(r"^goal\s+(\d+)\s+(\S+)(?:\s+at\s+(\S+))?(?:\s+with\s+(.*))?$")


def parse_step(line: str) -> RuleApp:
    m = _LINE.match(line.strip())
    if m is None:
        raise QdlError(f"malformed tactic line: {line.strip()!r}")
    gid, rname, pos, args = m.groups()
    try:
        argv = tuple(shlex.split(args)) if args else ()
    except ValueError as e:
        raise QdlError(f"bad arguments in {line.strip()!r}: {e}")
    return RuleApp(int(gid), rname, Pos.parse(pos) if pos else None, argv)


def parse_script(text: str) -> List[RuleApp]:
    steps = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if line:
            steps.append(parse_step(line))
    return steps


def replay(problem: A.Problem, steps, tree: Optional[ProofTree] = None) -> ProofTree:
    """Apply ``steps``; a failing step raises :class:`ReplayError` naming it (1-based)."""
    tree = tree or ProofTree(problem)
    for k, app in enumerate(steps, 1):
        if isinstance(app, str):
            try:
                app = parse_step(app)
            except QdlError as e:
                raise ReplayError(str(e), k, e)
        try:
            tree.apply(app)
        except QdlError as e:
            raise ReplayError(f"{app}: {type(e).__name__}: {e}", k, e)
    return tree


def check_proof(problem: A.Problem, script: str) -> ProofTree:
    return replay(problem, parse_script(script))


def print_script(tree: ProofTree) -> str:
    return "\n".join(tree.script()) + "\n"


def problem_hash(problem: A.Problem) -> str:
    return hashlib.sha256(problem_str(problem).encode()).hexdigest()


def export_json(tree: ProofTree) -> dict:
    nodes = []
    for n in sorted(tree.nodes.values(), key=lambda n: n.id):
        nodes.append({
            "id": n.id,
            "sequent": str(n.sequent),
            "status": n.status,
            "rule": n.rule,
            "pos": str(n.pos) if n.pos else None,
            "args": list(n.args),
            "children": list(n.children),
            "global": n.global_premise,
            "note": n.note,
        })
    return {
        "schema": 1,
        "problem_sha256": problem_hash(tree.problem),
        "closed": tree.is_closed(),
        "open_goals": tree.open_goals(),
        "steps": tree.script(),
        "nodes": nodes,
        "edges": [[n["id"], c] for n in nodes for c in n["children"]],
    }


def check_json(problem: A.Problem, data: dict) -> ProofTree:
    """Re-check an exported proof: hash must match and the steps must replay to a closed tree."""
    if data.get("schema") != 1:
        raise ReplayError(f"unsupported proof schema {data.get('schema')!r}")
    if data.get("problem_sha256") != problem_hash(problem):
        raise ReplayError("proof was produced for a different problem")
    return replay(problem, data.get("steps", []))


def dumps(tree: ProofTree) -> str:
    return json.dumps(export_json(tree), indent=2, sort_keys=True)

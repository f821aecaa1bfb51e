"""Command-line front end.

Exit codes: 0 success (closed / no counterexample), 1 open goals,
2 error, 3 falsified.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from fractions import Fraction
from typing import List, Optional

from .errors import QdlError, ReplayError
from .kernel import ProofTree, check_json, check_proof, export_json, prove_auto, qe_formula
from .sim import Profile, SimBounds, falsify
from .syntax import ast as A
from .syntax.parser import parse_formula_lenient, parse_problem
from .syntax.printer import formula_str, problem_str
from .syntax.typecheck import check

EXIT_OK, EXIT_OPEN, EXIT_ERROR, EXIT_FALSIFIED = 0, 1, 2, 3


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def default_seed() -> str:
    return os.environ.get("QDL_SEED", "0")


def load_problem(path: str, hints: Optional[str] = None) -> A.Problem:
    """Parse a problem file; ``hints`` (annotation declarations) are spliced in before ``problem:``."""
    text = _read(path)
    if hints is not None:
        m = None
        for m in re.finditer(r"^\s*problem\s*:", text, re.M):
            pass
        if m is None:
            raise QdlError(f"{path}: no 'problem:' section")
        text = text[:m.start()] + "\n" + _read(hints) + "\n" + text[m.start():]
    return check(parse_problem(text))


def _fractions(text: str) -> tuple:
    try:
        return tuple(Fraction(x.strip()) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals, got {text!r}")


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _report(out, report: dict, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _open_goal_lines(tree: ProofTree) -> List[str]:
    return [f"goal {g}: {tree.nodes[g].sequent}" for g in tree.open_goals()]


# ----------------------------------------------------------- commands


def cmd_prove(args, out) -> int:
    prob = load_problem(args.file, args.hints)
    t0 = time.perf_counter()
    if args.tactic:
        tree = check_proof(prob, _read(args.tactic))
        if args.auto:
            prove_auto(prob, tree=tree)
    elif args.auto:
        tree = prove_auto(prob)
    else:
        tree = ProofTree(prob)
    elapsed = time.perf_counter() - t0
    closed = tree.is_closed()
    if args.tree:
        out.write("\n".join(tree.render()) + "\n")
    if args.print_script:
        out.write("\n".join(tree.script()) + "\n")
    if closed:
        out.write(f"closed ({len(tree.log)} steps)\n")
    else:
        out.write(f"open goals: {len(tree.open_goals())}\n")
        for line in _open_goal_lines(tree):
            out.write(line + "\n")
        for g in tree.open_goals():
            parent = tree.nodes[g].parent
            if parent is not None and tree.nodes[parent].rule == "qe":
                pn = tree.nodes[parent]
                out.write(f"  goal {g} is what qe left of goal {parent}: {pn.sequent}\n")
                src = tree.nodes[pn.parent] if pn.parent is not None else pn
                if src.rule == "iall" and src.note:
                    out.write(f"    where {src.note}\n")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(export_json(tree), fh, indent=2, sort_keys=True)
            fh.write("\n")
    report = {"schema": 1, "command": "prove", "input_sha256": _sha(problem_str(prob)),
              "outcome": "closed" if closed else "open", "steps": len(tree.log),
              "open_goals": _open_goal_lines(tree)}
    if args.timings:
        report["timings"] = {"prove_seconds": round(elapsed, 3)}
    _report(out, report, args.report)
    return EXIT_OK if closed else EXIT_OPEN


def cmd_falsify(args, out) -> int:
    prob = load_problem(args.file)
    bounds = SimBounds(max_loop_unroll=args.unroll, time_grid=args.grid, ode_substeps=args.substeps)
    profile = Profile(sizes=args.sizes, magnitude=args.magnitude, denominator=args.denominator)
    seed = args.seed if args.seed is not None else default_seed()
    t0 = time.perf_counter()
    res = falsify(prob, bounds, n_states=args.states, seed=seed, profile=profile)
    verdict = res.to_json()
    verdict["input_sha256"] = _sha(problem_str(prob))
    verdict["profile"] = profile.to_json()
    if args.timings:
        verdict["timings"] = {"falsify_seconds": round(time.perf_counter() - t0, 3)}
    out.write(json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    _report(out, {"schema": 1, "command": "falsify", "input_sha256": verdict["input_sha256"],
                  "outcome": res.verdict, "verdict": verdict}, args.report)
    return EXIT_FALSIFIED if res.verdict == "falsified" else EXIT_OK


def cmd_qe(args, out) -> int:
    f, sig = parse_formula_lenient(args.formula)
    if any(isinstance(n, (A.Box, A.Diamond)) for n in f.walk()):
        raise QdlError("qe expects a modality-free formula")
    out.write(formula_str(qe_formula(f, sig)) + "\n")
    return EXIT_OK


def cmd_check_proof(args, out) -> int:
    prob = load_problem(args.file)
    try:
        data = json.loads(_read(args.proof))
    except json.JSONDecodeError as e:
        raise ReplayError(f"proof file is not JSON: {e}")
    if not isinstance(data, dict):
        raise ReplayError("proof file must hold a JSON object")
    tree = check_json(prob, data)
    if not tree.is_closed():
        out.write(f"replayed, but {len(tree.open_goals())} goal(s) remain open\n")
        for line in _open_goal_lines(tree):
            out.write(line + "\n")
        return EXIT_OPEN
    out.write(f"ok: {len(tree.log)} steps replayed, proof closed\n")
    return EXIT_OK


def cmd_fmt(args, out) -> int:
    out.write(problem_str(load_problem(args.file)))
    return EXIT_OK


# ------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdl", description="Quantified differential dynamic logic toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="replay a tactic script and/or run automatic proof search")
    p.add_argument("file")
    p.add_argument("--tactic", help="tactic script (.tac)")
    p.add_argument("--auto", action="store_true", help="run proof search (after the script, if any)")
    p.add_argument("--hints", help="extra invariant/variant annotations")
    p.add_argument("--json", help="write the proof tree as JSON")
    p.add_argument("--report", help="write a JSON run report")
    p.add_argument("--tree", action="store_true", help="print the proof tree")
    p.add_argument("--print-script", action="store_true", help="print the applied steps as a script")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("falsify", help="search random finite states for a counterexample")
    p.add_argument("file")
    p.add_argument("--states", type=int, default=500)
    p.add_argument("--seed", default=None, help="default: $QDL_SEED or 0")
    p.add_argument("--unroll", type=int, default=3)
    p.add_argument("--grid", type=_fractions, default=SimBounds().time_grid,
                   help="comma-separated ODE time grid, e.g. 0,1/10,1/2,1")
    p.add_argument("--substeps", type=int, default=SimBounds().ode_substeps)
    p.add_argument("--sizes", type=_ints, default=Profile().sizes, help="carrier sizes to cycle through")
    p.add_argument("--magnitude", type=int, default=Profile().magnitude)
    p.add_argument("--denominator", type=int, default=Profile().denominator)
    p.add_argument("--report", help="write a JSON run report")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(run=cmd_falsify)

    p = sub.add_parser("qe", help="eliminate quantifiers from a first-order real formula")
    p.add_argument("formula")
    p.set_defaults(run=cmd_qe)

    p = sub.add_parser("check-proof", help="re-check an exported JSON proof")
    p.add_argument("file")
    p.add_argument("proof")
    p.set_defaults(run=cmd_check_proof)

    p = sub.add_parser("fmt", help="print the problem in normal form")
    p.add_argument("file")
    p.set_defaults(run=cmd_fmt)
    return ap


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        return args.run(args, out)
    except ReplayError as e:
        err.write(f"ReplayError: {e}\n")
    except QdlError as e:
        err.write(f"{type(e).__name__}: {e}\n")
    except (OSError, ValueError) as e:
        err.write(f"error: {e}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

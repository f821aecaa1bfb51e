"""Sequent calculus kernel."""

from .auto import prove_auto
from .core import ANTE, SUCC, Node, Pos, ProofTree, RuleApp, Sequent, alpha_eq
from .rules import RULES, qe_formula
from .tactic import check_json, check_proof, export_json, parse_script, print_script, replay

__all__ = ["ANTE", "SUCC", "Node", "Pos", "ProofTree", "RuleApp", "Sequent", "alpha_eq", "RULES",
           "qe_formula", "check_json", "check_proof", "export_json", "parse_script", "print_script",
           "prove_auto", "replay"]

"""Concrete syntax: AST, parser, printer, typechecker, conditional-term desugaring."""

from . import ast
from .desugar import desugar_conditional, has_cond
from .parser import parse_formula, parse_formula_lenient, parse_problem, parse_program, parse_term
from .printer import formula_str, problem_str, program_str, term_str, to_str
from .typecheck import check, sort_of, typecheck

__all__ = ["ast", "desugar_conditional", "has_cond", "parse_formula", "parse_formula_lenient", "parse_problem",
           "parse_program", "parse_term", "formula_str", "problem_str", "program_str", "term_str", "to_str",
           "check", "sort_of", "typecheck"]

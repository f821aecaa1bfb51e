"""Exact real arithmetic: polynomials, quantifier-free formulas, quantifier elimination."""

from .poly import Poly
from .qf import (FALSE, TRUE, AllQ, AndQ, Atom, ExQ, FF, NotQ, OrQ, QF, TT, atom, eval_ground,
                 free_vars, holds, mk_and, mk_not, mk_or, nnf)
from .vs import QE, decide_univariate, elim_linear, qe

__all__ = ["Poly", "FALSE", "TRUE", "AllQ", "AndQ", "Atom", "ExQ", "FF", "NotQ", "OrQ", "QF", "TT", "atom",
           "eval_ground", "free_vars", "holds", "mk_and", "mk_not", "mk_or", "nnf", "QE", "decide_univariate",
           "elim_linear", "qe"]

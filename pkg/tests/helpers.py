"""Shared oracles for the test suite."""

import pathlib
import random
from fractions import Fraction

from qdl.arith.qf import holds
from qdl.syntax import parse_problem

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

SIG_CARS = """sort C;
func R x(C);
func R v(C);
func R a(C);
func C l(C);
func R b();
problem: true;
"""


def load(name):
    return parse_problem((CORPUS / name).read_text(encoding="utf-8"))


def cars_sig():
    return parse_problem(SIG_CARS).signature


def rationals(rng: random.Random, n: int, mag: int = 3, den: int = 4):
    return [Fraction(rng.randint(-mag * den, mag * den), den) for _ in range(n)]


def qf_agree(a, b, names, samples=200, seed=0, mag=3, den=4):
    """Count assignments on which two quantifier-free formulas disagree."""
    rng = random.Random(seed)
    bad = 0
    for _ in range(samples):
        env = dict(zip(names, rationals(rng, len(names), mag, den)))
        if holds(a, env) != holds(b, env):
            bad += 1
    return bad

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdl.errors import NotAdmissible
from qdl.sim import Profile, Simulator, random_state
from qdl.subst import Fresh, Substitution, admissible, apply_subst, bound_symbols, subst_vars
from qdl.syntax import ast as A
from qdl.syntax import formula_str, parse_formula, parse_problem, parse_program, parse_term, term_str

from strategies import SIG, formulas, obj_terms, real_terms

S = parse_problem("sort C; func R x(); func R v(C); func R a(C); func C nu(); func R y(); func C j();"
                  " func C c1(); problem: true;").signature


def test_bound_symbols_examples():
    assert bound_symbols(parse_program("x := 1; forall C i. {v(i)' = a(i)}", S)) == {"x", "v"}
    assert bound_symbols(parse_program("?x > 0", S)) == set()
    assert bound_symbols(parse_program("nu := new C", S)) == {"nu", "eps_C"}


def test_modality_blocks_substitution():
    f = parse_formula("[x := 1] x > 0", S)
    sigma = Substitution.of({A.Fn("x"): parse_term("y + 1", S)})
    v = admissible(sigma, f)
    assert v is not None and v.symbol == "x"
    with pytest.raises(NotAdmissible):
        apply_subst(sigma, f)


def test_identity_substitution_ok():
    f = parse_formula("[x := 1] x > 0", S)
    assert admissible(Substitution.of({}), f) is None
    assert apply_subst(Substitution.of({}), f) is f


def test_unassigned_symbol_under_quantifier_ok():
    g = parse_formula("forall C i. a(i) > 0", S)
    assert admissible(Substitution.of({A.Fn("a", (A.Fn("j"),)): A.Num(Fraction(5))}), g) is None


def test_instance_replaces_variable():
    t = A.Plus(A.Fn("a", (A.Var("i", "C"),)), A.Num(Fraction(1)))
    assert term_str(apply_subst(Substitution.of({A.Var("i", "C"): A.Fn("c1")}), t)) == "a(c1) + 1"


def test_alpha_renaming_on_capture():
    h = A.Forall("i", "C", A.Cmp(">", A.Fn("a", (A.Var("i", "C"),)), A.Fn("v", (A.Var("k", "C"),))))
    out = apply_subst(Substitution.of({A.Var("k", "C"): A.Var("i", "C")}), h)
    assert isinstance(out, A.Forall) and out.var != "i"
    assert A.strip_spans(out.body.right) == A.Fn("v", (A.Var("i", "C"),))


def test_alpha_renaming_preserves_truth():
    sig = S
    h = A.Exists("i", "C", A.Cmp(">", A.Fn("a", (A.Var("i", "C"),)), A.Fn("v", (A.Var("k", "C"),))))
    out = subst_vars(h, {"k": A.Var("i", "C")})
    sim = Simulator(sig)
    for seed in range(40):
        s = random_state(sig, Profile(sizes=(3,)), seed)
        for o in s.domain("C"):
            assert sim.decide(h, s, {"k": o}) == sim.decide(out, s, {"i": o})


def test_fresh_names_unique():
    fr = Fresh({"t", "t$1"})
    names = [fr("t") for _ in range(5)]
    assert len(set(names)) == 5 and "t" not in names and "t$1" not in names


def _binders(f):
    return sorted(type(n).__name__ for n in f.walk() if isinstance(n, (A.Forall, A.Exists, A.Box, A.Diamond)))


@st.composite
def ground_substitutions(draw):
    """Replace the constant b by a real term and/or n by an object term."""
    pairs = {}
    if draw(st.booleans()):
        pairs[A.Fn("b")] = draw(real_terms([], 1))
    if draw(st.booleans()) or not pairs:
        pairs[A.Fn("n")] = draw(obj_terms([]))
    return pairs


@settings(max_examples=500, deadline=None)
@given(formulas(depth=2, modal=False), ground_substitutions(), st.integers(0, 10**6))
def test_ground_substitution_lemma(phi, pairs, seed):
    sigma = Substitution.of(pairs)
    assert admissible(sigma, phi) is None
    s = random_state(SIG, Profile(sizes=(2,)), seed)
    sim = Simulator(SIG)
    writes = {(p.name, ()): sim.eval_term(r, s) for p, r in pairs.items()}
    assert sim.decide(apply_subst(sigma, phi), s) == sim.decide(phi, s.update(writes))


@settings(max_examples=200, deadline=None)
@given(formulas(), ground_substitutions())
def test_binders_preserved_up_to_renaming(phi, pairs):
    sigma = Substitution.of(pairs)
    if admissible(sigma, phi) is None:
        assert _binders(apply_subst(sigma, phi)) == _binders(phi)


@settings(max_examples=200, deadline=None)
@given(formulas(), st.sampled_from(["forall", "box"]))
def test_admissibility_monotone(phi, wrap):
    sigma = Substitution.of({A.Fn("b"): A.Num(Fraction(1))})
    if admissible(sigma, phi) is None:
        return
    outer = (A.Forall("z", "C", phi) if wrap == "forall"
             else A.Box(A.Test(A.TRUE), A.And(phi, A.TRUE)))
    assert admissible(sigma, outer) is not None


def test_program_substitution_blocked_in_assignment():
    f = parse_formula("[x := x + 1] x > y", S)
    assert admissible(Substitution.of({A.Fn("y"): A.Num(Fraction(2))}), f) is None
    out = apply_subst(Substitution.of({A.Fn("y"): A.Num(Fraction(2))}), f)
    assert formula_str(out) == "[x := x + 1]x > 2"

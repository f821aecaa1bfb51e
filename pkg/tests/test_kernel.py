import json

import pytest

from qdl.errors import NotInjective, QdlError, ReplayError
from qdl.kernel import (Pos, ProofTree, RuleApp, Sequent, check_json, check_proof, export_json, parse_script,
                        print_script, prove_auto, replay)
from qdl.syntax import ast as A
from qdl.syntax import formula_str, parse_problem

from helpers import CORPUS, load
from soundness import equivalence_violations, global_rule_violations, skolem_violations

CARS = "sort C; func R x(C); func R v(C); func C l(C); func R p(); func R a(); func C c();"


def tree_for(text):
    return ProofTree(parse_problem(text))


def step(tree, goal, rule, pos=None, *args):
    return tree.apply(RuleApp(goal, rule, Pos.parse(pos) if pos else None, tuple(args)))


def seq(tree, gid):
    return str(tree.nodes[gid].sequent).strip()


# ------------------------------------------------------------ examples


def test_existsr_with_witness_then_qe():
    t = tree_for("func R a(); problem: exists R x. x^2 > a;")
    (g,) = step(t, 0, "existsr", "R:0", "a+1")
    assert seq(t, g) == "|- exists R x. x^2 > a, (a + 1)^2 > a"
    assert step(t, g, "qe") == []
    assert t.is_closed()


def test_propositional_rules():
    t = tree_for("func R p(); problem: p > 0 -> p > 0 & true;")
    (g,) = step(t, 0, "implyr", "R:0")
    g1, g2 = step(t, g, "andr", "R:0")
    assert step(t, g1, "ax") == []
    assert step(t, g2, "truer") == []
    assert t.is_closed()


def test_cut_premises():
    t = tree_for("func R p(); problem: p > 0;")
    a, b = step(t, 0, "cut", None, "p > 1")
    assert seq(t, a) == "|- p > 0, p > 1"
    assert seq(t, b) == "p > 1 |- p > 0"


def test_sequential_then_test_at_subposition():
    t = tree_for("func R p(); problem: [?p > 0; ?p > 1] p > 1;")
    (g,) = step(t, 0, "[;]", "R:0")
    (h,) = step(t, g, "[?]", "R:0/0")
    # path 0 is the postcondition of the outer box
    assert seq(t, h) == "|- [?p > 0](p > 1 -> p > 1)"


def test_qe_closes_ground_truth_and_empty_script_leaves_goal():
    t = tree_for("problem: 1 > 0;")
    assert step(t, 0, "qe") == []
    t2 = replay(parse_problem("problem: true;"), [])
    assert t2.open_goals() == [0]


def test_alll_without_argument_introduces_variable():
    t = tree_for(CARS + " problem: (forall C i. x(i) > 0) -> x(c) > 0;")
    (g,) = step(t, 0, "implyr", "R:0")
    (h,) = step(t, g, "alll", "L:0")
    assert "x(I$1) > 0" in seq(t, h)
    assert t.vars == {"I$1": "C"}


def test_alll_with_term_then_close():
    t = tree_for(CARS + " problem: (forall C i. x(i) > 0) -> x(c) > 0;")
    (g,) = step(t, 0, "implyr", "R:0")
    (h,) = step(t, g, "alll", "L:0", "c")
    step(t, h, "ax")
    assert t.is_closed()


def test_allr_skolem_has_no_spurious_dependencies():
    t = tree_for("func R b(); problem: forall R t. t >= 0 -> t + b >= b;")
    (g,) = step(t, 0, "allr", "R:0")
    (name,) = t.skolems
    assert t.skolems[name] == ()
    assert name.startswith("t$")


def test_con_premises():
    t = tree_for("func R x(); problem: x >= 0 -> <(x := x - 1)*@down> x < 1;"
                 " variant down (n): x <= n & x >= n - 1;")
    (g,) = step(t, 0, "implyr", "R:0")
    prems = step(t, g, "con", "R:0")
    assert len(prems) == 3
    globals_ = [t.nodes[p].global_premise for p in prems]
    assert globals_ == [False, True, True]
    assert "exists R" in seq(t, prems[0])
    assert "> 0" in seq(t, prems[1]) and "<x := x - 1>" in seq(t, prems[1])
    assert "<= 0" in seq(t, prems[2])


def test_new_rule_premise():
    t = tree_for(CARS + " problem: [c := new C] eps_C(c) = 1;")
    (g,) = step(t, 0, "new", "R:0")
    s = seq(t, g)
    assert s.startswith("|- forall C ")
    assert "!(eps_C(" in s and ":= 1]" in s


def test_quantified_assignment_needs_injective_lhs():
    t = tree_for(CARS + " problem: [forall C i. x(l(i)) := 0] true;")
    with pytest.raises(NotInjective):
        step(t, 0, "[:]", "R:0")
    assert t.open_goals() == [0] and not t.log


def test_failed_rule_leaves_tree_unchanged():
    t = tree_for("func R p(); problem: p > 0 -> p > 0;")
    before = (t.render(), dict(t.vars), dict(t.skolems), t.script())
    with pytest.raises(QdlError):
        step(t, 0, "andr", "R:0")
    assert (t.render(), dict(t.vars), dict(t.skolems), t.script()) == before


def test_replay_error_reports_step():
    prob = parse_problem("func R p(); problem: p > 0 -> p > 0;")
    with pytest.raises(ReplayError) as e:
        check_proof(prob, "goal 0 andr at R:0\n")
    assert e.value.step == 1


def test_auto_closes_trivial():
    assert prove_auto(load("valid/trivial.qdl")).is_closed()


# -------------------------------------------------- kernel discipline


@pytest.mark.parametrize("name", ["valid/loop.qdl", "valid/choice.qdl", "valid/variant.qdl", "valid/created.qdl"])
def test_printed_script_reproduces_tree(name):
    prob = load(name)
    tree = prove_auto(prob)
    again = check_proof(prob, print_script(tree))
    assert again.render() == tree.render()
    assert parse_script(print_script(tree)) == tree.log


def test_json_export_roundtrip():
    prob = load("fig5.qdl")
    tree = check_proof(prob, (CORPUS / "fig5.tac").read_text())
    data = json.loads(json.dumps(export_json(tree)))
    assert {"nodes", "edges"} <= set(data)
    assert check_json(prob, data).render() == tree.render()


def test_sequent_formula_shape():
    p = A.Cmp(">", A.Fn("p"), A.Num(0))
    assert formula_str(Sequent((), (p,)).as_formula()) == "p > 0"
    assert isinstance(Sequent((p,), (p, p)).as_formula(), A.Imply)


# ------------------------------------------------- sampled soundness

SOUNDNESS_CORPUS = ["valid/inc.qdl", "valid/loop.qdl", "valid/variant.qdl", "valid/choice.qdl",
                    "valid/created.qdl", "valid/seq.qdl", "valid/anyassign.qdl", "valid/reset.qdl",
                    "valid/test.qdl", "valid/dchoice.qdl", "valid/equiv.qdl"]


@pytest.mark.parametrize("name", SOUNDNESS_CORPUS)
def test_equivalence_rules_preserve_truth(name):
    tree = prove_auto(load(name))
    checked, bad = equivalence_violations(tree, n_states=100)
    assert bad == 0
    assert checked > 0


def test_equivalence_rules_in_braking_cars_proof():
    tree = check_proof(load("fig5.qdl"), (CORPUS / "fig5.tac").read_text())
    checked, bad = equivalence_violations(tree, n_states=100)
    assert bad == 0 and checked >= 100


@pytest.mark.parametrize("name", ["valid/loop.qdl", "valid/variant.qdl", "valid/doubling.qdl"])
def test_global_rules_sampled(name):
    prob = load(name)
    tac = CORPUS / name.replace(".qdl", ".tac")
    tree = check_proof(prob, tac.read_text()) if tac.exists() else prove_auto(prob)
    checked, bad = global_rule_violations(tree)
    assert bad == 0 and checked > 0


def test_checker_detects_unsound_premise():
    tree = prove_auto(load("valid/choice.qdl"))
    node = next(n for n in tree.nodes.values() if n.rule in ("[++]", "<++>", "choice"))
    tree.nodes[node.children[0]].sequent = Sequent((), (A.FALSE,))
    assert equivalence_violations(tree, n_states=60)[1] > 0


@pytest.mark.parametrize("text,script", [
    ("func R c(); problem: forall R x. x > c;", [("allr", "R:0")]),
    ("func R c(); problem: (exists R x. x < c) -> false;", [("implyr", "R:0"), ("existsl", "L:0")]),
    ("sort C; func R a(C); problem: forall C i. a(i) > 0;", [("allr", "R:0")]),
])
def test_skolem_rules_sampled(text, script):
    t = tree_for(text)
    g = 0
    for rule, pos in script:
        (g,) = step(t, g, rule, pos)
    checked, bad = skolem_violations(t, n_states=60)
    assert bad == 0 and checked > 0

import random
from fractions import Fraction

import pytest

from qdl.arith.lift import Abstraction, to_qf
from qdl.errors import UnsupportedOde
from qdl.ode import (QOdeSystem, Solution, check_solution, evolve_guard, mk_evolve_update, numeric_flow,
                     solve_qode)
from qdl.syntax import ast as A
from qdl.syntax import formula_str, parse_problem, parse_program, parse_term, program_str, term_str

SIG = parse_problem("sort C; func R x(C); func R v(C); func R a(C); func R b(); func R s(); problem: true;").signature
SCOPE = [("i", "C"), ("t", "R")]
T = A.Var("t", "R")

# solution of the accelerated-cars system, written out by hand
ACCEL_X = "x(i) + v(i)*t + 1/2*a(i)*t^2"
ACCEL_V = "v(i) + a(i)*t"
MUTANTS = [
    ("x(i) + v(i)*t + a(i)*t^2", ACCEL_V),
    ("x(i) + v(i)*t + 1/3*a(i)*t^2", ACCEL_V),
    ("x(i) + 2*v(i)*t + 1/2*a(i)*t^2", ACCEL_V),
    ("x(i) - v(i)*t + 1/2*a(i)*t^2", ACCEL_V),
    ("2*x(i) + v(i)*t + 1/2*a(i)*t^2", ACCEL_V),
    ("x(i) + v(i)*t + 1/2*a(i)*t^2 + 1", ACCEL_V),
    (ACCEL_X, "v(i) + 2*a(i)*t"),
    (ACCEL_X, "v(i) + 1/2*a(i)*t"),
    (ACCEL_X, "3/2*v(i) + a(i)*t"),
    ("x(i) + v(i)*t + 1/2*a(i)*t^2 + 1/6*a(i)*t^3", ACCEL_V),
]


def accel_system():
    return QOdeSystem.of(parse_program("forall C i. {x(i)' = v(i), v(i)' = a(i)}", SIG), "t")


def candidate(xs, vs):
    i = A.Var("i", "C")
    return Solution(((A.Fn("x", (i,)), parse_term(xs, SIG, scope=SCOPE)),
                     (A.Fn("v", (i,)), parse_term(vs, SIG, scope=SCOPE))), "t")


def same_poly(s, t):
    ab = Abstraction()
    return to_qf(A.Cmp("=", s, t), SIG, ab)[0] == to_qf(A.Cmp("=", t, t), SIG, ab)[0]


def test_accel_solution_synthesized():
    sol = solve_qode(accel_system())
    got = {lhs.name: rhs for lhs, rhs in sol.updates}
    assert same_poly(got["x"], parse_term(ACCEL_X, SIG, scope=SCOPE))
    assert same_poly(got["v"], parse_term(ACCEL_V, SIG, scope=SCOPE))


def test_accel_handwritten_solution_checks():
    assert check_solution(accel_system(), candidate(ACCEL_X, ACCEL_V)) is None


def test_perturbed_candidate_residual():
    m = check_solution(accel_system(), candidate("x(i) + v(i)*t + a(i)*t^2", ACCEL_V))
    assert m is not None and m.index == 0
    # residual must be a(i)*t up to sign: check on sample points
    (av,) = [n for n in m.residual.vars() if n != "t"]
    for a_, t_ in ((1, 1), (2, 3), (-3, 5)):
        assert abs(m.residual.evaluate({av: Fraction(a_), "t": Fraction(t_)})) == abs(a_ * t_)


@pytest.mark.parametrize("k", range(len(MUTANTS)))
def test_mutants_rejected(k):
    m = check_solution(accel_system(), candidate(*MUTANTS[k]))
    assert m is not None
    assert not m.residual.is_zero()


def test_clock():
    sol = solve_qode(QOdeSystem.of(parse_program("{s' = 1}", SIG), "t"))
    (lhs, rhs), = sol.updates
    assert same_poly(rhs, parse_term("s + t", SIG, scope=SCOPE))


def test_exponential_unsupported():
    with pytest.raises(UnsupportedOde):
        solve_qode(QOdeSystem.of(parse_program("forall C i. {x(i)' = x(i)}", SIG)))


def test_exponential_has_no_polynomial_solution_up_to_degree_4():
    # ansatz x = c0 + ... + c4 t^4 with x' = x: (k+1) c_{k+1} = c_k for k < 4, and 0 = c_4
    for x0 in (Fraction(1), Fraction(-2, 3)):
        c = [x0]
        for k in range(4):
            c.append(c[k] / (k + 1))
        assert c[4] != 0  # contradicts 0 = c_4


def test_braking_update_and_trivial_guard():
    sys_ = QOdeSystem.of(parse_program("forall C i. {x(i)' = v(i), v(i)' = -b}", SIG), "t")
    sol = solve_qode(sys_)
    upd = mk_evolve_update(sys_, sol, T)
    got = {e.lhs.name: e.rhs for e in upd.eqns}
    assert upd.qvar == "i"
    assert same_poly(got["x"], parse_term("-1/2*b*t^2 + v(i)*t + x(i)", SIG, scope=SCOPE))
    assert isinstance(evolve_guard(sys_, sol, T, "u"), A.TrueF)


def test_domain_guard_quantifies_intermediate_time():
    sys_ = QOdeSystem.of(parse_program("forall C i. {x(i)' = v(i), v(i)' = a(i) & v(i) >= 0}", SIG), "t")
    g = evolve_guard(sys_, solve_qode(sys_), T, "u")
    assert isinstance(g, A.Forall) and g.var == "u" and g.sort == A.REAL
    assert "0 <= u & u <= t" in formula_str(g)


def test_zero_duration_identity():
    sol = solve_qode(accel_system())
    for lhs, rhs in sol.at(A.Num(Fraction(0))):
        assert same_poly(rhs, lhs)


def test_numeric_agreement():
    rng = random.Random(7)
    for _ in range(20):
        x0, v0, a0 = (Fraction(rng.randint(-20, 20), 4) for _ in range(3))
        for dur in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)):
            num = numeric_flow({"x": float(x0), "v": float(v0)}, 64, float(dur),
                               lambda y: {"x": y["v"], "v": float(a0)})
            exact = {"x": x0 + v0 * dur + a0 * dur * dur / 2, "v": v0 + a0 * dur}
            for k in ("x", "v"):
                assert abs(num[k] - float(exact[k])) <= 1e-6 * max(1.0, abs(float(exact[k])))


def test_degree_bounded_by_chain_length():
    sys_ = QOdeSystem.of(parse_program("{s' = b}", SIG), "t")
    (lhs, rhs), = solve_qode(sys_).updates
    assert "t^2" not in term_str(rhs)
    assert "t^3" not in program_str(mk_evolve_update(accel_system(), solve_qode(accel_system()), T))

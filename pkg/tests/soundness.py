"""Sampling checks for rule instances recorded in proof trees."""

import random
from fractions import Fraction

from qdl.sim import Profile, SimBounds, Simulator, random_state
from qdl.syntax import ast as A

EQUIV_RULES = {"cond", "[*]", "<*>", "unfold", "[;]", "<;>", "seq", "[++]", "<++>", "choice", "[?]", "<?>", "test",
               "[:=]", "<:=>", "assign", "[:]", "<:>", "update", "[:*]", "<:*>", "anyassign"}
SKOLEM_RULES = {"allr", "forallr", "existsl"}
GLOBAL_RULES = {"[]gen", "boxgen", "<>gen", "diagen", "ind", "con"}


def instances(tree, rules):
    for n in sorted(tree.nodes.values(), key=lambda n: n.id):
        if n.rule in rules and n.children:
            yield n, [tree.nodes[c] for c in n.children]


def env_for(tree, state, rng):
    env = {}
    for v, srt in tree.vars.items():
        if srt == A.REAL:
            env[v] = Fraction(rng.randint(-8, 8), 2)
        else:
            env[v] = rng.choice(state.created(srt) or state.domain(srt))
    return env


def states(tree, n, seed, sizes=(2, 3)):
    prof = Profile(sizes=sizes)
    for k in range(n):
        yield random_state(tree.sig, prof, f"snd:{seed}:{k}", sizes[k % len(sizes)])


def equivalence_violations(tree, n_states=100, seed=0, bounds=SimBounds()):
    """(checked, violations) over the equivalence-rule instances in ``tree``."""
    sim = Simulator(tree.sig, bounds)
    rng = random.Random(seed)
    checked = bad = 0
    for node, (prem,) in instances(tree, EQUIV_RULES):
        concl = node.sequent.as_formula()
        pf = prem.sequent.as_formula()
        for s in states(tree, n_states, f"{seed}:{node.id}"):
            env = env_for(tree, s, rng)
            a, b = sim.decide(concl, s, env), sim.decide(pf, s, env)
            if a is None or b is None:
                continue
            checked += 1
            bad += a != b
    return checked, bad


def _skolem_of(tree, node, prem):
    before = set(f.name for f in node.sequent.as_formula().walk() if isinstance(f, A.Fn))
    new = [f for f in prem.sequent.as_formula().walk() if isinstance(f, A.Fn) and f.name in tree.skolems
           and f.name not in before]
    return new[0].name if new else None


def _witnesses(quant, s):
    if quant.sort == A.REAL:
        return [Fraction(k, 4) for k in range(-32, 33)]
    return list(s.domain(quant.sort))


def skolem_violations(tree, n_states=60, seed=0, bounds=SimBounds()):
    """If the conclusion is false, the Skolem term set to a witness must falsify the premise."""
    sim = Simulator(tree.sig, bounds)
    rng = random.Random(seed)
    checked = bad = 0
    for node, (prem,) in instances(tree, SKOLEM_RULES):
        sk = _skolem_of(tree, node, prem)
        side = node.sequent.succ if node.rule != "existsl" else node.sequent.ante
        quant = side[node.pos.index]
        rest_concl = node.sequent.as_formula()
        for s in states(tree, n_states, f"{seed}:{node.id}"):
            env = env_for(tree, s, rng)
            if sim.decide(rest_concl, s, env) is not False:
                continue
            for w in _witnesses(quant, s):
                body_val = sim.decide(quant.body, s, {**env, quant.var: w})
                refutes = body_val is False if node.rule != "existsl" else body_val is True
                if not refutes:
                    continue
                s2 = s.update({}) if sk is None else _const_fn(s, sk, w)
                checked += 1
                if sim.decide(prem.sequent.as_formula(), s2, env) is True:
                    bad += 1
                break
    return checked, bad


def _const_fn(s, name, value):
    from qdl.sim.state import State

    tables = {k: dict(v) for k, v in s.tables.items()}
    tables.pop(name, None)
    defaults = dict(s.defaults)
    defaults[name] = value
    return State(s.carriers, tables, defaults, s.env)


def global_rule_violations(tree, n_states=60, n_global=40, seed=0, bounds=SimBounds()):
    """Premises true (globals on all fresh samples) but conclusion false counts as a violation."""
    sim = Simulator(tree.sig, bounds)
    rng = random.Random(seed)
    checked = bad = 0
    for node, prems in instances(tree, GLOBAL_RULES):
        glob = [p for p in prems if p.global_premise]
        local = [p for p in prems if not p.global_premise]
        ok = True
        for g in glob:
            for s in states(tree, n_global, f"{seed}:g:{node.id}"):
                if sim.decide(g.sequent.as_formula(), s, env_for(tree, s, rng)) is False:
                    ok = False
                    break
        if not ok:
            continue
        for s in states(tree, n_states, f"{seed}:{node.id}"):
            env = env_for(tree, s, rng)
            if all(sim.decide(p.sequent.as_formula(), s, env) is True for p in local):
                c = sim.decide(node.sequent.as_formula(), s, env)
                if c is None:
                    continue
                checked += 1
                bad += c is False
    return checked, bad

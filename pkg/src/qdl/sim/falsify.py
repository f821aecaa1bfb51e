"""Random finite states and the falsification loop."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from ..syntax import ast as A
from .semantics import Simulator, Trace, format_trace
from .state import SimBounds, State


@dataclass(frozen=True)
class Profile:
    """Sampling profile.

    ``sizes`` are cycled through per sample; values are multiples of
    ``1/denominator`` with absolute value at most ``magnitude``.
    Small ranges are deliberate: collisions and boundary cases only show
    up when values coincide.
    """

    sizes: Tuple[int, ...] = (2, 3)
    magnitude: int = 4
    denominator: int = 2
    slack: int = 0

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "magnitude": self.magnitude,
                "denominator": self.denominator, "slack": self.slack}


def _value(rng: random.Random, prof: Profile) -> Fraction:
    k = prof.magnitude * prof.denominator
    return Fraction(rng.randint(-k, k), prof.denominator)


def random_state(sig: A.Signature, profile: Profile = Profile(), seed=0, size: Optional[int] = None) -> State:
    """Deterministic in (signature, profile, seed)."""
    rng = random.Random(f"qdl:{seed}")
    n = size if size is not None else profile.sizes[0]
    if n < 1:
        raise ValueError("carrier size must be at least 1")
    carriers = {}
    alive = {}
    for srt in sig.sorts:
        members = tuple(f"{srt.lower()}{k}" for k in range(1, n + 1))
        slack = tuple(f"{srt.lower()}{k}" for k in range(n + 1, n + 1 + profile.slack))
        carriers[srt] = members + slack
        alive[srt] = members
    defaults: Dict[str, object] = {}
    tables: Dict[str, dict] = {}
    for srt in sig.sorts:
        name = A.eps_name(srt)
        defaults[name] = Fraction(0)
        tables[name] = {(o,): Fraction(1) for o in alive[srt]}
    for f in sig.functions:
        if f.result == A.REAL:
            draw = lambda: _value(rng, profile)
        else:
            pool = alive[f.result]
            draw = lambda pool=pool: rng.choice(pool)
        defaults[f.name] = draw()
        if f.args and all(a != A.REAL for a in f.args):
            tbl = {}
            for args in itertools.product(*(carriers[a] for a in f.args)):
                tbl[args] = draw()
            tables[f.name] = tbl
    env = {}
    for name, srt in sig.variables:
        env[name] = _value(rng, profile) if srt == A.REAL else rng.choice(alive[srt])
    return State(carriers, tables, defaults, env)


@dataclass(frozen=True)
class Falsified:
    witness: State
    trace: Trace
    sample: int
    seed: object
    bounds: SimBounds
    states_tried: int

    verdict = "falsified"

    def to_json(self) -> dict:
        return {"schema": 1, "verdict": self.verdict, "seed": self.seed, "bounds": self.bounds.to_json(),
                "states_tried": self.states_tried, "sample": self.sample,
                "witness": self.witness.to_json(), "trace": format_trace(self.trace)}


@dataclass(frozen=True)
class NoCounterexample:
    states_tried: int
    seed: object
    bounds: SimBounds
    unknown: int = 0

    verdict = "no-counterexample-within-bounds"

    def to_json(self) -> dict:
        return {"schema": 1, "verdict": self.verdict, "seed": self.seed, "bounds": self.bounds.to_json(),
                "states_tried": self.states_tried, "unknown": self.unknown}


def falsify(prob: A.Problem, bounds: SimBounds = SimBounds(), n_states: int = 500, seed=0,
            profile: Profile = Profile(), formula: Optional[A.Formula] = None):
    """Search for a state refuting the conjecture (or ``formula``)."""
    f = formula if formula is not None else prob.conjecture
    sim = Simulator(prob.signature, bounds)
    unknown = 0
    for k in range(n_states):
        size = profile.sizes[k % len(profile.sizes)]
        st = random_state(prob.signature, profile, f"{seed}:{k}", size)
        v, trace = sim.decide_traced(f, st)
        if v is False:
            return Falsified(st, trace, k, seed, bounds, k + 1)
        if v is None:
            unknown += 1
    return NoCounterexample(n_states, seed, bounds, unknown)

"""Prover against falsifier on the shipped corpus."""

import pytest

from qdl.kernel import check_proof, prove_auto
from qdl.sim import Falsified, Profile, SimBounds, falsify

from helpers import CORPUS, load

BOUNDS = SimBounds(max_loop_unroll=3)
PROFILE = Profile(sizes=(2, 3))

VALID = sorted(f"valid/{p.name}" for p in (CORPUS / "valid").glob("*.qdl")) + ["fig6.qdl"]
INVALID = sorted(f"invalid/{p.name}" for p in (CORPUS / "invalid").glob("*.qdl"))


def prove(name):
    prob = load(name)
    tac = CORPUS / name.replace(".qdl", ".tac")
    return check_proof(prob, tac.read_text()) if tac.exists() else prove_auto(prob)


def test_corpus_sizes():
    assert len(VALID) >= 20
    assert len(INVALID) >= 10


@pytest.mark.parametrize("name", VALID)
def test_valid_closed_and_not_falsified(name):
    assert prove(name).is_closed()
    res = falsify(load(name), BOUNDS, n_states=500, profile=PROFILE)
    assert not isinstance(res, Falsified), res.to_json()


@pytest.mark.parametrize("name", INVALID)
def test_invalid_falsified_and_not_proved(name):
    res = falsify(load(name), BOUNDS, n_states=500, profile=PROFILE)
    assert isinstance(res, Falsified)
    assert not prove_auto(load(name)).is_closed()

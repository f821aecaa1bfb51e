"""Bounded executable semantics and the falsification oracle."""

from .falsify import Falsified, NoCounterexample, Profile, falsify, random_state
from .semantics import Simulator, and3, format_trace, not3, or3
from .state import SimBounds, State, make_state

__all__ = ["Falsified", "NoCounterexample", "Profile", "SimBounds", "Simulator", "State", "and3",
           "falsify", "format_trace", "make_state", "not3", "or3", "random_state"]

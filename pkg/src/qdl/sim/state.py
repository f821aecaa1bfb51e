"""Finite-support states: explicit carriers, function tables with defaults."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from ..errors import MissingBinding
from ..syntax import ast as A
from ..syntax.printer import fmt_num

Value = Union[Fraction, str]


def show(v: Value) -> str:
    return fmt_num(v) if isinstance(v, Fraction) else str(v)


def _sort_key(v):
    return (0, v, "") if isinstance(v, Fraction) else (1, Fraction(0), str(v))


def _args_key(args):
    return tuple(_sort_key(a) for a in args)


@dataclass(frozen=True)
class SimBounds:
    max_loop_unroll: int = 3
    max_branch: int = 20000
    time_grid: Tuple[Fraction, ...] = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2))
    ode_substeps: int = 4

    def __post_init__(self):
        grid = tuple(Fraction(g) for g in self.time_grid)
        if Fraction(0) not in grid or any(g < 0 for g in grid):
            raise ValueError("time grid must contain 0 and be non-negative")
        if self.ode_substeps < 1 or self.max_loop_unroll < 0 or self.max_branch < 0:
            raise ValueError("invalid simulation bounds")
        object.__setattr__(self, "time_grid", tuple(sorted(set(grid))))

    def to_json(self) -> dict:
        return {"max_loop_unroll": self.max_loop_unroll, "max_branch": self.max_branch,
                "time_grid": [fmt_num(g) for g in self.time_grid], "ode_substeps": self.ode_substeps}


class State:
    """Immutable snapshot.  Tables only store entries that differ from the default."""

    __slots__ = ("carriers", "tables", "defaults", "env", "tainted", "_key")

    def __init__(self, carriers: Mapping[str, Tuple[str, ...]], tables: Mapping[str, Mapping[tuple, Value]],
                 defaults: Mapping[str, Value], env: Mapping[str, Value] = None, tainted: bool = False):
        self.carriers = {k: tuple(v) for k, v in carriers.items()}
        self.defaults = dict(defaults)
        self.tables = {}
        for name, tbl in tables.items():
            d = self.defaults.get(name)
            kept = {tuple(k): v for k, v in tbl.items() if v != d}
            if kept:
                self.tables[name] = kept
        self.env = dict(env or {})
        self.tainted = tainted
        self._key = None

    # -------------------------------------------------------- access

    def domain(self, sort: str) -> Tuple[str, ...]:
        return self.carriers.get(sort, ())

    def lookup(self, name: str, args: tuple) -> Value:
        tbl = self.tables.get(name)
        if tbl is not None and args in tbl:
            return tbl[args]
        if name in self.defaults:
            return self.defaults[name]
        if name.startswith(A.EPS_PREFIX):
            return Fraction(0)
        raise MissingBinding(f"no value for symbol {name}")

    def var(self, name: str) -> Value:
        if name in self.env:
            return self.env[name]
        raise MissingBinding(f"unbound variable {name}")

    def created(self, sort: str) -> Tuple[str, ...]:
        return tuple(o for o in self.domain(sort) if self.lookup(A.eps_name(sort), (o,)) == 1)

    # ------------------------------------------------------ updates

    def update(self, writes: Mapping[Tuple[str, tuple], Value], tainted: bool = False) -> "State":
        if not writes and not tainted:
            return self
        tables = {k: dict(v) for k, v in self.tables.items()}
        for (name, args), val in writes.items():
            tables.setdefault(name, {})[args] = val
        return State(self.carriers, tables, self.defaults, self.env, self.tainted or tainted)

    def allocate(self, sort: str) -> Tuple["State", str]:
        """Extend the domain with a fresh pool object (all values default)."""
        taken = set(self.domain(sort))
        k = len(taken) + 1
        while f"{sort.lower()}{k}" in taken:
            k += 1
        obj = f"{sort.lower()}{k}"
        carriers = dict(self.carriers)
        carriers[sort] = self.domain(sort) + (obj,)
        return State(carriers, self.tables, self.defaults, self.env, self.tainted), obj

    # ------------------------------------------------------ identity

    def key(self):
        if self._key is None:
            self._key = (
                tuple(sorted(self.carriers.items())),
                tuple(sorted((n, tuple(sorted(t.items(), key=lambda kv: _args_key(kv[0]))))
                             for n, t in self.tables.items())),
                tuple(sorted(self.env.items())),
                self.tainted,
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, State) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    # ------------------------------------------------------ display

    def positions(self):
        for name in sorted(self.tables):
            for args, v in sorted(self.tables[name].items(), key=lambda kv: _args_key(kv[0])):
                yield name, args, v

    def diff(self, new: "State") -> str:
        parts = []
        for sort in sorted(new.carriers):
            added = [o for o in new.domain(sort) if o not in self.domain(sort)]
            if added:
                parts.append(f"new {sort} {','.join(added)}")
        names = sorted(set(self.tables) | set(new.tables))
        for name in names:
            keys = set(self.tables.get(name, {})) | set(new.tables.get(name, {}))
            for args in sorted(keys, key=_args_key):
                a = self.lookup(name, args)
                b = new.lookup(name, args)
                if a != b:
                    parts.append(f"{_pos(name, args)}={show(b)}")
        return ", ".join(parts) if parts else "(no change)"

    def to_json(self) -> dict:
        return {
            "carriers": {k: list(v) for k, v in sorted(self.carriers.items())},
            "defaults": {k: show(v) for k, v in sorted(self.defaults.items())},
            "tables": {_pos(n, a): show(v) for n, a, v in self.positions()},
            "env": {k: show(v) for k, v in sorted(self.env.items())},
            "tainted": self.tainted,
        }

    def __repr__(self):
        return f"State({self.to_json()})"


def _pos(name: str, args: tuple) -> str:
    return f"{name}({','.join(show(a) for a in args)})" if args else name


def make_state(sig: A.Signature, carriers: Mapping[str, Iterable[str]], values: Mapping = None,
               defaults: Mapping = None, env: Mapping = None, created: Optional[Mapping[str, Iterable[str]]] = None):
    """Convenience constructor used by tests and examples.

    ``values`` maps ``(name, args)`` (or ``name`` for constants) to values;
    every carrier member is created unless ``created`` says otherwise.
    """
    carriers = {s: tuple(carriers.get(s, ())) for s in sig.sorts}
    dflt = {}
    for f in sig.all_functions():
        if f.name.startswith(A.EPS_PREFIX):
            dflt[f.name] = Fraction(0)
        elif f.result == A.REAL:
            dflt[f.name] = Fraction(0)
        else:
            dom = carriers.get(f.result) or ()
            if dom:
                dflt[f.name] = dom[0]
    for k, v in (defaults or {}).items():
        dflt[k] = _val(v)
    tables: Dict[str, Dict[tuple, Value]] = {}
    for s in sig.sorts:
        alive = carriers[s] if created is None or s not in created else tuple(created[s])
        tables[A.eps_name(s)] = {(o,): Fraction(1) for o in alive}
    for k, v in (values or {}).items():
        name, args = (k, ()) if isinstance(k, str) else (k[0], tuple(k[1]))
        tables.setdefault(name, {})[args] = _val(v)
    return State(carriers, tables, dflt, {k: _val(v) for k, v in (env or {}).items()})


def _val(v):
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            return v
    return Fraction(v)

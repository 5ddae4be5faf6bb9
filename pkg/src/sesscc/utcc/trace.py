"""Traces of quiescent stores, their serialisation and observable equivalence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from ..kernel.constraints import (
    FALSE,
    Atom,
    Constraint,
    Eq,
    Neq,
    conj,
    exists,
    format_constraint,
    free_vars,
)
from ..kernel.store import Store, equivalent
from ..kernel.terms import SEPARATOR
from .derived import CONTROL


@dataclass
class Trace:
    """Per-unit outputs of a run.

    ``outputs`` are the reported constraints (local names projected away);
    ``stores`` keep the raw quiescent stores so that session names can be
    followed across units.
    """

    outputs: list[Constraint] = field(default_factory=list)
    stores: list[Store] = field(default_factory=list)
    hidden: list[frozenset[str]] = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def append(self, output: Constraint, store: Store, hidden: Iterable[str]) -> None:
        self.outputs.append(output)
        self.stores.append(store)
        self.hidden.append(frozenset(hidden))

    def __len__(self) -> int:
        return len(self.outputs)

    def __iter__(self) -> Iterator[Store]:
        return iter(self.stores)

    def entails(self, unit: int, c: Constraint) -> bool:
        """Whether the store of ``unit`` (1-based) entails ``c``."""
        return self.stores[unit - 1].entails(c)

    def records(self) -> list[dict]:
        return [_record(i + 1, s) for i, s in enumerate(self.stores)]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Trace) and self.records() == other.records()


def _record(unit: int, store: Store) -> dict:
    return {
        "unit_index": unit,
        "atoms": sorted(format_constraint(a) for a in store.facts),
        "equalities": sorted(format_constraint(Eq(a, b)) for a, b in store.equalities),
        "disequalities": sorted(format_constraint(Neq(a, b)) for a, b in store.disequalities),
        "inconsistent": store.inconsistent,
    }


def serialize(trace: Trace) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in trace.records())


def write_trace(trace: Trace, out: TextIO) -> None:
    out.write(serialize(trace))


def parse_trace(text: str) -> Trace:
    """Inverse of :func:`serialize`; ``#`` names come back as hidden variables."""
    from .syntax import parse_utcc_constraint

    trace = Trace()
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("unit_index") != len(trace) + 1:
            raise ValueError(f"trace line {n}: expected unit {len(trace) + 1}")
        store = Store()
        for key in ("atoms", "equalities", "disequalities"):
            for item in rec.get(key, []):
                store.tell(parse_utcc_constraint(item))
        if rec.get("inconsistent"):
            store.inconsistent = True
        hidden = {v for v in free_vars(store.to_constraint()) if SEPARATOR in v}
        output = store.hide(sorted(hidden)) if not store.inconsistent else FALSE
        trace.append(output, store, hidden)
    return trace


# ------------------------------------------------------ observable equivalence


def observable(store: Store) -> Constraint:
    """Store content without the derived constructs' bookkeeping atoms."""
    if store.inconsistent:
        return FALSE
    c = store.to_constraint()
    items = c.items if hasattr(c, "items") else (c,)
    kept = [i for i in items if not (isinstance(i, Atom) and i.pred == CONTROL)]
    body = conj(*kept)
    return exists(tuple(sorted(free_vars(body))), body)


def obs_equiv(t1: Trace, t2: Trace) -> bool:
    """Unit-wise entailment-equivalence modulo ``out'`` bookkeeping atoms."""
    if len(t1) != len(t2):
        raise ValueError(f"traces differ in length: {len(t1)} vs {len(t2)}")
    return all(equivalent(observable(a), observable(b)) for a, b in zip(t1.stores, t2.stores))

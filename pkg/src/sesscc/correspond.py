"""Lock-step comparison of an HVK program with its utcc encoding.

Round ``i`` of the outermost HVK semantics is compared with time unit
``i`` of the encoded process.  Each round is decoded into the atoms its
encoding is expected to post:

===========================  ======================================
HVK thread or event          expected atom
===========================  ======================================
pending ``request a(k)``     ``req(a, K)`` with ``K`` existential
pending timed request        ``req(a, K, m)``
accept matched by Link       ``acc(a, k)`` for the new session ``k``
pending ``k![e]``            ``out(k, v)`` (a tuple for n != 1 values)
pending ``k <| l``           ``sel(k, l)``
pending ``throw k![h]``      ``outk(k, h)``
fired ``kill(k)``            ``kill(k)`` from then on
active timed session ``k``   ``act(k)``
===========================  ======================================

Only threads whose timed sessions are active post anything.  The utcc
store is compared after erasing the bookkeeping atoms of the derived
constructs (``out'``, ``ack_*``) and the recursion atoms (``call_*``).
Names restricted at run time become existential variables on both sides,
so the stores are compared up to a renaming of those names: the two
existential closures must entail each other and every predicate must
have the same number of distinct atoms.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .encoder import EncodingContext, encode_program
from .hvk import ast as h
from .hvk.semantics import Round, eval_expr, load, outermost_round
from .kernel.constraints import ACK_PREFIX, Atom, Constraint, conj, exists, format_constraint
from .kernel.store import Store, equivalent
from .kernel.terms import SEPARATOR, Const, Record, Term, Tuple, Var, evaluate
from .utcc.derived import CONTROL
from .utcc.engine import Engine

ERASED_PREFIXES = (ACK_PREFIX, "call_")
ERASED = {CONTROL, "accepted"}
AND = " /\\ "


@dataclass
class UnitComparison:
    unit: int
    agree: bool
    expected: list[str]
    actual: list[str]
    fired: list[str]


@dataclass
class Report:
    units: list[UnitComparison] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return all(u.agree for u in self.units)

    @property
    def first_divergence(self) -> Optional[int]:
        return next((u.unit for u in self.units if not u.agree), None)

    def lines(self) -> list[str]:
        out = []
        for u in self.units:
            status = "agree" if u.agree else "DIVERGE"
            out.append(f"unit {u.unit}: {status}; fired {', '.join(u.fired) or 'nothing'}")
            if not u.agree:
                out.append("  expected: " + (AND.join(u.expected) or "true"))
                out.append("  actual:   " + (AND.join(u.actual) or "true"))
        verdict = "full agreement" if self.agree else f"first divergence at unit {self.first_divergence}"
        out.append(f"{verdict} over {len(self.units)} units")
        return out


def _name(name: str) -> Term:
    return Var(name) if SEPARATOR in name else Const(name)


def _value(t: Term) -> Term:
    """Restricted names inside values become variables."""
    match t:
        case Const(str() as s) if SEPARATOR in s:
            return Var(s)
        case Tuple(items):
            return Tuple(tuple(_value(i) for i in items))
    return t


def _payload(exprs) -> Term:
    values = [_value(eval_expr(e)) for e in exprs]
    return values[0] if len(values) == 1 else Tuple(tuple(values))


class _Placeholders:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"K{SEPARATOR}x{self.n}")


def expected_atoms(rnd: Round, kills: list[str]) -> list[Atom]:
    fresh = _Placeholders()
    linked = {i: f.detail[0] for f in rnd.fired if f.rule == "Link" for i in f.threads}

    def session(i: int) -> Var:
        return Var(linked[i]) if i in linked else fresh()

    atoms: list[Atom] = []
    for i, (t, ok) in enumerate(zip(rnd.before, rnd.enabled)):
        if not ok:
            continue
        match t.proc:
            case h.Request(a, _, _):
                atoms.append(Atom("req", (Const(a), session(i))))
            case h.TimedRequest(a, _, m, _):
                atoms.append(Atom("req", (Const(a), session(i), eval_expr(m))))
            case h.Send(k, es, _):
                atoms.append(Atom("out", (_name(k), _payload(es))))
            case h.Select(k, label, _):
                atoms.append(Atom("sel", (_name(k), Const(label))))
            case h.Throw(k, sent, _):
                atoms.append(Atom("outk", (_name(k), _name(sent))))
    for f in rnd.fired:
        if f.rule == "Link":
            atoms.append(Atom("acc", (Const(f.chan), Var(f.detail[0]))))
    atoms.extend(Atom("kill", (_name(k),)) for k in kills)
    atoms.extend(Atom("act", (Var(k),)) for k in sorted(rnd.active))
    return atoms


def actual_atoms(store: Store) -> list[Atom]:
    kept = []
    for a in store.facts:
        if a.pred in ERASED or a.pred.startswith(ERASED_PREFIXES):
            continue
        kept.append(Atom(a.pred, tuple(evaluate(x) for x in a.args)))
    return kept


def _closure(atoms: list[Atom]) -> Constraint:
    body = conj(*atoms)
    from .kernel.constraints import free_vars

    return exists(tuple(sorted(free_vars(body))), body)


def _shape(atoms: list[Atom]) -> Counter:
    return Counter(a.pred for a in set(atoms))


def same_state(expected: list[Atom], actual: list[Atom]) -> bool:
    if _shape(expected) != _shape(actual):
        return False
    return equivalent(_closure(expected), _closure(actual))


def correspond(p: h.HvkProcess, rounds: int, ctx: Optional[EncodingContext] = None,
               budget: Optional[int] = None) -> Report:
    """Run both semantics for ``rounds`` steps and compare them unit by unit.

    Raises :class:`~sesscc.hvk.semantics.NonDeterminismError` for programs
    whose rounds are ambiguous.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    state = load(p)
    hvk_rounds = [outermost_round(state) for _ in range(rounds)]
    trace = Engine(budget).run(encode_program(p, ctx=ctx), rounds)
    report = Report()
    kills: list[str] = []
    for rnd, store in zip(hvk_rounds, trace.stores):
        kills.extend(f.chan for f in rnd.fired if f.rule == "Kill")
        exp = expected_atoms(rnd, kills)
        act = actual_atoms(store)
        report.units.append(UnitComparison(
            rnd.index, same_state(exp, act),
            sorted({format_constraint(a) for a in exp}),
            sorted({format_constraint(a) for a in act}),
            [f.text() for f in rnd.fired]))
    return report


__all__ = ["Report", "UnitComparison", "actual_atoms", "correspond", "expected_atoms",
           "same_state", "Record"]

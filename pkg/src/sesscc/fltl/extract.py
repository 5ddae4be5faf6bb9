"""From utcc processes to temporal formulas, and a syntactic eventuality check."""

from __future__ import annotations

from ..kernel.constraints import Atom, Constraint, conjuncts, free_vars
from ..kernel.terms import Const, EvalError, evaluate
from ..utcc.derived import expand_derived
from ..utcc.process import Abs, Bang, BangN, Local, Next, Par, Process, Skip, Tell, Unless
from .formula import (
    TRUE_F,
    AlwaysF,
    AndF,
    AtomF,
    EventuallyF,
    ExistsF,
    ForallF,
    Formula,
    ImpliesF,
    NextF,
    OrF,
    and_f,
)


def extract(p: Process) -> Formula:
    """The formula describing every run of ``p``; derived forms are expanded first."""
    return _extract(expand_derived(p))


def _extract(p: Process) -> Formula:
    match p:
        case Skip():
            return TRUE_F
        case Tell(c):
            return AtomF(c)
        case Par(items):
            return AndF(tuple(_extract(q) for q in items))
        case Abs(xs, c, body, _):
            return ForallF(xs, ImpliesF(AtomF(c), _extract(body)))
        case Local(xs, c, body):
            return ExistsF(xs, AndF((AtomF(c), _extract(body))))
        case Next(body):
            return NextF(_extract(body))
        case Unless(c, body):
            return OrF((AtomF(c), NextF(_extract(body))))
        case Bang(body):
            return AlwaysF(_extract(body))
        case BangN(n, body):
            # n copies, one per unit: the conjunction of X^i F for i < n
            count = evaluate(n)
            if not (isinstance(count, Const) and count.kind == "int"):
                raise EvalError("bounded replication needs a constant count to be extracted")
            inner = _extract(body)
            items = []
            for i in range(count.value):
                f = inner
                for _ in range(i):
                    f = NextF(f)
                items.append(f)
            return and_f(*items)
    raise TypeError(f"cannot extract a formula from {p!r}")


def guarantees_eventually(f: Formula, d: Constraint) -> bool:
    """Sound but incomplete: True only if ``f`` syntactically forces ``F d``.

    ``d`` must be a conjunction of atoms; it is forced when, at some point
    reachable through conjunctions and modalities only, an atomic formula
    contains every conjunct of ``d``.
    """
    wanted = set(conjuncts(d))
    if not wanted or not all(isinstance(a, Atom) for a in wanted):
        return False
    return _forces(f, wanted, free_vars(d))


def _forces(f: Formula, wanted: set, dvars: set[str]) -> bool:
    match f:
        case AtomF(c):
            return wanted <= set(conjuncts(c))
        case AndF(items):
            return any(_forces(i, wanted, dvars) for i in items)
        case OrF(items):
            return all(_forces(i, wanted, dvars) for i in items)
        case NextF(body) | AlwaysF(body) | EventuallyF(body):
            return _forces(body, wanted, dvars)
        case ExistsF(xs, body):
            return not (set(xs) & dvars) and _forces(body, wanted, dvars)
    return False


__all__ = ["extract", "guarantees_eventually", "ForallF", "ImpliesF"]

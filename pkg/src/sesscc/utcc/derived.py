"""Expansion of persistent tell and (acknowledging) wait into core utcc."""

from __future__ import annotations

from ..kernel.constraints import Atom, Constraint, conj, free_vars, overline
from ..kernel.terms import Var, alpha_name
from .process import (
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Par,
    PTell,
    Process,
    Tell,
    Unless,
    Wait,
    WaitAck,
    fv,
    par,
    when,
)

CONTROL = "out'"


def control(name: str) -> Atom:
    """The bookkeeping atom ``out'(name)`` used by the derived constructs."""
    return Atom(CONTROL, (Var(name),))


def _pick(hint: str, avoid: set[str]) -> str:
    return hint if hint not in avoid else alpha_name(hint)


def expand_ptell(c: Constraint) -> Process:
    """Persistent tell: re-tells ``c`` every unit until someone acknowledges it."""
    avoid = free_vars(c)
    go = _pick("go", avoid)
    stop = _pick("stop", avoid | {go})
    return Local((go, stop), conj(), par(
        Tell(control(go)),
        Bang(when(control(go), Tell(c))),
        Bang(Unless(control(stop), Tell(control(go)))),
        Bang(when(overline(c), Bang(Tell(control(stop))))),
    ))


def expand_wait(binders: tuple[str, ...], guard: Constraint, body: Process) -> Process:
    """Persistent abstraction: waits unit after unit until ``guard`` matches."""
    avoid = (free_vars(guard) | fv(body)) | set(binders)
    stop = _pick("stop", avoid)
    go = _pick("go", avoid | {stop})
    return Local((stop, go), conj(), par(
        Tell(control(go)),
        Bang(Unless(control(stop), Tell(control(go)))),
        Bang(Abs(binders, conj(guard, control(go)), par(body, Bang(Tell(control(stop)))))),
    ))


def expand_waitack(binders: tuple[str, ...], guard: Constraint, body: Process) -> Process:
    return expand_wait(binders, guard, par(body, Tell(overline(guard))))


def expand_once(p: Process) -> Process:
    """Expand ``p`` if it is a derived form; otherwise return it unchanged."""
    match p:
        case PTell(c):
            return expand_ptell(c)
        case Wait(xs, c, body):
            return expand_wait(xs, c, body)
        case WaitAck(xs, c, body):
            return expand_waitack(xs, c, body)
    return p


def expand_derived(p: Process) -> Process:
    """Replace every derived form in ``p`` by its core definition."""
    p = expand_once(p)
    match p:
        case Par(items):
            return Par(tuple(expand_derived(i) for i in items))
        case Abs(xs, c, body, excl):
            return Abs(xs, c, expand_derived(body), excl)
        case Local(xs, c, body):
            return Local(xs, c, expand_derived(body))
        case Next(body):
            return Next(expand_derived(body))
        case Unless(c, body):
            return Unless(c, expand_derived(body))
        case Bang(body):
            return Bang(expand_derived(body))
        case BangN(n, body):
            return BangN(n, expand_derived(body))
    return p


def is_core(p: Process) -> bool:
    from .process import children

    if isinstance(p, (PTell, Wait, WaitAck)):
        return False
    return all(is_core(c) for c in children(p))

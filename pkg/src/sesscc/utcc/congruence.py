"""Structural congruence normal form for utcc processes."""

from __future__ import annotations

from ..kernel.constraints import conj, free_vars
from .process import (
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Par,
    Process,
    Skip,
    Unless,
    Wait,
    WaitAck,
    fv,
)


def congr_normalize(p: Process, canonical: bool = True) -> Process:
    """Normalise ``p`` modulo the structural congruence.

    Parallel compositions are flattened and lose their ``skip`` units,
    local scopes are extruded over parallel siblings that do not mention
    their binders and nested scopes with disjoint binders are merged.  With
    ``canonical`` the components of every parallel composition are sorted,
    so commuted compositions normalise identically.  The function is
    idempotent.
    """
    match p:
        case Par(items):
            return _par([congr_normalize(i, canonical) for i in items], canonical)
        case Local(xs, c, body):
            return _merge_local(Local(xs, c, congr_normalize(body, canonical)))
        case Abs(xs, c, body, excl):
            return Abs(xs, c, congr_normalize(body, canonical), excl)
        case Wait(xs, c, body):
            return Wait(xs, c, congr_normalize(body, canonical))
        case WaitAck(xs, c, body):
            return WaitAck(xs, c, congr_normalize(body, canonical))
        case Next(body):
            return Next(congr_normalize(body, canonical))
        case Unless(c, body):
            return Unless(c, congr_normalize(body, canonical))
        case Bang(body):
            return Bang(congr_normalize(body, canonical))
        case BangN(n, body):
            return BangN(n, congr_normalize(body, canonical))
    return p


def _key(p: Process) -> str:
    return repr(p)


def _flatten(items: list[Process]) -> list[Process]:
    flat: list[Process] = []
    for i in items:
        if isinstance(i, Par):
            flat.extend(_flatten(list(i.items)))
        elif not isinstance(i, Skip):
            flat.append(i)
    return flat


def _par(items: list[Process], canonical: bool) -> Process:
    flat = _flatten(items)
    if canonical:
        flat.sort(key=_key)
    scopes: list[Local] = []
    rest: list[Process] = []
    for i, q in enumerate(flat):
        if isinstance(q, Local) and _can_extrude(q, flat[:i] + flat[i + 1:], scopes):
            scopes.append(q)
        else:
            rest.append(q)
    if not scopes:
        return _wrap(flat)
    binders = tuple(x for s in scopes for x in s.binders)
    body = _par(rest + [s.body for s in scopes], canonical)
    return _merge_local(Local(binders, conj(*(s.init for s in scopes)), body))


def _can_extrude(scope: Local, siblings: list[Process], taken: list[Local]) -> bool:
    xs = set(scope.binders)
    for s in siblings:
        if xs & fv(s):
            return False
    for t in taken:
        if xs & set(t.binders) or xs & free_vars(t.init) or set(t.binders) & free_vars(scope.init):
            return False
    return True


def _merge_local(p: Local) -> Process:
    inner = p.body
    if isinstance(inner, Local):
        xs, ys = set(p.binders), set(inner.binders)
        if not xs & ys and not ys & free_vars(p.init):
            return _merge_local(Local(p.binders + inner.binders, conj(p.init, inner.init), inner.body))
    return p


def _wrap(items: list[Process]) -> Process:
    if not items:
        return Skip()
    if len(items) == 1:
        return items[0]
    return Par(tuple(items))

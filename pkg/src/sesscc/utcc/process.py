"""Abstract syntax of utcc processes.

The eight core constructs plus three derived forms (persistent tell, wait
and acknowledging wait) that are expanded into core processes on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from ..kernel.constraints import TRUE, Constraint, free_vars, subst
from ..kernel.terms import Const, Term, Var, alpha_name, subst_term, term_vars


@dataclass(frozen=True, slots=True)
class Skip:
    pass


@dataclass(frozen=True, slots=True)
class Tell:
    constraint: Constraint


@dataclass(frozen=True, slots=True)
class Abs:
    """``(abs x; c) P``; ``exclusions`` lists term tuples that already fired."""

    binders: tuple[str, ...]
    guard: Constraint
    body: "Process"
    exclusions: tuple[tuple[Term, ...], ...] = ()


@dataclass(frozen=True, slots=True)
class Par:
    items: tuple["Process", ...]


@dataclass(frozen=True, slots=True)
class Local:
    binders: tuple[str, ...]
    init: Constraint
    body: "Process"


@dataclass(frozen=True, slots=True)
class Next:
    body: "Process"


@dataclass(frozen=True, slots=True)
class Unless:
    guard: Constraint
    body: "Process"


@dataclass(frozen=True, slots=True)
class Bang:
    body: "Process"


@dataclass(frozen=True, slots=True)
class BangN:
    """Bounded replication: ``count`` copies, one per time unit.

    ``count`` is a term so it may mention a variable bound by an enclosing
    abstraction; it is evaluated when the process first executes.
    """

    count: Term
    body: "Process"


@dataclass(frozen=True, slots=True)
class PTell:
    constraint: Constraint


@dataclass(frozen=True, slots=True)
class Wait:
    binders: tuple[str, ...]
    guard: Constraint
    body: "Process"


@dataclass(frozen=True, slots=True)
class WaitAck:
    binders: tuple[str, ...]
    guard: Constraint
    body: "Process"


Process = Union[Skip, Tell, Abs, Par, Local, Next, Unless, Bang, BangN, PTell, Wait, WaitAck]

SKIP = Skip()
DERIVED = (PTell, Wait, WaitAck)
BINDING = (Abs, Local, Wait, WaitAck)


def when(guard: Constraint, body: Process) -> Abs:
    return Abs((), guard, body)


def whenever(guard: Constraint, body: Process) -> WaitAck:
    return WaitAck((), guard, body)


def par(*items: Process) -> Process:
    """Parallel composition, flattened, with ``skip`` units removed."""
    flat: list[Process] = []
    for p in items:
        if isinstance(p, Par):
            flat.extend(q for q in p.items if not isinstance(q, Skip))
        elif not isinstance(p, Skip):
            flat.append(p)
    if not flat:
        return SKIP
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(flat))


def bang_n(count, body: Process) -> BangN:
    return BangN(count if not isinstance(count, int) else Const(count), body)


# ------------------------------------------------------------------ queries


def children(p: Process) -> Iterator[Process]:
    match p:
        case Par(items):
            yield from items
        case Abs(body=b) | Local(body=b) | Next(b) | Unless(body=b) | Bang(b) | BangN(body=b) \
                | Wait(body=b) | WaitAck(body=b):
            yield b


def constraints_of(p: Process) -> Iterator[Constraint]:
    """Constraints occurring directly in ``p`` (not in sub-processes)."""
    match p:
        case Tell(c) | PTell(c):
            yield c
        case Abs(guard=c) | Unless(guard=c) | Wait(guard=c) | WaitAck(guard=c):
            yield c
        case Local(init=c):
            yield c


def fv(p: Process) -> set[str]:
    """Free variables of a process."""
    match p:
        case Skip():
            return set()
        case Tell(c) | PTell(c):
            return free_vars(c)
        case Abs(xs, c, body, excl):
            inner = free_vars(c) | fv(body)
            for row in excl:
                for t in row:
                    inner |= set(term_vars(t))
            return inner - set(xs)
        case Wait(xs, c, body) | WaitAck(xs, c, body):
            return (free_vars(c) | fv(body)) - set(xs)
        case Local(xs, c, body):
            return (free_vars(c) | fv(body)) - set(xs)
        case Unless(c, body):
            return free_vars(c) | fv(body)
        case BangN(n, body):
            return set(term_vars(n)) | fv(body)
        case Par(items):
            return set().union(*(fv(i) for i in items))
        case Next(body) | Bang(body):
            return fv(body)
    raise TypeError(f"not a process: {p!r}")


def size(p: Process) -> int:
    return 1 + sum(size(c) for c in children(p))


# ------------------------------------------------------------- substitution


def substitute(p: Process, mapping: Mapping[str, Term]) -> Process:
    """Capture-avoiding substitution of terms for free variables."""
    if not mapping:
        return p
    match p:
        case Skip():
            return p
        case Tell(c):
            return Tell(subst(c, mapping))
        case PTell(c):
            return PTell(subst(c, mapping))
        case Par(items):
            return Par(tuple(substitute(i, mapping) for i in items))
        case Next(body):
            return Next(substitute(body, mapping))
        case Bang(body):
            return Bang(substitute(body, mapping))
        case BangN(n, body):
            return BangN(subst_term(n, mapping), substitute(body, mapping))
        case Unless(c, body):
            return Unless(subst(c, mapping), substitute(body, mapping))
    binders = p.binders
    inner = {k: v for k, v in mapping.items() if k not in binders}
    if not inner:
        return p
    incoming: set[str] = set()
    for v in inner.values():
        incoming.update(term_vars(v))
    clash = [b for b in binders if b in incoming]
    if clash:
        p = rename_binders(p, {b: alpha_name(b) for b in clash})
        binders = p.binders
    match p:
        case Abs(_, c, body, excl):
            rows = tuple(tuple(subst_term(t, inner) for t in row) for row in excl)
            return Abs(binders, subst(c, inner), substitute(body, inner), rows)
        case Local(_, c, body):
            return Local(binders, subst(c, inner), substitute(body, inner))
        case Wait(_, c, body):
            return Wait(binders, subst(c, inner), substitute(body, inner))
        case WaitAck(_, c, body):
            return WaitAck(binders, subst(c, inner), substitute(body, inner))
    raise TypeError(f"not a process: {p!r}")


def rename_binders(p: Process, renaming: Mapping[str, str]) -> Process:
    """Alpha-rename the binders of a binding construct."""
    binders = tuple(renaming.get(b, b) for b in p.binders)
    as_vars = {old: Var(new) for old, new in renaming.items()}
    guard = p.init if isinstance(p, Local) else p.guard
    guard = subst(guard, as_vars)
    body = substitute(p.body, as_vars)
    match p:
        case Abs(exclusions=excl):
            return Abs(binders, guard, body, excl)
        case Local():
            return Local(binders, guard, body)
        case Wait():
            return Wait(binders, guard, body)
        case WaitAck():
            return WaitAck(binders, guard, body)
    raise TypeError(f"{type(p).__name__} binds no variables")


def local(binders, body: Process, init: Constraint = TRUE) -> Local:
    return Local(tuple(binders), init, body)

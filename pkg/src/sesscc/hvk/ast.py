"""Abstract syntax of HVK and its timed extension HVK+.

Channel and service names are plain strings.  Expressions are kernel
terms: identifiers bound by a receive, a definition parameter or a
channel binder are variables, every other identifier is a symbolic
constant.  Substitution replaces a variable by a constant both inside
expressions and, when the constant is a symbol, in channel positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from ..kernel.constraints import Constraint, free_vars, subst
from ..kernel.terms import Const, Term, Var, subst_term, term_vars


@dataclass(frozen=True, slots=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True, slots=True)
class Inact:
    pass


@dataclass(frozen=True, slots=True)
class Request:
    name: str
    chan: str
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Accept:
    name: str
    chan: str
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Send:
    chan: str
    exprs: tuple[Term, ...]
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Receive:
    chan: str
    vars: tuple[str, ...]
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Select:
    chan: str
    label: str
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Branch:
    chan: str
    branches: tuple[tuple[str, "HvkProcess"], ...]
    span: Optional[Span] = field(default=None, compare=False)

    def lookup(self, label: str) -> Optional["HvkProcess"]:
        for name, body in self.branches:
            if name == label:
                return body
        return None


@dataclass(frozen=True, slots=True)
class Throw:
    chan: str
    sent: str
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Catch:
    chan: str
    bound: str
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class If:
    cond: Term
    then: "HvkProcess"
    orelse: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Par:
    items: tuple["HvkProcess", ...]


@dataclass(frozen=True, slots=True)
class Hide:
    name: str
    body: "HvkProcess"


@dataclass(frozen=True, slots=True)
class Decl:
    """``X(x1 ... ; k1 ...) = body``: data parameters then channel parameters."""

    name: str
    params: tuple[str, ...]
    chans: tuple[str, ...]
    body: "HvkProcess"

    @property
    def arity(self) -> int:
        return len(self.params) + len(self.chans)


@dataclass(frozen=True, slots=True)
class DefIn:
    decls: tuple[Decl, ...]
    body: "HvkProcess"


@dataclass(frozen=True, slots=True)
class CallVar:
    name: str
    exprs: tuple[Term, ...]
    chans: tuple[str, ...]
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class TimedRequest:
    name: str
    chan: str
    duration: Term
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class DeclAccept:
    """``accept a(k : C) in P``; ``C`` may mention the requested duration."""

    name: str
    chan: str
    precond: Constraint
    body: "HvkProcess"
    span: Optional[Span] = field(default=None, compare=False)

    @property
    def duration_vars(self) -> tuple[str, ...]:
        return duration_names(self.chan)


@dataclass(frozen=True, slots=True)
class Kill:
    chan: str
    span: Optional[Span] = field(default=None, compare=False)


HvkProcess = Union[Inact, Request, Accept, Send, Receive, Select, Branch, Throw, Catch,
                   If, Par, Hide, DefIn, CallVar, TimedRequest, DeclAccept, Kill]

INACT = Inact()
TIMED = (TimedRequest, DeclAccept, Kill)
SESSION_ACTIONS = (Send, Receive, Select, Branch, Throw, Catch)


def duration_names(chan: str) -> tuple[str, ...]:
    """Names under which a precondition may refer to the requested duration."""
    return (f"dur_{chan}", "dur_k", "dur")


def hpar(*items: HvkProcess) -> HvkProcess:
    flat: list[HvkProcess] = []
    for p in items:
        if isinstance(p, Par):
            flat.extend(p.items)
        elif not isinstance(p, Inact):
            flat.append(p)
    if not flat:
        return INACT
    return flat[0] if len(flat) == 1 else Par(tuple(flat))


def children(p: HvkProcess) -> Iterator[HvkProcess]:
    match p:
        case Par(items):
            yield from items
        case Branch(_, branches):
            for _, b in branches:
                yield b
        case If(_, then, orelse):
            yield then
            yield orelse
        case DefIn(decls, body):
            for d in decls:
                yield d.body
            yield body
        case Inact() | CallVar() | Kill():
            return
        case _:
            yield p.body


def is_timed(p: HvkProcess) -> bool:
    return isinstance(p, TIMED) or any(is_timed(c) for c in children(p))


def subject(p: HvkProcess) -> Optional[str]:
    """The channel a session action acts on."""
    match p:
        case Send(chan=k) | Receive(chan=k) | Select(chan=k) | Branch(chan=k) \
                | Throw(chan=k) | Catch(chan=k) | Kill(chan=k):
            return k
    return None


# ------------------------------------------------------------- substitution


def _chan(name: str, mapping: Mapping[str, Term]) -> str:
    value = mapping.get(name)
    if value is None:
        return name
    if isinstance(value, Const) and value.kind == "sym":
        return value.value
    if isinstance(value, Var):
        return value.name
    raise TypeError(f"cannot use {value} as a channel")


def _drop(mapping: Mapping[str, Term], names) -> Mapping[str, Term]:
    names = set(names)
    if not names & set(mapping):
        return mapping
    return {k: v for k, v in mapping.items() if k not in names}


def substitute(p: HvkProcess, mapping: Mapping[str, Term]) -> HvkProcess:
    """Replace free variables/channels by terms (channel positions take symbols)."""
    if not mapping:
        return p
    m = mapping
    match p:
        case Inact():
            return p
        case Request(a, k, body, span):
            return Request(a, k, substitute(body, _drop(m, [k])), span)
        case Accept(a, k, body, span):
            return Accept(a, k, substitute(body, _drop(m, [k])), span)
        case TimedRequest(a, k, dur, body, span):
            return TimedRequest(a, k, subst_term(dur, m), substitute(body, _drop(m, [k])), span)
        case DeclAccept(a, k, pre, body, span):
            inner = _drop(m, [k])
            return DeclAccept(a, k, subst(pre, _drop(inner, duration_names(k))),
                              substitute(body, inner), span)
        case Send(k, es, body, span):
            return Send(_chan(k, m), tuple(subst_term(e, m) for e in es), substitute(body, m), span)
        case Receive(k, xs, body, span):
            return Receive(_chan(k, m), xs, substitute(body, _drop(m, xs)), span)
        case Select(k, label, body, span):
            return Select(_chan(k, m), label, substitute(body, m), span)
        case Branch(k, branches, span):
            return Branch(_chan(k, m), tuple((l, substitute(b, m)) for l, b in branches), span)
        case Throw(k, sent, body, span):
            return Throw(_chan(k, m), _chan(sent, m), substitute(body, m), span)
        case Catch(k, bound, body, span):
            return Catch(_chan(k, m), bound, substitute(body, _drop(m, [bound])), span)
        case If(cond, then, orelse, span):
            return If(subst_term(cond, m), substitute(then, m), substitute(orelse, m), span)
        case Par(items):
            return Par(tuple(substitute(i, m) for i in items))
        case Hide(u, body):
            return Hide(u, substitute(body, _drop(m, [u])))
        case DefIn(decls, body):
            return DefIn(decls, substitute(body, m))
        case CallVar(x, es, ks, span):
            return CallVar(x, tuple(subst_term(e, m) for e in es), tuple(_chan(k, m) for k in ks), span)
        case Kill(k, span):
            return Kill(_chan(k, m), span)
    raise TypeError(f"not an HVK process: {p!r}")


def rename_channel(p: HvkProcess, old: str, new: str) -> HvkProcess:
    """Rename a free channel/name: channel positions get ``new``, expressions a symbol."""
    return substitute(p, {old: Const(new)})


# -------------------------------------------------------------- free names


def free_names(p: HvkProcess) -> set[str]:
    """Free channel/name identifiers and free expression variables of ``p``."""
    out: set[str] = set()
    _free(p, frozenset(), out)
    return out


def _free(p: HvkProcess, bound: frozenset, out: set[str]) -> None:
    def expr(t: Term) -> None:
        out.update(v for v in term_vars(t) if v not in bound)

    def chan(k: str) -> None:
        if k not in bound:
            out.add(k)

    match p:
        case Request(a, k, body) | Accept(a, k, body):
            chan(a)
            _free(body, bound | {k}, out)
        case TimedRequest(a, k, dur, body):
            chan(a)
            expr(dur)
            _free(body, bound | {k}, out)
        case DeclAccept(a, k, pre, body):
            chan(a)
            out.update(v for v in free_vars(pre)
                       if v not in bound and v not in duration_names(k) and v != k)
            _free(body, bound | {k}, out)
        case Send(k, es, body):
            chan(k)
            for e in es:
                expr(e)
            _free(body, bound, out)
        case Receive(k, xs, body):
            chan(k)
            _free(body, bound | set(xs), out)
        case Select(k, _, body):
            chan(k)
            _free(body, bound, out)
        case Branch(k, branches):
            chan(k)
            for _, b in branches:
                _free(b, bound, out)
        case Throw(k, sent, body):
            chan(k)
            chan(sent)
            _free(body, bound, out)
        case Catch(k, k2, body):
            chan(k)
            _free(body, bound | {k2}, out)
        case If(cond, then, orelse):
            expr(cond)
            _free(then, bound, out)
            _free(orelse, bound, out)
        case Par(items):
            for i in items:
                _free(i, bound, out)
        case Hide(u, body):
            _free(body, bound | {u}, out)
        case DefIn(decls, body):
            for d in decls:
                _free(d.body, bound | set(d.params) | set(d.chans), out)
            _free(body, bound, out)
        case CallVar(_, es, ks):
            for e in es:
                expr(e)
            for k in ks:
                chan(k)
        case Kill(k):
            chan(k)

"""Compositional translation of HVK and HVK+ programs into utcc.

Session actions become constraints over a handful of predicates::

    req(a, k)  acc(a, k)  out(k, v)  sel(k, l)  outk(k, k')
    req(a, k, m)  act(k)  kill(k)      (timed programs)
    call_X(args)                        (recursion)

Senders post their constraint persistently until the receiver
acknowledges it; every continuation starts in the next time unit.  A
message carrying one value is sent as ``out(k, v)``, any other number of
values as ``out(k, (v1, ..., vn))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..kernel.constraints import TRUE, Atom, Constraint, Eq, conj, free_vars, holds, overline, subst
from ..kernel.terms import Apply, Const, Term, Tuple, Var, alpha_name
from ..hvk import ast as h
from ..utcc.process import (
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Process,
    PTell,
    Tell,
    Unless,
    WaitAck,
    par,
    when,
    whenever,
)
from .guard import guard_process

PREDICATES = ("req", "acc", "out", "sel", "outk", "act", "kill", "accepted")


class EncodingError(ValueError):
    pass


@dataclass
class EncodingContext:
    """Options and predicate names for one translation.

    ``predicates`` maps each role to the predicate emitted for it.  A role
    such as ``req.post`` (the atom a request posts) falls back to ``req``
    when it has no entry of its own, so a deliberately broken encoder can
    be built by overriding a single use.
    """

    timed: bool = False
    counting: bool = False
    predicates: Mapping[str, str] = field(default_factory=lambda: {p: p for p in PREDICATES})
    calls: dict[str, int] = field(default_factory=dict)

    def pred(self, role: str) -> str:
        if role in self.predicates:
            return self.predicates[role]
        base = role.split(".", 1)[0]
        return self.predicates.get(base, base)

    def atom(self, role: str, *args: Term) -> Atom:
        return Atom(self.pred(role), tuple(args))


def encode_program(p: h.HvkProcess, counting: bool = False,
                   ctx: Optional[EncodingContext] = None) -> Process:
    """Encode a program, choosing the timed translation when it is needed."""
    ctx = ctx or EncodingContext(timed=h.is_timed(p), counting=counting)
    return encode_timed(p, ctx) if ctx.timed else encode(p, ctx)


def encode(p: h.HvkProcess, ctx: Optional[EncodingContext] = None) -> Process:
    """Translate an untimed program."""
    ctx = ctx or EncodingContext()
    if ctx.timed:
        raise EncodingError("use encode_timed for a timed context")
    return _Encoder(ctx).top(p)


def encode_timed(p: h.HvkProcess, ctx: Optional[EncodingContext] = None) -> Process:
    """Translate an HVK+ program; session bodies are guarded by ``act(k)``."""
    ctx = ctx or EncodingContext(timed=True)
    ctx.timed = True
    return _Encoder(ctx).top(p)


def encode_recursion(decls, ctx: Optional[EncodingContext] = None) -> Process:
    """One replicated abstraction per declaration, waiting for its call atom."""
    ctx = ctx or EncodingContext()
    enc = _Encoder(ctx)
    enc.register(decls)
    return par(*(enc.declaration(d) for d in decls))


def call_predicate(name: str) -> str:
    return f"call_{name}"


def _pick(hint: str, avoid: set[str]) -> str:
    return hint if hint not in avoid else alpha_name(hint)


def _values(exprs) -> Term:
    return exprs[0] if len(exprs) == 1 else Tuple(tuple(exprs))


class _Encoder:
    def __init__(self, ctx: EncodingContext) -> None:
        self.ctx = ctx

    def register(self, decls) -> None:
        for d in decls:
            self.ctx.calls[d.name] = d.arity

    def top(self, p: h.HvkProcess) -> Process:
        if isinstance(p, h.DefIn):
            self.register(p.decls)
            return par(*(self.declaration(d) for d in p.decls), self.proc(p.body, frozenset()))
        return self.proc(p, frozenset())

    def declaration(self, d: h.Decl) -> Process:
        binders = d.params + d.chans
        args = tuple(Var(x) for x in binders)
        body = self.proc(d.body, frozenset(binders))
        return Bang(Abs(binders, Atom(call_predicate(d.name), args), body))

    # ---------------------------------------------------------------- rows

    def chan(self, k: str, bound: frozenset) -> Term:
        return Var(k) if k in bound else Const(k)

    def next(self, p: h.HvkProcess, bound: frozenset) -> Process:
        body = self.proc(p, bound)
        return Next(body)

    def proc(self, p: h.HvkProcess, bound: frozenset) -> Process:
        ctx = self.ctx
        ch = lambda k: self.chan(k, bound)  # noqa: E731
        match p:
            case h.Inact():
                return par()
            case h.Par(items):
                return par(*(self.proc(q, bound) for q in items))
            case h.Hide(u, body):
                return Local((u,), TRUE, self.proc(body, bound | {u}))
            case h.If(cond, then, orelse):
                return par(when(holds(cond, True), self.next(then, bound)),
                           when(holds(cond, False), self.next(orelse, bound)))
            case h.CallVar(x, es, ks):
                if x not in ctx.calls:
                    raise EncodingError(f"unknown process variable {x}")
                return Tell(Atom(call_predicate(x), tuple(es) + tuple(ch(k) for k in ks)))
            case h.DefIn():
                raise EncodingError("definitions may only appear at the outermost level")
            case h.Request(a, k, body):
                inner = bound | {k}
                return Local((k,), TRUE, par(
                    PTell(ctx.atom("req.post", Const(a), Var(k))),
                    whenever(ctx.atom("acc", Const(a), Var(k)), self.next(body, inner))))
            case h.Accept(a, k, body):
                inner = bound | {k}
                return WaitAck((k,), ctx.atom("req", Const(a), Var(k)),
                               par(self.accepted(a, k), self.next(body, inner)))
            case h.Send(k, es, body):
                c = ctx.atom("out", ch(k), _values(es))
                return par(PTell(c), whenever(overline(c), self.next(body, bound)))
            case h.Receive(k, xs, body):
                pattern = _values([Var(x) for x in xs])
                return WaitAck(xs, ctx.atom("out", ch(k), pattern),
                               self.next(body, bound | set(xs)))
            case h.Select(k, label, body):
                c = ctx.atom("sel", ch(k), Const(label))
                return par(PTell(c), whenever(overline(c), self.next(body, bound)))
            case h.Branch(k, branches):
                avoid = set(bound) | {k}
                lv = _pick("l", avoid)
                cases = [when(Eq(Var(lv), Const(label)), self.next(b, bound))
                         for label, b in branches]
                return WaitAck((lv,), ctx.atom("sel", ch(k), Var(lv)), par(*cases))
            case h.Throw(k, sent, body):
                c = ctx.atom("outk", ch(k), ch(sent))
                return par(PTell(c), whenever(overline(c), self.next(body, bound)))
            case h.Catch(k, k2, body):
                return WaitAck((k2,), ctx.atom("outk", ch(k), Var(k2)),
                               self.next(body, bound | {k2}))
            case h.TimedRequest() | h.DeclAccept() | h.Kill() if not ctx.timed:
                raise EncodingError(f"{type(p).__name__} needs the timed encoding")
            case h.TimedRequest(a, k, m, body):
                inner = bound | {k}
                act = ctx.atom("act", Var(k))
                renew = BangN(Apply("-", (m, Const(1))),
                              Unless(ctx.atom("kill", Var(k)), Tell(act)))
                started = Next(par(Tell(act), self.guarded(act, body, inner), renew))
                return Local((k,), TRUE, par(
                    PTell(ctx.atom("req.post", Const(a), Var(k), m)),
                    whenever(ctx.atom("acc", Const(a), Var(k)), started)))
            case h.DeclAccept(a, k, pre, body):
                inner = bound | {k}
                mv = _pick("m", set(inner) | free_vars(pre))
                pre = subst(pre, {d: Var(mv) for d in h.duration_names(k)})
                act = ctx.atom("act", Var(k))
                return WaitAck((k, mv), conj(ctx.atom("req", Const(a), Var(k), Var(mv)), pre),
                               par(self.accepted(a, k), Next(self.guarded(act, body, inner))))
            case h.Kill(k):
                return Bang(Tell(ctx.atom("kill", ch(k))))
        raise EncodingError(f"cannot encode {p!r}")

    def accepted(self, a: str, k: str) -> Process:
        told = Tell(self.ctx.atom("acc", Const(a), Var(k)))
        if self.ctx.counting:
            return par(told, Bang(Tell(self.ctx.atom("accepted", Const(a), Var(k)))))
        return told

    def guarded(self, act: Constraint, body: h.HvkProcess, bound: frozenset) -> Process:
        return guard_process(act, self.proc(body, bound), self.is_kill)

    def is_kill(self, p: Process) -> bool:
        # once issued a kill stays in force, even if it ends the killer's own session
        kill = self.ctx.pred("kill")
        return (isinstance(p, Bang) and isinstance(p.body, Tell)
                and isinstance(p.body.constraint, Atom) and p.body.constraint.pred == kill)

"""Concrete syntax for HVK and HVK+ programs.

::

    request a(k) in P          accept a(k) in P
    request a(k, m) in P       accept a(k : dur_k <= 500) in P
    k![e1, e2] P               k?(x1, x2) in P
    k <| l; P                  k |> { l1: P1 || l2: P2 }
    throw k![k'] P             catch k?((k')) in P
    if e then P else Q         P | Q        0        new u in P
    def X(x ; k) = P and Y(y) = Q in R      X[e ; k]      kill(k)

Prefixes bind tighter than ``|``; the continuation of a send, selection
or throw may be omitted (it is then ``0``).  ``//`` starts a comment.
Identifiers may end in primes but never contain ``#``, which is reserved
for names generated at run time.
"""

from __future__ import annotations

from typing import Optional

from ..kernel.constraints import Constraint
from ..kernel.terms import Const, Term, Var, format_term, term_vars
from ..syntax import BaseParser, ParseError
from .ast import (
    INACT,
    Accept,
    Branch,
    Catch,
    CallVar,
    Decl,
    DeclAccept,
    DefIn,
    Hide,
    HvkProcess,
    If,
    Inact,
    Kill,
    Par,
    Receive,
    Request,
    Select,
    Send,
    Span,
    Throw,
    TimedRequest,
    children,
    duration_names,
)

KEYWORDS = frozenset({
    "request", "accept", "in", "throw", "catch", "if", "then", "else", "new", "def",
    "and", "or", "not", "kill", "inact", "true", "false", "exists",
})


class HvkParser(BaseParser):
    keywords = KEYWORDS
    single_eq_is_test = True

    def __init__(self, source: str, allow_fresh: bool = False) -> None:
        super().__init__(source, allow_fresh)

    def resolve(self, name: str) -> Term:
        # restricted names produced at run time are constants, not variables
        return Var(name) if self.is_bound(name) else Const(name)

    def program(self) -> HvkProcess:
        p = self.process(top=True)
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")
        return p

    def span(self) -> Span:
        return Span(self.tok.line, self.tok.col)

    # ------------------------------------------------------------ processes

    def process(self, top: bool = False) -> HvkProcess:
        if self.at("def"):
            if not top:
                self.error("definitions are only allowed at the outermost level")
            return self.definitions()
        items = [self.prefix()]
        while self.accept("|"):
            items.append(self.prefix())
        return items[0] if len(items) == 1 else Par(tuple(items))

    def definitions(self) -> HvkProcess:
        self.expect("def")
        heads = []
        bodies = []
        while True:
            name = self.ident()
            self.expect("(")
            data, chans, explicit = self.parameters()
            self.expect(")")
            self.expect("=")
            self.push(data + chans)
            bodies.append(self.process())
            self.pop()
            heads.append((name, data, chans, explicit))
            if not self.accept("and"):
                break
        self.expect("in")
        body = self.process()
        decls = []
        for (name, data, chans, explicit), b in zip(heads, bodies):
            if not explicit:
                data, chans = _split_parameters(data, b)
            decls.append(Decl(name, tuple(data), tuple(chans), b))
        names = [d.name for d in decls]
        if len(set(names)) != len(names):
            self.error("process variables must be distinct within one definition")
        table = {d.name: d for d in decls}
        decls = [Decl(d.name, d.params, d.chans, _resolve_calls(d.body, table)) for d in decls]
        return DefIn(tuple(decls), _resolve_calls(body, table))

    def parameters(self) -> tuple[list[str], list[str], bool]:
        data: list[str] = []
        chans: list[str] = []
        explicit = False
        current = data
        while not self.at(")"):
            if self.accept(";"):
                if explicit:
                    self.error("only one ';' may separate parameters")
                explicit, current = True, chans
                continue
            current.append(self.ident())
            self.accept(",")
        if len(set(data + chans)) != len(data + chans):
            self.error("parameters must be pairwise distinct")
        return data, chans, explicit

    def _starts_prefix(self) -> bool:
        t = self.tok
        if t.kind == "int" and t.text == "0":
            return True
        if t.kind == "id" and t.text in ("inact", "request", "accept", "throw", "catch",
                                         "if", "new", "kill"):
            return True
        if t.kind == "id" and t.text not in self.keywords:
            return self.peek().text in ("!", "?", "<|", "|>", "[")
        return t.kind == "op" and t.text == "("

    def continuation(self) -> HvkProcess:
        return self.prefix() if self._starts_prefix() else INACT

    def body_after_in(self) -> HvkProcess:
        self.accept("in")
        return self.prefix()

    def scoped(self, names, parse):
        self.push(names)
        try:
            return parse()
        finally:
            self.pop()

    def prefix(self) -> HvkProcess:
        sp = self.span()
        t = self.tok
        if (t.kind == "int" and t.text == "0") or self.at("inact"):
            self.pos += 1
            return INACT
        if self.accept("request"):
            name = self.ident()
            self.expect("(")
            k = self.ident()
            duration = self.expr() if self.accept(",") else None
            self.expect(")")
            body = self.scoped([k], self.body_after_in)
            if duration is None:
                return Request(name, k, body, sp)
            return TimedRequest(name, k, duration, body, sp)
        if self.accept("accept"):
            name = self.ident()
            self.expect("(")
            k = self.ident()
            pre: Optional[Constraint] = None
            if self.accept(":"):
                pre = self.scoped([k, *duration_names(k)], self.constraint)
            self.expect(")")
            body = self.scoped([k], self.body_after_in)
            if pre is None:
                return Accept(name, k, body, sp)
            return DeclAccept(name, k, pre, body, sp)
        if self.accept("throw"):
            k = self.ident()
            self.expect("!")
            self.expect("[")
            sent = self.ident()
            self.expect("]")
            return Throw(k, sent, self.continuation(), sp)
        if self.accept("catch"):
            k = self.ident()
            self.expect("?")
            self.expect("(")
            self.expect("(")
            bound = self.ident()
            self.expect(")")
            self.expect(")")
            return Catch(k, bound, self.scoped([bound], self.body_after_in), sp)
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.prefix()
            orelse = self.prefix() if self.accept("else") else INACT
            return If(cond, then, orelse, sp)
        if self.accept("new"):
            names = [self.ident()]
            while not self.at("in"):
                self.accept(",")
                names.append(self.ident())
            self.expect("in")
            body = self.scoped(names, self.prefix)
            for u in reversed(names):
                body = Hide(u, body)
            return body
        if self.accept("kill"):
            self.expect("(")
            k = self.ident()
            self.expect(")")
            return Kill(k, sp)
        if self.accept("("):
            p = self.process()
            self.expect(")")
            return p
        if t.kind == "id" and t.text not in self.keywords:
            return self.action(sp)
        self.error("expected a process")

    def action(self, sp: Span) -> HvkProcess:
        k = self.ident()
        if self.accept("!"):
            self.expect("[")
            exprs = []
            while not self.at("]"):
                exprs.append(self.expr())
                if not self.accept(","):
                    break
            self.expect("]")
            return Send(k, tuple(exprs), self.continuation(), sp)
        if self.accept("?"):
            self.expect("(")
            xs = []
            while not self.at(")"):
                xs.append(self.ident())
                self.accept(",")
            self.expect(")")
            if len(set(xs)) != len(xs):
                self.error("received variables must be distinct")
            return Receive(k, tuple(xs), self.scoped(xs, self.body_after_in), sp)
        if self.accept("<|"):
            label = self.ident()
            self.accept(";")
            return Select(k, label, self.continuation(), sp)
        if self.accept("|>"):
            self.expect("{")
            branches = []
            while True:
                label = self.ident()
                self.expect(":")
                branches.append((label, self.process()))
                if not self.accept("||"):
                    break
            self.expect("}")
            labels = [l for l, _ in branches]
            if len(set(labels)) != len(labels):
                raise ParseError("branch labels must be pairwise distinct", sp.line, sp.col)
            return Branch(k, tuple(branches), sp)
        if self.accept("["):
            exprs: list[Term] = []
            chans: list[str] = []
            explicit = False
            while not self.at("]"):
                if self.accept(";"):
                    explicit = True
                    continue
                if explicit:
                    chans.append(self.ident())
                else:
                    exprs.append(self.expr())
                self.accept(",")
            self.expect("]")
            return CallVar(k, tuple(exprs), tuple(chans) if explicit else None, sp)
        self.error("expected '!', '?', '<|', '|>' or '[' after a channel")


# ------------------------------------------------------------ call fix-up


def _channel_uses(p: HvkProcess, out: set[str]) -> set[str]:
    from .ast import subject

    k = subject(p)
    if k is not None:
        out.add(k)
    if isinstance(p, Throw):
        out.add(p.sent)
    if isinstance(p, CallVar) and p.chans:
        out.update(p.chans)
    for c in children(p):
        _channel_uses(c, out)
    return out


def _split_parameters(params: list[str], body: HvkProcess) -> tuple[list[str], list[str]]:
    used = _channel_uses(body, set())
    flags = [x in used for x in params]
    first = flags.index(True) if True in flags else len(params)
    if not all(flags[first:]):
        raise ParseError(
            "channel parameters must follow data parameters (or separate them with ';')", 0, 0)
    return params[:first], params[first:]


def _as_channel(t: Term, where: CallVar) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const) and t.kind == "sym":
        return t.value
    sp = where.span or Span(0, 0)
    raise ParseError(f"call {where.name}: {format_term(t)} is not a channel", sp.line, sp.col)


def _resolve_calls(p: HvkProcess, table: dict[str, Decl]) -> HvkProcess:
    """Split every call's arguments into data and channels per its declaration."""
    from dataclasses import replace

    match p:
        case CallVar(name, exprs, chans, span):
            decl = table.get(name)
            sp = span or Span(0, 0)
            if decl is None:
                raise ParseError(f"unknown process variable {name}", sp.line, sp.col)
            given = len(exprs) + len(chans or ())
            if given != decl.arity:
                raise ParseError(f"{name} expects {decl.arity} arguments, got {given}",
                                 sp.line, sp.col)
            if chans is None:
                n = len(decl.params)
                return CallVar(name, exprs[:n], tuple(_as_channel(t, p) for t in exprs[n:]), span)
            if len(exprs) != len(decl.params):
                raise ParseError(f"{name} expects {len(decl.params)} data arguments",
                                 sp.line, sp.col)
            return p
        case Par(items):
            return Par(tuple(_resolve_calls(i, table) for i in items))
        case Branch(k, branches, span):
            return Branch(k, tuple((l, _resolve_calls(b, table)) for l, b in branches), span)
        case If(c, a, b, span):
            return If(c, _resolve_calls(a, table), _resolve_calls(b, table), span)
        case Inact() | Kill():
            return p
    return replace(p, body=_resolve_calls(p.body, table))


def parse_hvk(source: str, allow_fresh: bool = False) -> HvkProcess:
    """Parse HVK/HVK+ source text; raises :class:`ParseError` with a position."""
    p = HvkParser(source, allow_fresh).program()
    _check_calls(p)
    return p


def _check_calls(p: HvkProcess) -> None:
    if isinstance(p, CallVar) and p.chans is None:
        sp = p.span or Span(0, 0)
        raise ParseError(f"unknown process variable {p.name}", sp.line, sp.col)
    for c in children(p):
        _check_calls(c)


# ----------------------------------------------------------------- printing


def format_hvk(p: HvkProcess) -> str:
    from ..kernel.constraints import format_constraint

    match p:
        case Inact():
            return "0"
        case Request(a, k, body):
            return f"request {a}({k}) in {_atomic(body)}"
        case TimedRequest(a, k, dur, body):
            return f"request {a}({k}, {format_term(dur)}) in {_atomic(body)}"
        case Accept(a, k, body):
            return f"accept {a}({k}) in {_atomic(body)}"
        case DeclAccept(a, k, pre, body):
            return f"accept {a}({k} : {format_constraint(pre)}) in {_atomic(body)}"
        case Send(k, es, body):
            return f"{k}![{', '.join(format_term(e) for e in es)}] {_atomic(body)}"
        case Receive(k, xs, body):
            return f"{k}?({', '.join(xs)}) in {_atomic(body)}"
        case Select(k, label, body):
            return f"{k} <| {label}; {_atomic(body)}"
        case Branch(k, branches):
            inner = " || ".join(f"{l}: {format_hvk(b)}" for l, b in branches)
            return f"{k} |> {{{inner}}}"
        case Throw(k, sent, body):
            return f"throw {k}![{sent}] {_atomic(body)}"
        case Catch(k, bound, body):
            return f"catch {k}?(({bound})) in {_atomic(body)}"
        case If(cond, then, orelse):
            return f"if {format_term(cond)} then {_atomic(then)} else {_atomic(orelse)}"
        case Par(items):
            return " | ".join(_atomic(i) for i in items)
        case Hide(u, body):
            return f"new {u} in {_atomic(body)}"
        case DefIn(decls, body):
            parts = []
            for d in decls:
                params = " ".join(d.params) + " ; " + " ".join(d.chans)
                parts.append(f"{d.name}({params.strip()}) = {format_hvk(d.body)}")
            return "def " + " and ".join(parts) + f" in {format_hvk(body)}"
        case CallVar(x, es, ks):
            args = ", ".join(format_term(e) for e in es)
            return f"{x}[{args} ; {', '.join(ks or ())}]".replace("[ ;", "[;")
        case Kill(k):
            return f"kill({k})"
    raise ValueError(f"cannot format {p!r}")


def _atomic(p: HvkProcess) -> str:
    text = format_hvk(p)
    return f"({text})" if isinstance(p, (Par, DefIn)) else text


__all__ = ["HvkParser", "ParseError", "format_hvk", "parse_hvk", "term_vars"]

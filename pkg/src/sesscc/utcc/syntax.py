"""Concrete syntax of utcc processes.

::

    skip | tell(c) | ptell(c) | P || Q | next P | unless c next P
    (abs x y; c) P | when c do P | (local x y; c) P | (local x) P
    ! P | !{n} P | wait x; c do P | waitack x; c do P | whenever c do P

Prefixes bind tighter than ``||``.  Identifiers bound by ``abs``,
``local``, ``wait`` or ``exists`` are variables; any other identifier in
term position is a symbolic constant.  An abstraction that has already
fired carries its exclusions: ``(abs x; c except (5), (7)) P``.
"""

from __future__ import annotations

from ..kernel.constraints import Constraint, format_constraint
from ..kernel.terms import Const, Term, format_term
from ..syntax import BaseParser, ParseError
from .process import (
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Par,
    Process,
    PTell,
    Skip,
    Tell,
    Unless,
    Wait,
    WaitAck,
)

KEYWORDS = frozenset({
    "skip", "tell", "ptell", "when", "whenever", "wait", "waitack", "do", "abs",
    "local", "next", "unless", "except", "exists", "not", "and", "or",
})


class UtccParser(BaseParser):
    keywords = KEYWORDS

    def __init__(self, source: str) -> None:
        super().__init__(source, allow_fresh=True)

    def program(self) -> Process:
        p = self.process()
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")
        return p

    def process(self) -> Process:
        items = [self.prefix()]
        while self.accept("||"):
            items.append(self.prefix())
        return items[0] if len(items) == 1 else Par(tuple(items))

    def binders(self, stop: str) -> tuple[str, ...]:
        names: list[str] = []
        while not self.at(stop):
            names.append(self.ident())
            self.accept(",")
        if len(set(names)) != len(names):
            self.error("binders must be pairwise distinct")
        return tuple(names)

    def scoped(self, names, parse):
        self.push(names)
        try:
            return parse()
        finally:
            self.pop()

    def prefix(self) -> Process:
        if self.accept("skip"):
            return Skip()
        if self.accept("tell"):
            return Tell(self._paren_constraint())
        if self.accept("ptell"):
            return PTell(self._paren_constraint())
        if self.accept("next"):
            return Next(self.prefix())
        if self.accept("unless"):
            c = self.constraint()
            self.expect("next")
            return Unless(c, self.prefix())
        if self.accept("when"):
            c = self.constraint()
            self.expect("do")
            return Abs((), c, self.prefix())
        if self.accept("whenever"):
            c = self.constraint()
            self.expect("do")
            return WaitAck((), c, self.prefix())
        if self.at("wait") or self.at("waitack"):
            kind = Wait if self.tok.text == "wait" else WaitAck
            self.pos += 1
            xs = self.binders(";")
            self.expect(";")
            c = self.scoped(xs, self.constraint)
            self.expect("do")
            return kind(xs, c, self.scoped(xs, self.prefix))
        if self.accept("!"):
            if self.accept("{"):
                n = self.arith()
                self.expect("}")
                return BangN(n, self.prefix())
            return Bang(self.prefix())
        if self.at("(") and self.peek().text == "abs":
            self.pos += 2
            xs = self.binders(";")
            self.expect(";")
            c = self.scoped(xs, self.constraint)
            rows: list[tuple[Term, ...]] = []
            if self.accept("except"):
                rows.append(self._row(len(xs)))
                while self.accept(","):
                    rows.append(self._row(len(xs)))
            self.expect(")")
            return Abs(xs, c, self.scoped(xs, self.prefix), tuple(rows))
        if self.at("(") and self.peek().text == "local":
            self.pos += 2
            xs = self.binders(";") if not self._local_closes() else self.binders(")")
            init = None
            if self.accept(";"):
                init = self.scoped(xs, self.constraint)
            self.expect(")")
            from ..kernel.constraints import TRUE

            return Local(xs, init if init is not None else TRUE, self.scoped(xs, self.prefix))
        if self.accept("("):
            p = self.process()
            self.expect(")")
            return p
        self.error("expected a process")

    def _local_closes(self) -> bool:
        i = self.pos
        while self.tokens[i].kind == "id" or self.tokens[i].text == ",":
            i += 1
        return self.tokens[i].text == ")"

    def _row(self, width: int) -> tuple[Term, ...]:
        self.expect("(")
        items = []
        while not self.at(")"):
            items.append(self.arith())
            if not self.accept(","):
                break
        self.expect(")")
        if len(items) != width:
            self.error(f"exclusion needs {width} terms")
        return tuple(items)

    def _paren_constraint(self) -> Constraint:
        self.expect("(")
        c = self.constraint()
        self.expect(")")
        return c


def parse_utcc(source: str) -> Process:
    """Parse utcc concrete syntax into a process."""
    return UtccParser(source).program()


def parse_utcc_constraint(source: str) -> Constraint:
    p = UtccParser(source)
    c = p.constraint()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return c


# ----------------------------------------------------------------- printing


def format_process(p: Process) -> str:
    match p:
        case Skip():
            return "skip"
        case Tell(c):
            return f"tell({format_constraint(c)})"
        case PTell(c):
            return f"ptell({format_constraint(c)})"
        case Par(items):
            return " || ".join(_atomic(i) for i in items)
        case Next(body):
            return f"next {_atomic(body)}"
        case Unless(c, body):
            return f"unless {format_constraint(c)} next {_atomic(body)}"
        case Bang(body):
            return f"!{_atomic(body)}"
        case BangN(n, body):
            return f"!{{{format_term(n)}}} {_atomic(body)}"
        case Abs((), c, body, ()):
            return f"when {format_constraint(c)} do {_atomic(body)}"
        case Abs(xs, c, body, rows):
            head = f"abs {' '.join(xs)}; {format_constraint(c)}"
            if rows:
                head += " except " + ", ".join(
                    "(" + ", ".join(format_term(t) for t in row) + ")" for row in rows)
            return f"({head}) {_atomic(body)}"
        case Local(xs, c, body):
            from ..kernel.constraints import CTrue

            init = "" if isinstance(c, CTrue) else f"; {format_constraint(c)}"
            return f"(local {' '.join(xs)}{init}) {_atomic(body)}"
        case WaitAck((), c, body):
            return f"whenever {format_constraint(c)} do {_atomic(body)}"
        case Wait(xs, c, body):
            return f"wait {' '.join(xs)}; {format_constraint(c)} do {_atomic(body)}"
        case WaitAck(xs, c, body):
            return f"waitack {' '.join(xs)}; {format_constraint(c)} do {_atomic(body)}"
    raise ValueError(f"cannot format {p!r}")


def _atomic(p: Process) -> str:
    text = format_process(p)
    return f"({text})" if isinstance(p, Par) else text


__all__ = ["ParseError", "format_process", "parse_utcc", "parse_utcc_constraint", "Const"]

"""Lexer and expression/constraint grammar shared by the HVK and utcc parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

from .kernel.constraints import (
    FALSE,
    TRUE,
    Atom,
    Constraint,
    Eq,
    Neq,
    conj,
    holds,
)
from .kernel.terms import SEPARATOR, Apply, Const, Record, Term, Tuple, Var


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "id", "int", "op", "eof"
    text: str
    line: int
    col: int


_UNICODE = {"◁": "<|", "▷": "|>", "∥": "||", "∧": "/\\", "≤": "<=", "≥": ">=", "≠": "!="}
_OPS = ["/\\", "||", "|>", "<|", "!=", "==", "<=", ">=", "->",
        "|", "!", "?", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".",
        "+", "-", "*", "=", "<", ">"]
_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_']*(#a?[0-9]+)?")
_INT = re.compile(r"[0-9]+")


def tokenize(source: str, allow_fresh: bool) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch in _UNICODE:
            tokens.append(Token("op", _UNICODE[ch], line, col))
            col, i = col + 1, i + 1
            continue
        m = _ID.match(source, i)
        if m:
            text = m.group(0)
            if SEPARATOR in text and not allow_fresh:
                raise ParseError(f"identifier {text!r} uses the reserved separator "
                                 f"{SEPARATOR!r}", line, col)
            if i + len(text) < n and source[i + len(text)] == SEPARATOR:
                raise ParseError(f"identifier {text}{SEPARATOR}... uses the reserved "
                                 f"separator {SEPARATOR!r}", line, col)
            tokens.append(Token("id", text, line, col))
            col, i = col + len(text), i + len(text)
            continue
        m = _INT.match(source, i)
        if m:
            tokens.append(Token("int", m.group(0), line, col))
            col, i = col + len(m.group(0)), i + len(m.group(0))
            continue
        for op in _OPS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, line, col))
                col, i = col + len(op), i + len(op)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


_CMP = {"==", "!=", "<", "<=", ">", ">="}


class BaseParser:
    """Recursive-descent helpers plus the expression and constraint grammars.

    Subclasses decide how a bare identifier in term position resolves
    (variable or symbolic constant) by overriding :meth:`resolve`.
    """

    keywords: frozenset[str] = frozenset()
    # HVK writes equality tests with a single '='
    single_eq_is_test = False

    def __init__(self, source: str, allow_fresh: bool) -> None:
        self.tokens = tokenize(source, allow_fresh)
        self.pos = 0
        self.scopes: list[set[str]] = [set()]

    # ------------------------------------------------------------ plumbing

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.pos += 1
        return t

    def error(self, message: str):
        t = self.tok
        found = t.text or "end of input"
        raise ParseError(f"{message}, found {found!r}", t.line, t.col)

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id" or t.text in self.keywords:
            self.error("expected an identifier")
        self.pos += 1
        return t.text

    def is_bound(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def resolve(self, name: str) -> Term:
        if SEPARATOR in name or self.is_bound(name):
            return Var(name)
        return Const(name)

    def push(self, names) -> None:
        self.scopes.append(set(names))

    def pop(self) -> None:
        self.scopes.pop()

    # --------------------------------------------------------- expressions

    def expr(self) -> Term:
        left = self._and()
        while self.accept("or"):
            left = Apply("or", (left, self._and()))
        return left

    def _and(self) -> Term:
        left = self._not()
        while self.accept("and"):
            left = Apply("and", (left, self._not()))
        return left

    def _not(self) -> Term:
        if self.accept("not"):
            return Apply("not", (self._not(),))
        return self._cmp()

    def _cmp(self) -> Term:
        left = self.arith()
        t = self.tok
        if t.kind == "op" and (t.text in _CMP or (t.text == "=" and self.single_eq_is_test)):
            self.pos += 1
            op = "==" if t.text == "=" else t.text
            return Apply(op, (left, self.arith()))
        return left

    def arith(self) -> Term:
        left = self._mul()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.pos += 1
            left = Apply(op, (left, self._mul()))
        return left

    def _mul(self) -> Term:
        left = self._unary()
        while self.accept("*"):
            left = Apply("*", (left, self._unary()))
        return left

    def _unary(self) -> Term:
        if self.accept("-"):
            inner = self._unary()
            if isinstance(inner, Const) and inner.kind == "int":
                return Const(-inner.value)
            return Apply("neg", (inner,))
        return self._postfix()

    def _postfix(self) -> Term:
        t = self.primary()
        while self.at(".") and self.peek().kind == "id":
            self.pos += 1
            t = Apply(".", (t, Const(self.ident())))
        return t

    def primary(self) -> Term:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return Const(int(t.text))
        if t.kind == "id" and t.text in ("true", "false"):
            self.pos += 1
            return Const(t.text == "true")
        if t.kind == "id" and t.text not in self.keywords:
            self.pos += 1
            return self.resolve(t.text)
        if self.accept("("):
            if self.accept(")"):
                return Tuple(())
            first = self.expr()
            if self.accept(")"):
                return first
            items = [first]
            while self.accept(","):
                if self.at(")"):
                    break
                items.append(self.expr())
            self.expect(")")
            return Tuple(tuple(items))
        if self.accept("{"):
            args: list[Term] = []
            while not self.at("}"):
                args.append(Const(self.ident()))
                self.expect("=")
                args.append(self.expr())
                if not self.accept(","):
                    break
            self.expect("}")
            values = args[1::2]
            if all(isinstance(v, Const) for v in values):
                names = [a.value for a in args[0::2]]
                return Const(Record.of(dict(zip(names, values))))
            return Apply("record", tuple(args))
        self.error("expected an expression")

    # --------------------------------------------------------- constraints

    def constraint(self) -> Constraint:
        items = [self._conjunct()]
        while self.accept("/\\"):
            items.append(self._conjunct())
        return conj(*items) if len(items) > 1 else items[0]

    def _conjunct(self) -> Constraint:
        from .kernel.constraints import exists

        if self.at("exists"):
            self.pos += 1
            bound = []
            while not self.at("."):
                bound.append(self.ident())
            self.expect(".")
            self.push(bound)
            body = self.constraint()
            self.pop()
            from .kernel.constraints import Exists

            return Exists(tuple(bound), body) if bound else body
        if self.at("true") or self.at("false"):
            nxt = self.peek()
            if not (nxt.kind == "op" and (nxt.text in _CMP or nxt.text == "=")):
                self.pos += 1
                return TRUE if self.tokens[self.pos - 1].text == "true" else FALSE
        if self.at("("):
            mark = self.pos
            try:
                self.pos += 1
                inner = self.constraint()
                self.expect(")")
                if not (self.tok.kind == "op" and self.tok.text in _CMP | {"=", ".", "+", "-", "*"}):
                    return inner
            except ParseError:
                pass
            self.pos = mark
        t = self.tok
        if (t.kind == "id" and t.text not in self.keywords and self.peek().text == "("
                and self.peek().kind == "op" and not self.is_bound(t.text)):
            pred = self.ident()
            self.expect("(")
            args = []
            while not self.at(")"):
                args.append(self.arith())
                if not self.accept(","):
                    break
            self.expect(")")
            return Atom(pred, tuple(args))
        if (t.kind == "id" and t.text not in self.keywords and not self.is_bound(t.text)
                and SEPARATOR not in t.text and not self._followed_by_operator()):
            self.pos += 1
            return Atom(t.text, ())
        left = self.arith()
        op = self.tok
        if op.kind == "op" and op.text == "=":
            self.pos += 1
            return Eq(left, self.arith())
        if op.kind == "op" and op.text == "!=":
            self.pos += 1
            return Neq(left, self.arith())
        if op.kind == "op" and op.text in _CMP:
            self.pos += 1
            return holds(Apply(op.text, (left, self.arith())))
        self.error("expected a constraint")


    def _followed_by_operator(self) -> bool:
        nxt = self.peek()
        return nxt.kind == "op" and nxt.text in _CMP | {"=", ".", "+", "-", "*"}


class ConstraintParser(BaseParser):
    keywords = frozenset({"exists", "not", "and", "or"})

    def __init__(self, source: str, variables=()) -> None:
        super().__init__(source, allow_fresh=True)
        self.push(variables)


def parse_constraint(source: str, variables=()) -> Constraint:
    """Parse constraint text; ``variables`` (and ``#`` names) become variables."""
    p = ConstraintParser(source, variables)
    c = p.constraint()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return c


def parse_term(source: str, variables=()) -> Term:
    p = ConstraintParser(source, variables)
    t = p.arith()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


def resolve_with(fn: Callable[[str], Optional[Term]]):
    """Small helper for callers that need a custom identifier resolver."""
    return fn

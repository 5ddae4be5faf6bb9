"""Terms of the constraint language.

A term is a variable, a constant (integer, boolean, symbol or record), a
tuple of terms, or an application of one of a fixed set of interpreted
operators.  Applications stand for HVK expressions that have not been
evaluated yet; they collapse to constants as soon as their arguments are
ground (see :func:`evaluate`).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

SEPARATOR = "#"


class EvalError(Exception):
    """Raised when a ground expression cannot be evaluated."""


@dataclass(frozen=True, slots=True)
class Record:
    """Constant record: a tuple of named fields, kept sorted by name."""

    fields: tuple[tuple[str, "Const"], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, "Const"]) -> "Record":
        return cls(tuple(sorted(mapping.items())))

    def get(self, name: str) -> "Const":
        for key, value in self.fields:
            if key == name:
                return value
        raise EvalError(f"record has no field {name!r}")


def _kind(value) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, str):
        return "sym"
    if isinstance(value, Record):
        return "rec"
    raise TypeError(f"unsupported constant {value!r}")


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: Union[int, bool, str, Record]
    # keeps Const(True) and Const(1) apart; Python considers True == 1
    kind: str = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _kind(self.value))

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Tuple:
    items: tuple["Term", ...]

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Apply:
    """Interpreted operator applied to argument terms."""

    op: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Const, Tuple, Apply]

TRUE_C = Const(True)
FALSE_C = Const(False)

ARITH = {"+", "-", "*"}
ORDER = {"<", "<=", ">", ">="}
EQUALITY = {"==", "!="}
BOOLEAN = {"and", "or"}
COMPARISONS = ORDER | EQUALITY
BINARY = ARITH | COMPARISONS | BOOLEAN


def sym(name: str) -> Const:
    return Const(name)


def record(**fields) -> Const:
    return Const(Record.of({k: as_term(v) for k, v in fields.items()}))


def as_term(value) -> Term:
    """Coerce a Python value (or term) into a term."""
    if isinstance(value, (Var, Const, Tuple, Apply)):
        return value
    if isinstance(value, tuple):
        return Tuple(tuple(as_term(v) for v in value))
    return Const(value)


# ---------------------------------------------------------------- traversal


def term_vars(t: Term) -> Iterator[str]:
    match t:
        case Var(name):
            yield name
        case Tuple(items) | Apply(_, items):
            for item in items:
                yield from term_vars(item)


def term_consts(t: Term) -> Iterator[Const]:
    match t:
        case Const():
            yield t
        case Tuple(items) | Apply(_, items):
            for item in items:
                yield from term_consts(item)


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over ``t`` and its tuple components."""
    yield t
    if isinstance(t, Tuple):
        for item in t.items:
            yield from subterms(item)


def subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    match t:
        case Var(name):
            return mapping.get(name, t)
        case Tuple(items):
            return Tuple(tuple(subst_term(i, mapping) for i in items))
        case Apply(op, args):
            return Apply(op, tuple(subst_term(a, mapping) for a in args))
    return t


def is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


# --------------------------------------------------------------- evaluation


def _int(c: Const, op: str) -> int:
    if c.kind != "int":
        raise EvalError(f"operator {op!r} expects integers, got {format_term(c)}")
    return c.value


def _bool(c: Const, op: str) -> bool:
    if c.kind != "bool":
        raise EvalError(f"operator {op!r} expects booleans, got {format_term(c)}")
    return c.value


def apply_op(op: str, args: list[Const]) -> Const:
    """Evaluate an operator over constant arguments."""
    if op in ARITH:
        a, b = (_int(x, op) for x in args)
        return Const({"+": a + b, "-": a - b, "*": a * b}[op])
    if op == "neg":
        return Const(-_int(args[0], op))
    if op in ORDER:
        a, b = (_int(x, op) for x in args)
        return Const({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op])
    if op in EQUALITY:
        a, b = args
        if {a.kind, b.kind} == {"int", "bool"}:
            raise EvalError(f"cannot compare {format_term(a)} with {format_term(b)}")
        return Const((a == b) == (op == "=="))
    if op in BOOLEAN:
        a, b = (_bool(x, op) for x in args)
        return Const(a and b if op == "and" else a or b)
    if op == "not":
        return Const(not _bool(args[0], op))
    if op == ".":
        target, name = args
        if target.kind != "rec":
            raise EvalError(f"field access .{name.value} on non-record {format_term(target)}")
        return target.value.get(name.value)
    if op == "record":
        names = [a.value for a in args[0::2]]
        return Const(Record.of(dict(zip(names, args[1::2]))))
    raise EvalError(f"unknown operator {op!r}")


def evaluate(t: Term, lookup: Optional[Callable[[Var], Optional[Term]]] = None) -> Term:
    """Normalise ``t``: ground applications collapse to constants.

    ``lookup`` may resolve variables (for instance to the constant a store
    has equated them with).  Non-ground applications are returned with
    their arguments normalised.
    """
    match t:
        case Var():
            if lookup is not None:
                found = lookup(t)
                if found is not None:
                    return found
            return t
        case Tuple(items):
            return Tuple(tuple(evaluate(i, lookup) for i in items))
        case Apply(op, args):
            done = [evaluate(a, lookup) for a in args]
            if all(isinstance(a, Const) for a in done):
                return apply_op(op, done)
            return Apply(op, tuple(done))
    return t


# --------------------------------------------------------------- printing


def format_const(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Record):
        inner = ", ".join(f"{k} = {format_term(v)}" for k, v in value.fields)
        return "{" + inner + "}"
    return str(value)


def format_term(t: Term) -> str:
    match t:
        case Var(name):
            return name
        case Const(value):
            return format_const(value)
        case Tuple(items):
            if len(items) == 1:
                return f"({format_term(items[0])},)"
            return "(" + ", ".join(format_term(i) for i in items) + ")"
        case Apply(".", (target, Const(name))):
            return f"{format_term(target)}.{name}"
        case Apply("record", args):
            pairs = zip(args[0::2], args[1::2])
            return "{" + ", ".join(f"{n.value} = {format_term(v)}" for n, v in pairs) + "}"
        case Apply("neg", (a,)):
            return f"(-{format_term(a)})"
        case Apply("not", (a,)):
            return f"(not {format_term(a)})"
        case Apply(op, (a, b)):
            return f"({format_term(a)} {op} {format_term(b)})"
    raise ValueError(f"cannot format {t!r}")


# ---------------------------------------------------------- fresh variables


class FreshNames:
    """Supply of identifiers of the form ``hint#n``.

    Source identifiers can never contain ``#`` (the parsers reject it), so
    a freshened name cannot clash with a program name.  Names already in
    use can be reserved so a supply seeded from an existing process never
    reissues them.
    """

    def __init__(self, reserved: Iterable[str] = ()) -> None:
        self._counts: Counter[str] = Counter()
        self._used: set[str] = set(reserved)

    def reserve(self, names: Iterable[str]) -> None:
        self._used.update(names)

    def __call__(self, hint: str) -> str:
        base = hint.split(SEPARATOR, 1)[0] or "v"
        while True:
            self._counts[base] += 1
            name = f"{base}{SEPARATOR}{self._counts[base]}"
            if name not in self._used:
                self._used.add(name)
                return name

    fresh = __call__


_alpha_counter = itertools.count(1)


def alpha_name(hint: str) -> str:
    """Globally unique name used for alpha-renaming binders.

    Uses a ``#a<n>`` suffix so it never collides with :class:`FreshNames`
    output (``#<n>``).
    """
    base = hint.split(SEPARATOR, 1)[0] or "v"
    return f"{base}{SEPARATOR}a{next(_alpha_counter)}"

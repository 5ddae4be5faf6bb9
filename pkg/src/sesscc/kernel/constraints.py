"""Constraints: conjunctions of atoms, (dis)equalities and existentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .terms import (
    COMPARISONS,
    TRUE_C,
    Apply,
    Const,
    Term,
    alpha_name,
    format_term,
    subst_term,
    term_consts,
    term_vars,
)


class MalformedConstraint(ValueError):
    """Arity clash or an ill-typed ground expression inside a constraint."""


@dataclass(frozen=True, slots=True)
class CTrue:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True, slots=True)
class CFalse:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return format_constraint(self)


@dataclass(frozen=True, slots=True)
class Eq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return format_constraint(self)


@dataclass(frozen=True, slots=True)
class Neq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return format_constraint(self)


@dataclass(frozen=True, slots=True)
class And:
    items: tuple["Constraint", ...]

    def __str__(self) -> str:
        return format_constraint(self)


@dataclass(frozen=True, slots=True)
class Exists:
    bound: tuple[str, ...]
    body: "Constraint"

    def __str__(self) -> str:
        return format_constraint(self)


Constraint = Union[CTrue, CFalse, Atom, Eq, Neq, And, Exists]

TRUE = CTrue()
FALSE = CFalse()


def atom(pred: str, *args) -> Atom:
    from .terms import as_term

    return Atom(pred, tuple(as_term(a) for a in args))


def holds(expr: Term, value: bool = True) -> Eq:
    """Constraint stating that a boolean expression evaluates to ``value``."""
    return Eq(expr, Const(value))


# ----------------------------------------------------------------- queries


def free_vars(c: Constraint) -> set[str]:
    return set(_free(c))


def _free(c: Constraint) -> Iterator[str]:
    match c:
        case Atom(_, args):
            for a in args:
                yield from term_vars(a)
        case Eq(l, r) | Neq(l, r):
            yield from term_vars(l)
            yield from term_vars(r)
        case And(items):
            for i in items:
                yield from _free(i)
        case Exists(bound, body):
            yield from (v for v in _free(body) if v not in bound)


def constants(c: Constraint) -> list[Const]:
    out: list[Const] = []
    _consts(c, out)
    return list(dict.fromkeys(out))


def _consts(c: Constraint, out: list[Const]) -> None:
    match c:
        case Atom(_, args):
            for a in args:
                out.extend(term_consts(a))
        case Eq(l, r) | Neq(l, r):
            out.extend(term_consts(l))
            out.extend(term_consts(r))
        case And(items):
            for i in items:
                _consts(i, out)
        case Exists(_, body):
            _consts(body, out)


def conjuncts(c: Constraint) -> list[Constraint]:
    if isinstance(c, And):
        return list(c.items)
    if isinstance(c, CTrue):
        return []
    return [c]


def atoms_of(c: Constraint) -> Iterator[Atom]:
    match c:
        case Atom():
            yield c
        case And(items):
            for i in items:
                yield from atoms_of(i)
        case Exists(_, body):
            yield from atoms_of(body)


# ------------------------------------------------------------ construction


def conj(*items: Constraint) -> Constraint:
    """Flattened conjunction; True units dropped, False absorbs.

    Existential binders colliding with a sibling's free variables (or with
    each other) are alpha-renamed.
    """
    flat: list[Constraint] = []
    for item in items:
        if isinstance(item, And):
            flat.extend(item.items)
        elif isinstance(item, CFalse):
            return FALSE
        elif not isinstance(item, CTrue):
            flat.append(item)
    flat = list(dict.fromkeys(flat))
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    if any(isinstance(i, Exists) for i in flat):
        flat = _separate_binders(flat)
    return And(tuple(flat))


def _separate_binders(items: list[Constraint]) -> list[Constraint]:
    taken: set[str] = set()
    for i in items:
        if not isinstance(i, Exists):
            taken |= free_vars(i)
    for i in items:
        if isinstance(i, Exists):
            taken |= free_vars(i)
    out = []
    for i in items:
        if isinstance(i, Exists):
            renaming = {}
            for b in i.bound:
                if b in taken:
                    renaming[b] = alpha_name(b)
                taken.add(renaming.get(b, b))
            if renaming:
                i = Exists(
                    tuple(renaming.get(b, b) for b in i.bound),
                    subst(i.body, {o: _var(n) for o, n in renaming.items()}),
                )
        out.append(i)
    return out


def _var(name: str):
    from .terms import Var

    return Var(name)


def exists(bound, body: Constraint) -> Constraint:
    bound = tuple(dict.fromkeys(b for b in bound if b in free_vars(body)))
    if not bound or isinstance(body, (CTrue, CFalse)):
        return body
    if isinstance(body, Exists):
        return Exists(bound + tuple(b for b in body.bound if b not in bound), body.body)
    return Exists(bound, body)


# ------------------------------------------------------------ substitution


def subst(c: Constraint, mapping: Mapping[str, Term]) -> Constraint:
    """Capture-avoiding substitution of terms for variables."""
    if not mapping:
        return c
    match c:
        case Atom(p, args):
            return Atom(p, tuple(subst_term(a, mapping) for a in args))
        case Eq(l, r):
            return Eq(subst_term(l, mapping), subst_term(r, mapping))
        case Neq(l, r):
            return Neq(subst_term(l, mapping), subst_term(r, mapping))
        case And(items):
            return And(tuple(subst(i, mapping) for i in items))
        case Exists(bound, body):
            inner = {k: v for k, v in mapping.items() if k not in bound}
            incoming = set()
            for v in inner.values():
                incoming.update(term_vars(v))
            renaming = {b: alpha_name(b) for b in bound if b in incoming}
            if renaming:
                body = subst(body, {o: _var(n) for o, n in renaming.items()})
                bound = tuple(renaming.get(b, b) for b in bound)
            return Exists(bound, subst(body, inner))
    return c


def map_terms(c: Constraint, fn) -> Constraint:
    match c:
        case Atom(p, args):
            return Atom(p, tuple(fn(a) for a in args))
        case Eq(l, r):
            return Eq(fn(l), fn(r))
        case Neq(l, r):
            return Neq(fn(l), fn(r))
        case And(items):
            return And(tuple(map_terms(i, fn) for i in items))
        case Exists(bound, body):
            return Exists(bound, map_terms(body, fn))
    return c


def rename_preds(c: Constraint, fn) -> Constraint:
    match c:
        case Atom(p, args):
            return Atom(fn(p), args)
        case And(items):
            return And(tuple(rename_preds(i, fn) for i in items))
        case Exists(bound, body):
            return Exists(bound, rename_preds(body, fn))
    return c


ACK_PREFIX = "ack_"


def overline(c: Constraint) -> Constraint:
    """Acknowledgement co-constraint: every atom ``p`` becomes ``ack_p``.

    Expression tests carry no information worth acknowledging and are dropped.
    """
    if isinstance(c, And):
        return conj(*(overline(i) for i in c.items if not is_test(i)))
    return TRUE if is_test(c) else rename_preds(c, lambda p: ACK_PREFIX + p)


# ---------------------------------------------------------------- printing


def format_constraint(c: Constraint) -> str:
    match c:
        case CTrue():
            return "true"
        case CFalse():
            return "false"
        case Atom(p, ()):
            return p
        case Atom(p, args):
            return f"{p}(" + ", ".join(format_term(a) for a in args) + ")"
        case Eq(Apply(op, (a, b)), Const(True)) if op in COMPARISONS:
            return f"{format_term(a)} {op} {format_term(b)}"
        case Eq(l, r):
            return f"{format_term(l)} = {format_term(r)}"
        case Neq(l, r):
            return f"{format_term(l)} != {format_term(r)}"
        case And(items):
            return " /\\ ".join(_wrap(i) for i in items)
        case Exists(bound, body):
            return f"exists {' '.join(bound)}. {_wrap(body)}"
    raise ValueError(f"cannot format {c!r}")


def _wrap(c: Constraint) -> str:
    text = format_constraint(c)
    return f"({text})" if isinstance(c, (And, Exists)) else text


def is_test(c: Constraint) -> bool:
    """Whether ``c`` is an expression test such as ``x <= 5``."""
    return isinstance(c, Eq) and isinstance(c.left, Apply) and c.right in (TRUE_C, Const(False))

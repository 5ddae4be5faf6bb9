"""First-order linear-time temporal formulas over store constraints."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..kernel.constraints import Constraint, format_constraint


@dataclass(frozen=True, slots=True)
class TrueF:
    pass


@dataclass(frozen=True, slots=True)
class AtomF:
    constraint: Constraint


@dataclass(frozen=True, slots=True)
class AndF:
    items: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class OrF:
    items: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class NotF:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class ImpliesF:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class ForallF:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True, slots=True)
class ExistsF:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True, slots=True)
class NextF:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class AlwaysF:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class EventuallyF:
    """Kept explicit for readability; it abbreviates ``not always not``."""

    body: "Formula"


Formula = Union[TrueF, AtomF, AndF, OrF, NotF, ImpliesF, ForallF, ExistsF, NextF, AlwaysF,
                EventuallyF]

TRUE_F = TrueF()


def and_f(*items: Formula) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if isinstance(f, AndF):
            flat.extend(f.items)
        elif not isinstance(f, TrueF):
            flat.append(f)
    if not flat:
        return TRUE_F
    return flat[0] if len(flat) == 1 else AndF(tuple(flat))


def as_always_not(f: EventuallyF) -> Formula:
    """The primitive reading of an eventually formula."""
    return NotF(AlwaysF(NotF(f.body)))


def format_formula(f: Formula) -> str:
    match f:
        case TrueF():
            return "true"
        case AtomF(c):
            return format_constraint(c)
        case AndF(items):
            return " & ".join(_wrap(i) for i in items)
        case OrF(items):
            return " | ".join(_wrap(i) for i in items)
        case NotF(body):
            return f"~{_wrap(body)}"
        case ImpliesF(a, b):
            return f"{_wrap(a)} => {_wrap(b)}"
        case ForallF(xs, body):
            return f"forall {' '.join(xs)}. {_wrap(body)}"
        case ExistsF(xs, body):
            return f"exists {' '.join(xs)}. {_wrap(body)}"
        case NextF(body):
            return f"X {_wrap(body)}"
        case AlwaysF(body):
            return f"G {_wrap(body)}"
        case EventuallyF(body):
            return f"F {_wrap(body)}"
    raise ValueError(f"not a formula: {f!r}")


def _wrap(f: Formula) -> str:
    text = format_formula(f)
    simple = isinstance(f, (TrueF, NotF, NextF, AlwaysF, EventuallyF)) or (
        isinstance(f, AtomF) and " " not in text)
    return text if simple else f"({text})"

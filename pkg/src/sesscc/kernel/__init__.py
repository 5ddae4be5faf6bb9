"""Constraint system: terms, constraints, the store and entailment."""

from .constraints import (
    FALSE,
    TRUE,
    And,
    Atom,
    CFalse,
    Constraint,
    CTrue,
    Eq,
    Exists,
    MalformedConstraint,
    Neq,
    atom,
    conj,
    exists,
    format_constraint,
    free_vars,
    holds,
    overline,
    subst,
)
from .store import (
    Store,
    entails,
    equivalent,
    hide,
    match_abstraction,
    store_of,
    tell_merge,
)
from .terms import (
    Apply,
    Const,
    EvalError,
    FreshNames,
    Record,
    Term,
    Tuple,
    Var,
    evaluate,
    format_term,
    record,
    sym,
)

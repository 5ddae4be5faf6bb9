"""Making every action of a process conditional on a constraint."""

from __future__ import annotations

from typing import Callable, Optional

from ..kernel.constraints import Constraint, free_vars
from ..kernel.terms import alpha_name
from ..utcc.derived import expand_derived
from ..utcc.process import (
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Par,
    Process,
    Skip,
    Tell,
    Unless,
    rename_binders,
    when,
)


def guard_process(d: Constraint, p: Process,
                  atomic: Optional[Callable[[Process], bool]] = None) -> Process:
    """Rewrite ``p`` so that each tell, next and unless first asks ``d``.

    Derived constructs are expanded first.  Binders that would capture a
    free variable of ``d`` are renamed apart.  Subprocesses selected by
    ``atomic`` are guarded only at their start: ``when d do P``.
    """
    return _guard(d, free_vars(d), expand_derived(p), atomic or _never)


def _never(p: Process) -> bool:
    return False


def _guard(d: Constraint, dvars: set[str], p: Process, atomic) -> Process:
    if atomic(p):
        return when(d, p)
    match p:
        case Skip():
            return p
        case Tell():
            return when(d, p)
        case Next(body):
            return when(d, Next(_guard(d, dvars, body, atomic)))
        case Unless(c, body):
            return when(d, Unless(c, _guard(d, dvars, body, atomic)))
        case Par(items):
            return Par(tuple(_guard(d, dvars, q, atomic) for q in items))
        case Bang(body):
            return Bang(_guard(d, dvars, body, atomic))
        case BangN(n, body):
            return BangN(n, _guard(d, dvars, body, atomic))
        case Abs() | Local():
            clash = [x for x in p.binders if x in dvars]
            if clash:
                p = rename_binders(p, {x: alpha_name(x) for x in clash})
            if isinstance(p, Abs):
                return Abs(p.binders, p.guard, _guard(d, dvars, p.body, atomic), p.exclusions)
            return Local(p.binders, p.init, _guard(d, dvars, p.body, atomic))
    raise TypeError(f"cannot guard {p!r}")

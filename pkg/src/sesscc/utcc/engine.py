"""Operational semantics of utcc: internal steps, quiescence, time units.

The engine keeps a configuration as a flat list of parallel threads and a
store.  One internal step fires the leftmost enabled thread:

* ``tell``, ``local``, replication, bounded replication and the derived
  forms are always enabled;
* an abstraction is enabled while the store entails its guard for some
  admissible substitution it has not fired yet;
* ``unless c next P`` is enabled once the store entails ``c``;
* ``next P`` is never enabled inside a time unit.

Local variables are realised by renaming the binders to engine-fresh names
(``go#3``) and telling the initial constraint globally; the fresh names
are projected away when the unit's output is reported.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..kernel.constraints import TRUE, Constraint, conj
from ..kernel.store import Store
from ..kernel.terms import Const, EvalError, FreshNames, Term, Var, evaluate
from .derived import expand_derived, expand_once
from .process import (
    DERIVED,
    SKIP,
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
    par,
    substitute,
)

DEFAULT_BUDGET = 10_000
BUDGET_ENV = "SESSCC_BUDGET"


class NonQuiescence(RuntimeError):
    """A time unit exceeded its internal step budget."""

    def __init__(self, culprit: Process, steps: int) -> None:
        from .syntax import format_process

        text = format_process(culprit)
        if len(text) > 200:
            text = text[:197] + "..."
        super().__init__(f"no quiescence after {steps} internal steps; last fired: {text}")
        self.culprit = culprit
        self.steps = steps


def default_budget() -> int:
    value = os.environ.get(BUDGET_ENV)
    return int(value) if value else DEFAULT_BUDGET


@dataclass
class _Thread:
    proc: Process
    # cached abstraction matches, valid while the store signature is unchanged
    version: tuple = ()
    pending: list = field(default_factory=list)


@dataclass
class Configuration:
    process: Process
    store: Store


@dataclass
class TimeUnitResult:
    residual: Process
    output: Constraint
    store: Store
    internal_steps: int
    quiescent: Process = SKIP


class Engine:
    """A utcc interpreter instance; fresh names are unique per instance."""

    def __init__(self, budget: Optional[int] = None, eager: bool = False) -> None:
        self.budget = budget if budget is not None else default_budget()
        if self.budget < 1:
            raise ValueError("step budget must be at least 1")
        self.eager = eager
        self.fresh = FreshNames()
        self.arities: dict[str, int] = {}
        self.locals: set[str] = set()

    def new_store(self) -> Store:
        return Store(self.fresh, self.arities)

    # ------------------------------------------------------------ stepping

    def _enabled(self, t: _Thread, store: Store) -> bool:
        match t.proc:
            case Next() | Skip():
                return False
            case Unless(c, _):
                return store.entails(c)
            case Abs(xs, c, _, excl):
                sig = store.signature(xs, c)
                if t.version != sig:
                    t.version = sig
                    t.pending = store.match_abstraction(xs, c, excl)
                return bool(t.pending)
        return True

    def _fire(self, threads: list[_Thread], i: int, store: Store) -> None:
        t = threads[i]
        p = t.proc
        match p:
            case Tell(c):
                store.tell(c)
                del threads[i]
            case Par(items):
                threads[i:i + 1] = [_Thread(q) for q in items]
            case Local(xs, c, body):
                renaming = {x: Var(self.fresh(x)) for x in xs}
                self.locals.update(v.name for v in renaming.values())
                store.tell(substitute_constraint(c, renaming))
                threads[i] = _Thread(substitute(body, renaming))
            case Unless():
                del threads[i]
            case Bang(body):
                threads[i:i + 1] = [_Thread(body), _Thread(Next(p))]
            case BangN(n, body):
                count = _count(n)
                if count <= 0:
                    del threads[i]
                else:
                    rest = BangN(Const(count - 1), body)
                    threads[i:i + 1] = [_Thread(body), _Thread(Next(rest))]
            case Abs(xs, c, body, excl):
                sigma = t.pending.pop(0)
                row = tuple(sigma[x] for x in xs)
                fired = Abs(xs, c, body, excl + (row,))
                threads[i:i + 1] = [_Thread(substitute(body, sigma)),
                                    _Thread(fired, t.version, t.pending)]
            case _ if isinstance(p, DERIVED):
                threads[i] = _Thread(expand_once(p))
            case _:
                raise TypeError(f"cannot execute {p!r}")

    def step_internal(self, cfg: Configuration) -> Optional[Configuration]:
        """Apply one internal transition, or return None if quiescent."""
        store = cfg.store.copy()
        threads = [_Thread(q) for q in _flat(cfg.process)]
        for i, t in enumerate(threads):
            if self._enabled(t, store):
                self._fire(threads, i, store)
                return Configuration(_rebuild(threads), store)
        return None

    def quiesce(self, cfg: Configuration, budget: Optional[int] = None) -> tuple[Configuration, int]:
        """Run internal transitions to a fixed point; returns (config, steps)."""
        budget = self.budget if budget is None else budget
        if budget < 1:
            raise ValueError("step budget must be at least 1")
        store = cfg.store
        process = expand_derived(cfg.process) if self.eager else cfg.process
        threads = [_Thread(q) for q in _flat(process)]
        steps = 0
        i = 0
        while i < len(threads):
            if not self._enabled(threads[i], store):
                i += 1
                continue
            steps += 1
            if steps > budget:
                raise NonQuiescence(threads[i].proc, budget)
            before = store.version
            self._fire(threads, i, store)
            if store.version != before:
                i = 0
        return Configuration(_rebuild(threads), store), steps

    def observe(self, p: Process, input: Constraint = TRUE,
                budget: Optional[int] = None) -> TimeUnitResult:
        """One observable transition: quiesce on ``input``, report, then F."""
        store = self.new_store()
        store.tell(input)
        cfg, steps = self.quiesce(Configuration(p, store), budget)
        hidden = sorted(self._hidden(cfg.store))
        return TimeUnitResult(
            residual=future(cfg.process),
            output=cfg.store.hide(hidden),
            store=cfg.store,
            internal_steps=steps,
            quiescent=cfg.process,
        )

    def _hidden(self, store: Store) -> set[str]:
        from ..kernel.constraints import free_vars

        return (free_vars(store.to_constraint()) & self.locals) | set(store.hidden)

    def run(self, p: Process, units: int, inputs: Optional[Sequence[Constraint]] = None,
            keep_residuals: bool = False):
        from .trace import Trace

        if units < 1:
            raise ValueError("units must be at least 1")
        trace = Trace()
        current = p
        for u in range(units):
            given = inputs[u] if inputs is not None and u < len(inputs) else TRUE
            result = self.observe(current, given)
            trace.append(result.output, result.store, self._hidden(result.store))
            if keep_residuals:
                trace.residuals.append(result.residual)
            current = result.residual
        return trace


def substitute_constraint(c: Constraint, mapping) -> Constraint:
    from ..kernel.constraints import subst

    return subst(c, mapping)


def _count(n: Term) -> int:
    value = evaluate(n)
    if not isinstance(value, Const) or value.kind != "int":
        raise EvalError(f"bounded replication count {value} is not an integer")
    return value.value


def _flat(p: Process) -> list[Process]:
    if isinstance(p, Par):
        out: list[Process] = []
        for q in p.items:
            out.extend(_flat(q))
        return out
    if isinstance(p, Skip):
        return []
    return [p]


def _rebuild(threads: Iterable[_Thread]) -> Process:
    return par(*(t.proc for t in threads))


def future(p: Process) -> Process:
    """The process to run in the next time unit, given a quiescent one."""
    match p:
        case Skip() | Abs():
            return SKIP
        case Par(items):
            return par(*(future(q) for q in items))
        case Local(xs, _, body):
            return Local(xs, TRUE, future(body))
        case Next(body) | Unless(_, body):
            return body
    raise ValueError(f"future is undefined on a non-quiescent {type(p).__name__}")


# ------------------------------------------------------- functional facade


def step_internal(cfg: Configuration, engine: Optional[Engine] = None) -> Optional[Configuration]:
    return (engine or Engine()).step_internal(cfg)


def quiesce(cfg: Configuration, budget: Optional[int] = None,
            engine: Optional[Engine] = None) -> Configuration:
    start = Configuration(cfg.process, cfg.store.copy())
    return (engine or Engine()).quiesce(start, budget)[0]


def observe(p: Process, input: Constraint = TRUE, budget: Optional[int] = None,
            engine: Optional[Engine] = None) -> TimeUnitResult:
    return (engine or Engine()).observe(p, input, budget)


def run(p: Process, units: int, inputs: Optional[Sequence[Constraint]] = None,
        budget: Optional[int] = None, eager: bool = False):
    return Engine(budget, eager).run(p, units, inputs)

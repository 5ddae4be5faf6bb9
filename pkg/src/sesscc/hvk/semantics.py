"""Reference reduction semantics for HVK and HVK+.

A program is kept as a :class:`State`: the declarations, the restricted
names introduced so far and a flat list of threads.  Each thread carries
the set of timed sessions it depends on; in HVK+ a thread may only act
while all of them are active.  Restricted names always contain ``#`` and
never clash with source identifiers.

Two drivers are offered: :func:`reduce_step` applies a single rule, and
:func:`outermost_run` performs maximal rounds in which every conditional,
every kill and every disjoint pair of complementary actions fires once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from ..kernel.constraints import subst
from ..kernel.store import Store
from ..kernel.terms import Const, EvalError, FreshNames, Term, Var, evaluate, format_term, subst_term
from .ast import (
    INACT,
    Accept,
    Branch,
    CallVar,
    Catch,
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
    Throw,
    TimedRequest,
    children,
    duration_names,
    free_names,
    hpar,
    substitute,
)

UNFOLD_LIMIT = 1000


class Stuck(RuntimeError):
    """No rule applies to the process."""


class NonDeterminismError(RuntimeError):
    """Some thread can pair with more than one partner in the same round."""

    def __init__(self, conflicts: Sequence["Redex"]) -> None:
        text = "; ".join(r.describe() for r in conflicts)
        super().__init__(f"ambiguous pairing: {text}")
        self.conflicts = list(conflicts)


# ------------------------------------------------------------- expressions


def eval_expr(e: Term, env: Optional[Mapping[str, Term]] = None) -> Const:
    """Evaluate a closed expression to a constant."""
    value = evaluate(subst_term(e, env) if env else e)
    if not isinstance(value, Const):
        from ..kernel.terms import term_vars

        missing = sorted(set(term_vars(value)))
        raise EvalError(f"unbound variable(s) {', '.join(missing)} in {format_term(e)}")
    return value


def _truth(e: Term) -> bool:
    value = eval_expr(e)
    if value.kind != "bool":
        raise EvalError(f"condition {format_term(e)} evaluated to non-boolean {format_term(value)}")
    return value.value


# ------------------------------------------------------------------- state


@dataclass(frozen=True, slots=True)
class Thread:
    proc: HvkProcess
    guards: frozenset[str] = frozenset()


@dataclass
class Session:
    start: int
    duration: int
    killed_at: Optional[int] = None
    # sessions the establishing request depended on
    parents: frozenset[str] = frozenset()

    def active(self, round_: int) -> bool:
        if not self.start < round_ <= self.start + self.duration:
            return False
        return self.killed_at is None or round_ <= self.killed_at


@dataclass
class State:
    decls: dict[str, Decl]
    threads: list[Thread]
    restricted: list[str] = field(default_factory=list)
    sessions: dict[str, Session] = field(default_factory=dict)
    round: int = 1
    fresh: FreshNames = field(default_factory=FreshNames)

    def active(self, chan: str, round_: Optional[int] = None) -> bool:
        r = self.round if round_ is None else round_
        s = self.sessions.get(chan)
        if s is None:
            return True
        return s.active(r) and all(self.active(k, r) for k in s.parents)

    def enabled(self, t: Thread) -> bool:
        return all(self.active(k) for k in t.guards)

    def to_process(self) -> HvkProcess:
        body = hpar(*(t.proc for t in self.threads))
        for u in reversed(self.restricted):
            body = Hide(u, body)
        if self.decls:
            return DefIn(tuple(self.decls.values()), body)
        return body


def load(p: HvkProcess, fresh: Optional[FreshNames] = None) -> State:
    """Bring a program into normal form as a :class:`State`."""
    decls: dict[str, Decl] = {}
    if isinstance(p, DefIn):
        decls = {d.name: d for d in p.decls}
        p = p.body
    if fresh is None:
        fresh = FreshNames(_names(p) | {n for d in decls.values() for n in _names(d.body)})
    state = State(decls, [], fresh=fresh)
    state.threads = _normalize(state, [Thread(p)])
    return state


def _names(p: HvkProcess) -> set[str]:
    return free_names(p)


def _normalize(state: State, threads: Iterable[Thread]) -> list[Thread]:
    """Flatten, drop ``0``, hoist restrictions and unfold top-level calls."""
    out: list[Thread] = []
    work = list(threads)
    work.reverse()
    unfolds = 0
    while work:
        t = work.pop()
        match t.proc:
            case Inact():
                continue
            case Par(items):
                work.extend(Thread(q, t.guards) for q in reversed(items))
            case Hide(u, body):
                name = state.fresh(u)
                state.restricted.append(name)
                work.append(Thread(substitute(body, {u: Const(name)}), t.guards))
            case CallVar():
                unfolds += 1
                if unfolds > UNFOLD_LIMIT:
                    raise RecursionError(f"unguarded recursion through {t.proc.name}")
                work.append(Thread(unfold(state.decls, t.proc), t.guards))
            case DefIn():
                raise ValueError("definitions may only appear at the outermost level")
            case _:
                out.append(t)
    return out


def unfold(decls: Mapping[str, Decl], call: CallVar) -> HvkProcess:
    """Rule Def: replace a call by its declaration body."""
    decl = decls.get(call.name)
    if decl is None:
        raise NameError(f"unbound process variable {call.name}")
    if len(call.exprs) != len(decl.params) or len(call.chans) != len(decl.chans):
        raise TypeError(f"{call.name} called with the wrong number of arguments")
    mapping: dict[str, Term] = {x: eval_expr(e) for x, e in zip(decl.params, call.exprs)}
    mapping.update({k: Const(c) for k, c in zip(decl.chans, call.chans)})
    return substitute(decl.body, mapping)


def normal_form(p: HvkProcess) -> HvkProcess:
    """``def D in new u1 ... (Q1 | ... | Qn)`` with no top-level Par, Hide or call."""
    return load(p).to_process()


# ----------------------------------------------------------------- redexes


@dataclass(frozen=True, slots=True)
class Redex:
    rule: str
    left: int
    right: int
    chan: str

    def describe(self) -> str:
        return f"{self.rule} on {self.chan} between threads {self.left} and {self.right}"


def _pair_rule(p: HvkProcess, q: HvkProcess, timed_ok=None) -> Optional[tuple[str, str]]:
    match p, q:
        case Request(a, _, _), Accept(b, _, _) if a == b:
            return "Link", a
        case TimedRequest(a, _, m, _), DeclAccept(b, k, pre, _) if a == b:
            if timed_ok is None or timed_ok(m, k, pre):
                return "Link", a
            return None
        case Send(k, es, _), Receive(h, xs, _) if k == h and len(es) == len(xs):
            return "Com", k
        case Select(k, label, _), Branch(chan=h) as br if k == h and br.lookup(label) is not None:
            return "Label", k
        case Throw(k, _, _), Catch(h, _, _) if k == h:
            return "Pass", k
    return None


def precondition_holds(duration: Term, chan: str, pre) -> bool:
    """Whether an accept's precondition admits the requested duration."""
    m = eval_expr(duration)
    return Store().entails(subst(pre, {d: m for d in duration_names(chan)}))


def find_redexes(threads: Sequence[HvkProcess | Thread], state: Optional[State] = None) -> list[Redex]:
    """All pairs of complementary threads, lowest index first."""
    procs = [t.proc if isinstance(t, Thread) else t for t in threads]
    usable = [state is None or state.enabled(t) if isinstance(t, Thread) else True
              for t in threads]
    found = []
    for i, p in enumerate(procs):
        if not usable[i]:
            continue
        for j in range(i + 1, len(procs)):
            if not usable[j]:
                continue
            q = procs[j]
            hit = _pair_rule(p, q, precondition_holds) or _pair_rule(q, p, precondition_holds)
            if hit is None:
                continue
            rule, chan = hit
            if state is not None and not state.active(chan):
                continue
            found.append(Redex(rule, i, j, chan))
    return found


def conflicts(redexes: Sequence[Redex]) -> list[Redex]:
    """Redexes sharing a thread with another redex."""
    count: dict[int, int] = {}
    for r in redexes:
        count[r.left] = count.get(r.left, 0) + 1
        count[r.right] = count.get(r.right, 0) + 1
    return [r for r in redexes if count[r.left] > 1 or count[r.right] > 1]


# ------------------------------------------------------------------ firing


@dataclass(frozen=True, slots=True)
class Firing:
    """What a rule did; used for traces and the correspondence harness."""

    rule: str
    chan: str
    detail: tuple = ()
    guards: frozenset[str] = frozenset()
    # indices of the participating threads within the round
    threads: tuple[int, ...] = ()

    def text(self) -> str:
        extra = " ".join(str(d) for d in self.detail)
        return f"{self.rule}({self.chan}{', ' + extra if extra else ''})"


def _fire_pair(state: State, r: Redex) -> tuple[list[Thread], Firing]:
    a, b = state.threads[r.left], state.threads[r.right]
    p, q = a.proc, b.proc
    if _pair_rule(p, q) is None:
        p, q, a, b = q, p, b, a
    match p, q:
        case Request(name, k, body), Accept(_, h, qbody):
            chan = state.fresh(k)
            state.restricted.append(chan)
            return ([Thread(substitute(body, {k: Const(chan)}), a.guards),
                     Thread(substitute(qbody, {h: Const(chan)}), b.guards)],
                    Firing("Link", name, (chan,)))
        case TimedRequest(name, k, m, body), DeclAccept(_, h, _, qbody):
            chan = state.fresh(k)
            duration = eval_expr(m)
            state.restricted.append(chan)
            state.sessions[chan] = Session(state.round, duration.value, parents=a.guards)
            return ([Thread(substitute(body, {k: Const(chan)}), a.guards | {chan}),
                     Thread(substitute(qbody, {h: Const(chan)}), b.guards | {chan})],
                    Firing("Link", name, (chan, duration.value)))
        case Send(k, es, body), Receive(_, xs, qbody):
            values = [eval_expr(e) for e in es]
            return ([Thread(body, a.guards),
                     Thread(substitute(qbody, dict(zip(xs, values))), b.guards)],
                    Firing("Com", k, tuple(values)))
        case Select(k, label, body), Branch() as br:
            return ([Thread(body, a.guards), Thread(br.lookup(label), b.guards)],
                    Firing("Label", k, (label,)))
        case Throw(k, sent, body), Catch(_, bound, qbody):
            return ([Thread(body, a.guards),
                     Thread(substitute(qbody, {bound: Const(sent)}), b.guards)],
                    Firing("Pass", k, (sent,)))
    raise AssertionError(f"not a redex: {r}")


def _fire_single(state: State, t: Thread) -> tuple[Optional[Thread], Firing]:
    match t.proc:
        case If(cond, then, orelse):
            taken = _truth(cond)
            return Thread(then if taken else orelse, t.guards), Firing("If1" if taken else "If2", "")
        case Kill(k):
            session = state.sessions.get(k)
            if session is not None and session.killed_at is None:
                session.killed_at = state.round
            return None, Firing("Kill", k, guards=t.guards)
    raise AssertionError(f"{t.proc!r} fires only in pairs")


def _singles(state: State) -> list[int]:
    return [i for i, t in enumerate(state.threads)
            if isinstance(t.proc, (If, Kill)) and state.enabled(t)]


def reduce_step(p: HvkProcess) -> HvkProcess:
    """Apply one rule (lowest index first); raises :class:`Stuck` otherwise."""
    state = load(p)
    singles = _singles(state)
    redexes = find_redexes(state.threads, state)
    if singles and (not redexes or singles[0] < redexes[0].left):
        i = singles[0]
        new, _ = _fire_single(state, state.threads[i])
        state.threads[i:i + 1] = _normalize(state, [new] if new else [])
    elif redexes:
        r = redexes[0]
        (left, right), _ = _fire_pair(state, r)
        state.threads[r.right:r.right + 1] = _normalize(state, [right])
        state.threads[r.left:r.left + 1] = _normalize(state, [left])
    else:
        raise Stuck("no redex, conditional or kill can fire")
    return state.to_process()


# ------------------------------------------------------- outermost rounds


@dataclass
class Round:
    """One outermost round: the threads it started from and what fired."""

    index: int
    before: list[Thread]
    fired: list[Firing]
    after: HvkProcess
    # thread indices (into ``before``) that took part in a firing
    used: frozenset[int] = frozenset()
    # per thread of ``before``: whether its sessions allowed it to act
    enabled: tuple[bool, ...] = ()
    # timed sessions active during this round
    active: frozenset[str] = frozenset()

    def record(self) -> dict:
        from .parser import format_hvk

        return {
            "round": self.index,
            "threads": [format_hvk(t.proc) for t in self.before],
            "fired_rules": [f.text() for f in self.fired],
        }


def outermost_round(state: State, force: bool = False) -> Round:
    """Fire every conditional, every kill and every disjoint redex once."""
    before = list(state.threads)
    enabled = tuple(state.enabled(t) for t in before)
    active = frozenset(k for k in state.sessions if state.active(k))
    redexes = find_redexes(before, state)
    clash = conflicts(redexes)
    if clash and not force:
        raise NonDeterminismError(clash)
    used: set[int] = set()
    replaced: dict[int, list[Thread]] = {}
    fired: list[Firing] = []
    for i in _singles(state):
        new, f = _fire_single(state, before[i])
        f = replace(f, threads=(i,))
        used.add(i)
        replaced[i] = [new] if new else []
        fired.append(f)
    for r in redexes:
        if r.left in used or r.right in used:
            continue
        (left, right), f = _fire_pair(state, r)
        f = replace(f, threads=(r.left, r.right))
        used.update((r.left, r.right))
        replaced[r.left] = [left]
        replaced[r.right] = [right]
        fired.append(f)
    threads: list[Thread] = []
    for i, t in enumerate(before):
        threads.extend(_normalize(state, replaced[i]) if i in replaced else [t])
    state.threads = threads
    result = Round(state.round, before, fired, state.to_process(), frozenset(used),
                   enabled, active)
    state.round += 1
    return result


def outermost_run(p: HvkProcess | State, rounds: int, force: bool = False) -> list[Round]:
    """Run ``rounds`` outermost rounds; rounds that fire nothing are kept."""
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    state = p if isinstance(p, State) else load(p)
    return [outermost_round(state, force) for _ in range(rounds)]


def write_rounds(rounds: Iterable[Round], out) -> None:
    for r in rounds:
        out.write(json.dumps(r.record(), ensure_ascii=False) + "\n")


# -------------------------------------------------------------------- lint


def lint(p: HvkProcess) -> list[str]:
    """Warnings for programs with several accepts on one service name."""
    seen: dict[str, int] = {}

    def walk(q: HvkProcess) -> None:
        if isinstance(q, (Accept, DeclAccept)):
            seen[q.name] = seen.get(q.name, 0) + 1
        for c in children(q):
            walk(c)

    walk(p)
    return [f"service {a} has {n} accept processes; at most one is expected"
            for a, n in sorted(seen.items()) if n > 1]


__all__ = [
    "Firing", "NonDeterminismError", "Redex", "Round", "Session", "State", "Stuck", "Thread",
    "conflicts", "eval_expr", "find_redexes", "lint", "load", "normal_form", "outermost_round",
    "outermost_run", "precondition_holds", "reduce_step", "unfold", "write_rounds",
]

"""Bounded checking of temporal properties over finite traces.

Every verdict is relative to the number of units inspected: a trace is a
finite prefix of an infinite run, so ``always`` and ``never`` can only be
confirmed up to the bound, and a missing ``eventually`` witness only means
none was found within it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..kernel.constraints import Constraint, MalformedConstraint, format_constraint, subst
from ..kernel.terms import Const
from ..syntax import ParseError, parse_constraint
from ..utcc.trace import Trace

HOLDS = "holds"
HOLDS_WITHIN_BOUND = "holds-within-bound"
NOT_WITHIN_BOUND = "not-within-bound"
VIOLATED = "violated"

KINDS = ("exists", "absence", "count_at_least", "responded_existence")


class MalformedTemplate(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    template: str
    verdict: str
    bound: int
    witness_unit: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.verdict in (HOLDS, HOLDS_WITHIN_BOUND)

    def record(self) -> dict:
        out = {"template": self.template, "verdict": self.verdict}
        if self.witness_unit is not None:
            out["witness_unit"] = self.witness_unit
        out["bound"] = self.bound
        return out


@dataclass(frozen=True)
class Template:
    name: str
    kind: str
    parameters: dict = field(default_factory=dict)
    bound: Optional[int] = None


def _units(trace: Trace, bound: Optional[int]) -> int:
    return len(trace) if bound is None else min(bound, len(trace))


def check_eventually(trace: Trace, d: Constraint, bound: Optional[int] = None,
                     name: str = "eventually") -> Verdict:
    """The least unit whose store entails ``d``."""
    if len(trace) == 0:
        raise ValueError("cannot check an empty trace")
    n = _units(trace, bound)
    for i in range(1, n + 1):
        if trace.entails(i, d):
            return Verdict(name, HOLDS, n, i)
    return Verdict(name, NOT_WITHIN_BOUND, n)


def check_absence(trace: Trace, d: Constraint, bound: Optional[int] = None,
                  name: str = "absence") -> Verdict:
    n = _units(trace, bound)
    for i in range(1, n + 1):
        if trace.entails(i, d):
            return Verdict(name, VIOLATED, n, i)
    return Verdict(name, HOLDS_WITHIN_BOUND, n)


def acceptance_counter(trace: Trace, service: str, bound: Optional[int] = None) -> int:
    """Distinct sessions accepted on ``service`` anywhere in the trace."""
    return len(_accepted(trace, service, _units(trace, bound))[0])


def _accepted(trace: Trace, service: str, n: int) -> tuple[set, list[int]]:
    seen: set = set()
    growth = []
    name = Const(service)
    for store in trace.stores[:n]:
        for fact in store.facts:
            if fact.pred in ("acc", "accepted") and len(fact.args) == 2 and fact.args[0] == name:
                seen.add(fact.args[1])
        growth.append(len(seen))
    return seen, growth


def check_count(trace: Trace, service: str, at_least: int, bound: Optional[int] = None,
                name: str = "count_at_least") -> Verdict:
    n = _units(trace, bound)
    _, growth = _accepted(trace, service, n)
    for i, count in enumerate(growth, start=1):
        if count >= at_least:
            return Verdict(name, HOLDS, n, i)
    return Verdict(name, NOT_WITHIN_BOUND, n)


def check_responded(trace: Trace, trigger: Constraint, response: Constraint,
                    variables: Sequence[str] = (), bound: Optional[int] = None,
                    name: str = "responded_existence") -> Verdict:
    """Every instance of ``trigger`` is followed, same unit or later, by its response.

    Instances are the substitutions for ``variables`` under which a unit's
    store entails the trigger; the response is checked under the same
    substitution, which pairs trigger and response by their shared terms.
    The witness is the last unit a response was needed from, or the first
    unanswered trigger when the verdict fails.
    """
    n = _units(trace, bound)
    last = None
    for i in range(1, n + 1):
        store = trace.stores[i - 1]
        for sigma in store.match_abstraction(tuple(variables), trigger):
            wanted = subst(response, sigma)
            hit = next((j for j in range(i, n + 1) if trace.entails(j, wanted)), None)
            if hit is None:
                return Verdict(name, NOT_WITHIN_BOUND, n, i)
            last = hit if last is None else max(last, hit)
    return Verdict(name, HOLDS_WITHIN_BOUND, n, last)


# ------------------------------------------------------------- templates


def _constraint(t: Template, key: str, variables: Sequence[str] = ()) -> Constraint:
    text = t.parameters.get(key)
    if not isinstance(text, str):
        raise MalformedTemplate(f"template {t.name}: parameter {key!r} must be constraint text")
    try:
        return parse_constraint(text, variables)
    except (ParseError, MalformedConstraint) as exc:
        raise MalformedTemplate(f"template {t.name}: {key}: {exc}") from exc


def check_template(trace: Trace, t: Template) -> Verdict:
    match t.kind:
        case "exists":
            return check_eventually(trace, _constraint(t, "constraint"), t.bound, t.name)
        case "absence":
            return check_absence(trace, _constraint(t, "constraint"), t.bound, t.name)
        case "count_at_least":
            service, n = t.parameters.get("service"), t.parameters.get("n")
            if not isinstance(service, str) or not isinstance(n, int) or isinstance(n, bool):
                raise MalformedTemplate(f"template {t.name}: needs a service name and an integer n")
            return check_count(trace, service, n, t.bound, t.name)
        case "responded_existence":
            variables = t.parameters.get("vars", [])
            if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
                raise MalformedTemplate(f"template {t.name}: vars must be a list of names")
            return check_responded(trace, _constraint(t, "trigger", variables),
                                   _constraint(t, "response", variables), variables,
                                   t.bound, t.name)
    raise MalformedTemplate(f"template {t.name}: unknown kind {t.kind!r}")


def parse_template(record: object, line: int = 0) -> Template:
    where = f"template line {line}" if line else "template"
    if not isinstance(record, dict):
        raise MalformedTemplate(f"{where}: expected an object")
    name, kind = record.get("name"), record.get("kind")
    params = record.get("parameters", {})
    bound = record.get("bound")
    if not isinstance(name, str) or not name:
        raise MalformedTemplate(f"{where}: missing name")
    if kind not in KINDS:
        raise MalformedTemplate(f"{where}: kind must be one of {', '.join(KINDS)}")
    if not isinstance(params, dict):
        raise MalformedTemplate(f"{where}: parameters must be an object")
    if bound is not None and (not isinstance(bound, int) or isinstance(bound, bool) or bound < 1):
        raise MalformedTemplate(f"{where}: bound must be a positive integer")
    t = Template(name, kind, params, bound)
    # validate constraint text eagerly so errors surface before any run
    match kind:
        case "exists" | "absence":
            _constraint(t, "constraint")
        case "responded_existence":
            variables = params.get("vars", [])
            if not isinstance(variables, list):
                raise MalformedTemplate(f"{where}: vars must be a list of names")
            _constraint(t, "trigger", variables)
            _constraint(t, "response", variables)
    return t


def read_templates(lines: Iterable[str]) -> list[Template]:
    out = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedTemplate(f"template line {n}: {exc.msg}") from exc
        out.append(parse_template(record, n))
    return out


def verify(trace: Trace, templates: Iterable[Template]) -> list[Verdict]:
    return [check_template(trace, t) for t in templates]


def format_verdict(v: Verdict) -> str:
    return json.dumps(v.record(), ensure_ascii=False)


__all__ = [
    "HOLDS", "HOLDS_WITHIN_BOUND", "KINDS", "MalformedTemplate", "NOT_WITHIN_BOUND", "Template",
    "VIOLATED", "Verdict", "acceptance_counter", "check_absence", "check_count",
    "check_eventually", "check_responded", "check_template", "format_constraint",
    "format_verdict", "parse_template", "read_templates", "verify",
]

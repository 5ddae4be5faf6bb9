"""Randomised property suites, all derandomised so every run sees the same cases."""

from __future__ import annotations

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from sesscc.hvk import normal_form
from sesscc.kernel import Store, match_abstraction, tell_merge
from sesscc.kernel.constraints import Atom
from sesscc.kernel.terms import Const, Var
from sesscc.utcc import Engine, congr_normalize, obs_equiv
from sesscc.utcc import process as u

from .oracles import brute_force_matches, oracle_entails
from .strategies import atoms, ground_atom, hvk_programs, queries, store_lists, utcc_processes

FIXED = dict(derandomize=True, deadline=None, database=None,
             suppress_health_check=list(HealthCheck))


def store_from(items) -> Store:
    s = Store()
    for c in items:
        s.tell(c)
    return s


class TestEntailment:
    @settings(max_examples=200, **FIXED)
    @given(store_lists, queries(), queries())
    def test_monotonicity_and_cut_agree_with_saturation(self, told, c, d):
        s = store_from(told)
        assert s.entails(c) == oracle_entails(told, c)
        assert s.entails(d) == oracle_entails(told, d)
        if s.entails(c):
            # monotonicity
            assert tell_merge(s, d).entails(c)
            # cut
            if tell_merge(s, c).entails(d):
                assert s.entails(d)
        assert store_from(told + [c]).entails(d) == oracle_entails(told + [c], d)


class TestMatchAbstraction:
    @settings(max_examples=100, **FIXED)
    @given(st.lists(atoms(), min_size=0, max_size=6),
           st.lists(st.sampled_from(["x", "y"]), min_size=1, max_size=2, unique=True),
           atoms())
    def test_agrees_with_exhaustive_enumeration(self, told, binders, guard):
        s = store_from(told)
        expected, sat = brute_force_matches(told, binders, guard)
        got = match_abstraction(s, binders, guard)
        assert {tuple(frozenset(sat.members(sub[b])) for b in binders) for sub in got} == expected
        # no admissible substitution mentions its own binders
        for sub in got:
            assert not any(isinstance(t, Var) and t.name in binders for t in sub.values())

    @settings(max_examples=30, **FIXED)
    @given(st.lists(atoms(), min_size=1, max_size=6), atoms())
    def test_exclusions_are_respected(self, told, guard):
        s = store_from(told)
        first = match_abstraction(s, ["x"], guard)
        if first:
            used = [tuple(first[0].values())]
            rest = match_abstraction(s, ["x"], guard, used)
            assert first[0] not in rest
            assert len(rest) == len(first) - 1


def reverse_par(p):
    """The same process with every parallel composition listed backwards."""
    match p:
        case u.Par(items):
            return u.Par(tuple(reverse_par(i) for i in reversed(items)))
        case u.Abs(xs, c, body, ex):
            return u.Abs(xs, c, reverse_par(body), ex)
        case u.Local(xs, c, body):
            return u.Local(xs, c, reverse_par(body))
        case u.Next(body) | u.Bang(body):
            return type(p)(reverse_par(body))
        case u.Unless(c, body):
            return u.Unless(c, reverse_par(body))
        case u.BangN(n, body):
            return u.BangN(n, reverse_par(body))
    return p


class TestDeterminacy:
    @settings(max_examples=50, **FIXED)
    @given(utcc_processes(depth=3), st.lists(ground_atom, max_size=3))
    def test_par_order_does_not_change_the_trace(self, p, inputs):
        feed = inputs + [Atom("p", (Const("a"),))]
        left = Engine().run(p, 4, feed)
        right = Engine().run(reverse_par(p), 4, feed)
        assert obs_equiv(left, right)


class TestNormalization:
    @settings(max_examples=100, **FIXED)
    @given(utcc_processes(depth=3))
    def test_utcc_normalization_is_idempotent(self, p):
        once = congr_normalize(p)
        assert congr_normalize(once) == once

    @settings(max_examples=100, **FIXED)
    @given(hvk_programs())
    def test_hvk_normal_form_is_idempotent(self, p):
        once = normal_form(p)
        assert normal_form(once) == once

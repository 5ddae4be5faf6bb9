import pytest

from sesscc.kernel import Const, Store, atom, equivalent, format_constraint, store_of
from sesscc.kernel.constraints import TRUE
from sesscc.kernel.terms import Tuple, Var
from sesscc.utcc import (
    SKIP,
    Abs,
    Bang,
    BangN,
    Engine,
    Local,
    Next,
    NonQuiescence,
    Par,
    PTell,
    Tell,
    Unless,
    WaitAck,
    congr_normalize,
    expand_derived,
    format_process,
    future,
    obs_equiv,
    observe,
    parse_utcc,
    parse_utcc_constraint,
    quiesce,
    run,
    serialize,
    step_internal,
)
from sesscc.utcc.derived import is_core
from sesscc.utcc.engine import Configuration
from sesscc.utcc.trace import parse_trace

from .oracles import oracle_entails

k = Const("k")
a, b = atom("a"), atom("b")


def outputs(trace):
    return [format_constraint(o) for o in trace.outputs]


class TestCongruence:
    def test_skip_unit(self):
        assert congr_normalize(Par((SKIP, Tell(a)))) == Tell(a)

    def test_nested_locals_merge(self):
        p = parse_utcc("(local x) (local y) tell(p(x, y))")
        assert format_process(congr_normalize(p)) == "(local x y) tell(p(x, y))"

    def test_commutativity(self):
        p, q = Tell(a), Next(Tell(b))
        assert congr_normalize(Par((p, q))) == congr_normalize(Par((q, p)))

    def test_scope_extrusion(self):
        p = parse_utcc("(local x) tell(p(x)) || tell(b)")
        assert isinstance(congr_normalize(p), Local)

    def test_idempotent(self):
        p = parse_utcc("skip || ((local x) (local y) tell(q(x, y)) || tell(a)) || skip")
        once = congr_normalize(p)
        assert congr_normalize(once) == once


class TestStepInternal:
    def test_tell(self):
        cfg = step_internal(Configuration(Tell(atom("out", k, 5)), Store()))
        assert cfg.process == SKIP
        assert cfg.store.entails(atom("out", k, 5))

    def test_abstraction_records_the_substitution(self):
        p = Abs(("x",), atom("out", k, Var("x")), Tell(atom("got", Var("x"))))
        cfg = step_internal(Configuration(p, store_of(atom("out", k, 5))))
        assert cfg.process == Par((Tell(atom("got", 5)),
                                   Abs(("x",), atom("out", k, Var("x")), Tell(atom("got", Var("x"))),
                                       ((Const(5),),))))
        # the oracle sees exactly one admissible substitution
        assert oracle_entails([atom("out", k, 5)], atom("out", k, 5))
        assert step_internal(step_internal(cfg)) is None

    def test_quiescent_returns_none(self):
        assert step_internal(Configuration(SKIP, Store())) is None

    def test_caller_store_is_not_modified(self):
        s = Store()
        step_internal(Configuration(Tell(a), s))
        assert not s.entails(a)

    def test_non_quiescence_with_successor_terms(self):
        x = Var("x")
        p = Abs(("x",), atom("c", x), Tell(atom("c", Tuple((Const("s"), x)))))
        with pytest.raises(NonQuiescence):
            quiesce(Configuration(p, store_of(atom("c", 0))), budget=40)

    def test_unless_is_dropped_only_when_entailed(self):
        cfg = quiesce(Configuration(Unless(a, Tell(b)), store_of(a)))
        assert cfg.process == SKIP


class TestQuiesce:
    def test_skip(self):
        cfg, steps = Engine().quiesce(Configuration(SKIP, Store()))
        assert cfg.process == SKIP and steps == 0

    def test_matched_tell_and_wait(self):
        p = Par((PTell(atom("c", 1)), WaitAck(("x",), atom("c", Var("x")), Next(Tell(atom("d", Var("x")))))))
        cfg = quiesce(Configuration(p, Store()))
        assert cfg.store.entails(atom("c", 1))
        assert cfg.store.entails(atom("ack_c", 1))

    def test_budget_must_be_positive(self):
        with pytest.raises(ValueError):
            quiesce(Configuration(SKIP, Store()), budget=0)

    def test_budget_from_environment(self, monkeypatch):
        monkeypatch.setenv("SESSCC_BUDGET", "7")
        assert Engine().budget == 7


class TestFuture:
    def test_abstraction_is_erased(self):
        assert future(parse_utcc("when a do tell(b)")) == SKIP

    def test_next_is_unwrapped(self):
        assert future(Next(Tell(a))) == Tell(a)

    def test_local_keeps_binders(self):
        p = parse_utcc("(local x; c(x)) next tell(d(x))")
        assert future(p) == Local(("x",), TRUE, Tell(atom("d", Var("x"))))


class TestObserve:
    def test_tell(self):
        r = observe(Tell(a))
        assert r.output == a and r.residual == SKIP

    def test_unless_with_guard(self):
        r = observe(Unless(a, Tell(b)), a)
        assert r.output == a and r.residual == SKIP

    def test_unless_without_guard(self):
        r = observe(Unless(a, Tell(b)))
        assert r.output == TRUE and r.residual == Tell(b)

    def test_local_names_are_projected(self):
        r = observe(parse_utcc("(local x; c(x)) tell(d(x))"))
        assert equivalent(r.output, parse_utcc_constraint("exists y. c(y) /\\ d(y)"))

    def test_output_entails_input(self):
        r = observe(parse_utcc("tell(b)"), a)
        assert store_of(r.output).entails(a)


class TestRun:
    def test_replication(self):
        assert outputs(run(Bang(Tell(a)), 3)) == ["a", "a", "a"]

    def test_bounded_replication(self):
        assert outputs(run(BangN(Const(2), Tell(a)), 3)) == ["a", "a", "true"]

    def test_unit_delay(self):
        assert outputs(run(Next(Tell(a)), 2)) == ["true", "a"]

    def test_inputs(self):
        assert outputs(run(parse_utcc("when a do tell(b)"), 2, [a])) == ["a /\\ b", "true"]

    def test_units_must_be_positive(self):
        with pytest.raises(ValueError):
            run(SKIP, 0)

    def test_persistent_tell_until_acknowledged(self):
        p = Par((PTell(a), Next(Next(parse_utcc("when a do tell(ack_a)")))))
        t = run(p, 4)
        assert [t.entails(i, a) for i in range(1, 5)] == [True, True, True, False]


class TestDerived:
    def test_persistent_tell_expansion(self):
        text = format_process(expand_derived(PTell(atom("c", 1))))
        assert text == ("(local go stop) (tell(out'(go)) || !when out'(go) do tell(c(1)) || "
                        "!unless out'(stop) next tell(out'(go)) || !when ack_c(1) do !tell(out'(stop)))")

    def test_whenever_form(self):
        p = parse_utcc("whenever c(1) do tell(d)")
        assert p == WaitAck((), atom("c", 1), Tell(atom("d")))
        assert "tell(ack_c(1))" in format_process(expand_derived(p))

    def test_idempotent_on_core(self):
        p = parse_utcc("!(when a do next tell(b)) || (local x) tell(c(x))")
        assert is_core(p)
        assert expand_derived(p) == p

    def test_lazy_and_eager_agree(self):
        p = Par((PTell(atom("c", 1)), WaitAck(("x",), atom("c", Var("x")), Tell(atom("d", Var("x"))))))
        assert obs_equiv(Engine().run(p, 3), Engine(eager=True).run(p, 3))


class TestTraces:
    def test_round_trip(self):
        t = run(parse_utcc("tell(a) || (local x) tell(c(x, 1)) || next tell(b)"), 2)
        again = parse_trace(serialize(t))
        assert again == t
        assert serialize(again) == serialize(t)

    def test_record_fields(self):
        line = serialize(run(Tell(a), 1))
        assert line == ('{"unit_index": 1, "atoms": ["a"], "equalities": [], '
                        '"disequalities": [], "inconsistent": false}\n')

    def test_control_atoms_are_ignored(self):
        with_control = run(parse_utcc("tell(a) || (local stop) tell(out'(stop))"), 1)
        plain = run(Tell(a), 1)
        assert obs_equiv(with_control, plain)

    def test_reflexive(self):
        t = run(Tell(a), 2)
        assert obs_equiv(t, t)

    def test_distinct_atoms(self):
        assert not obs_equiv(run(Tell(a), 1), run(Tell(b), 1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            obs_equiv(run(Tell(a), 1), run(Tell(a), 2))


class TestSyntax:
    @pytest.mark.parametrize("text", [
        "skip",
        "tell(out(k, 5))",
        "next tell(a)",
        "unless a next tell(b)",
        "when a do tell(b)",
        "(abs x y; q(x, y)) tell(p(x))",
        "(local x; c(x)) tell(d(x))",
        "!tell(a)",
        "!{3} tell(a)",
        "whenever c(1) do tell(d)",
        "waitack x; c(x) do next tell(d(x))",
        "ptell(req(a, k))",
        "tell(a) || next tell(b)",
    ])
    def test_round_trip(self, text):
        p = parse_utcc(text)
        assert parse_utcc(format_process(p)) == p

    def test_syntax_error_position(self):
        from sesscc.syntax import ParseError

        with pytest.raises(ParseError) as info:
            parse_utcc("tell(a")
        assert info.value.line == 1

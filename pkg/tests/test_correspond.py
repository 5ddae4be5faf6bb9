import pytest

from sesscc.cli import corpus_entries, read_source
from sesscc.correspond import correspond, same_state
from sesscc.encoder import EncodingContext
from sesscc.hvk import NonDeterminismError, is_timed, parse_hvk
from sesscc.kernel import Const, atom
from sesscc.kernel.terms import Var

k, h = Const("k"), Const("h")


def corpus(name, units, **kw):
    p = parse_hvk(read_source(f"corpus:{name}"))
    return correspond(p, units, EncodingContext(timed=is_timed(p), **kw))


class TestSameState:
    def test_identical(self):
        atoms = [atom("out", k, 1)]
        assert same_state(atoms, list(atoms))

    def test_renamed_restricted_name(self):
        assert same_state([atom("acc", Const("a"), Var("k#1"))], [atom("acc", Const("a"), Var("k#7"))])

    def test_counts_must_match(self):
        x, y = Var("x#1"), Var("x#2")
        assert not same_state([atom("req", Const("a"), x), atom("req", Const("a"), y)],
                              [atom("req", Const("a"), x)])

    def test_public_names_are_not_renamed(self):
        assert not same_state([atom("out", k, 1)], [atom("out", h, 1)])


class TestCorrespond:
    def test_single_communication(self):
        report = correspond(parse_hvk("k![1] 0 | k?(x) in 0"), 2)
        assert report.agree and len(report.units) == 2
        assert report.units[0].fired == ["Com(k, 1)"]

    def test_link_then_communication(self):
        report = correspond(parse_hvk("request a(k) in k![1] 0 | accept a(k) in k?(x) in 0"), 3)
        assert report.agree
        assert [u.fired != [] for u in report.units] == [True, True, False]

    def test_corrupted_encoding_diverges_at_the_first_unit(self):
        p = parse_hvk("request a(k) in k![1] 0 | accept a(k) in k?(x) in 0")
        report = correspond(p, 3, EncodingContext(predicates={"req.post": "acc"}))
        assert not report.agree and report.first_divergence == 1
        assert "first divergence at unit 1" in report.lines()[-1]

    def test_ambiguous_program_is_rejected(self):
        with pytest.raises(NonDeterminismError):
            correspond(parse_hvk(read_source("corpus:ambiguous.hvk")), 2)

    def test_rounds_must_be_positive(self):
        with pytest.raises(ValueError):
            correspond(parse_hvk("0"), 0)

    @pytest.mark.parametrize("name", ["booking.hvk", "broker.hvk"])
    def test_timed_scenarios_agree(self, name):
        report = corpus(name, 20)
        assert report.agree, "\n".join(report.lines())

    def test_every_deterministic_corpus_program_agrees(self):
        names = [n for n in corpus_entries() if n != "ambiguous.hvk"]
        assert len(names) >= 15
        for name in names:
            report = corpus(name, 6)
            assert report.agree, name + "\n" + "\n".join(report.lines())

    def test_kill_is_reported_from_its_round_onward(self):
        report = correspond(parse_hvk("request a(k, 5) in kill(k) | accept a(k : dur_k <= 5) in 0"), 4,
                            EncodingContext(timed=True))
        assert report.agree
        assert [any("kill" in e for e in u.expected) for u in report.units] == [False, True, True, True]

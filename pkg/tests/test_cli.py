import io
import json

import pytest

from sesscc.cli import (
    EXIT_ERROR,
    EXIT_NON_DETERMINISTIC,
    EXIT_NON_QUIESCENT,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_STUCK,
    EXIT_TEMPLATE,
    RunConfig,
    UsageError,
    corpus_entries,
    main,
)
from sesscc.utcc.trace import parse_trace


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class TestExitCodes:
    def test_ok(self, tmp_path, capsys):
        src = write(tmp_path, "p.hvk", "k![1] 0 | k?(x) in 0")
        assert main(["run", src, "--units", "2"]) == EXIT_OK
        rounds = records(capsys.readouterr().out)
        assert len(rounds) == 2

    def test_parse_error_reports_its_position(self, tmp_path, capsys):
        src = write(tmp_path, "bad.hvk", "k![x | 0")
        assert main(["run", src]) == EXIT_PARSE
        assert "column" in capsys.readouterr().err

    def test_non_quiescent(self, tmp_path):
        src = write(tmp_path, "loop.utcc", "tell(c(0)) || !(abs x; c(x)) tell(c((x, 1)))")
        assert main(["run", src, "--units", "1", "--budget", "200"]) == EXIT_NON_QUIESCENT

    def test_ambiguous(self):
        assert main(["run", "corpus:ambiguous.hvk"]) == EXIT_NON_DETERMINISTIC

    def test_forced_pairing(self, capsys):
        assert main(["run", "corpus:ambiguous.hvk", "--force-pairing", "--units", "1"]) == EXIT_OK
        assert "Com(k, 1)" in capsys.readouterr().out

    def test_stuck(self, tmp_path):
        assert main(["run", write(tmp_path, "idle.hvk", "0"), "--units", "2"]) == EXIT_STUCK

    def test_malformed_templates(self, tmp_path):
        bad = write(tmp_path, "t.jsonl", '{"name": "x", "kind": "nope"}\n')
        assert main(["verify", "corpus:atm.hvk", "--templates", bad]) == EXIT_TEMPLATE

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.hvk")]) == EXIT_ERROR

    def test_timed_program_in_the_untimed_dialect(self):
        assert main(["run", "corpus:booking.hvk", "--mode", "hvk"]) == EXIT_ERROR

    def test_units_must_be_positive(self):
        assert main(["run", "corpus:atm.hvk", "--units", "0"]) == EXIT_ERROR

    def test_agreement_is_success(self):
        assert main(["correspond", "corpus:chain.hvk", "--units", "4"]) == EXIT_OK


class TestRunConfig:
    def test_unknown_mode(self):
        with pytest.raises(UsageError):
            RunConfig("x", mode="fast")

    def test_budget_must_be_positive(self):
        with pytest.raises(UsageError):
            RunConfig("x", budget=0)


class TestCommands:
    def test_corpus_listing(self, capsys):
        assert main(["corpus"]) == EXIT_OK
        listed = capsys.readouterr().out.split()
        assert listed == corpus_entries()
        assert "atm.hvk" in listed and "micro/link.hvk" in listed

    def test_encode(self, capsys):
        assert main(["encode", "corpus:micro/com.hvk"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("ptell(out(k, 5))")

    def test_encode_then_run_to_a_file(self, tmp_path):
        out = tmp_path / "trace.jsonl"
        assert main(["run", "corpus:atm.hvk", "--mode", "encode-then-run", "--units", "20",
                     "--out", str(out)]) == EXIT_OK
        trace = parse_trace(out.read_text(encoding="utf-8"))
        assert len(trace) == 20
        assert any("out(k_bank, 0)" in r["atoms"] for r in records(out.read_text(encoding="utf-8")))

    def test_utcc_with_inputs(self, tmp_path, capsys):
        src = write(tmp_path, "p.utcc", "!(when a do tell(b))")
        inputs = write(tmp_path, "in.txt", "\na\n")
        assert main(["run", src, "--units", "2", "--inputs", inputs]) == EXIT_OK
        units = records(capsys.readouterr().out)
        assert units[0]["atoms"] == [] and units[1]["atoms"] == ["a", "b"]

    def test_budget_from_the_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SESSCC_BUDGET", "200")
        src = write(tmp_path, "loop.utcc", "tell(c(0)) || !(abs x; c(x)) tell(c((x, 1)))")
        assert main(["run", src, "--units", "1"]) == EXIT_NON_QUIESCENT

    def test_stdin_source(self, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO("tell(a)"))
        assert main(["run", "-", "--mode", "utcc", "--units", "1"]) == EXIT_OK
        assert records(capsys.readouterr().out)[0]["atoms"] == ["a"]

    def test_correspond_output(self, capsys):
        assert main(["correspond", "corpus:micro/link.hvk", "--units", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[-1] == "full agreement over 3 units"

    def test_verify_a_saved_trace(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        main(["run", "corpus:atm.hvk", "--mode", "encode-then-run", "--units", "20", "--out", str(trace)])
        templates = write(tmp_path, "t.templates.jsonl", json.dumps(
            {"name": "overdraft", "kind": "exists", "parameters": {"constraint": "out(k_bank, 0)"}}) + "\n")
        assert main(["verify", str(trace), "--templates", templates]) == EXIT_OK
        verdict = records(capsys.readouterr().out)[0]
        assert verdict["template"] == "overdraft" and verdict["verdict"] == "holds"

    def test_verify_with_no_templates(self, tmp_path, capsys):
        empty = write(tmp_path, "none.jsonl", "")
        assert main(["verify", "corpus:atm.hvk", "--templates", empty]) == EXIT_OK
        assert capsys.readouterr().out.strip() == ""

    def test_broker_templates(self, capsys):
        assert main(["verify", "corpus:broker.hvk", "--templates", "corpus:broker.templates.jsonl",
                     "--units", "30"]) == EXIT_OK
        assert all(v["verdict"].startswith("holds") for v in records(capsys.readouterr().out))

"""Command-line front end: ``sesscc run | encode | correspond | verify``.

Exit codes::

    0  success
    1  any other error (bad arguments, unreadable file, divergence report)
    2  parse error
    3  a time unit did not reach quiescence within the step budget
    4  ambiguous redex pairing in a program required to be deterministic
    5  stuck: no round of the run fired anything
    6  malformed template file

Sources may name a shipped example as ``corpus:atm.hvk``.
"""

from __future__ import annotations

import argparse
import io
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Sequence, TextIO

from .correspond import correspond
from .encoder import EncodingContext, encode_program
from .fltl.checking import MalformedTemplate, format_verdict, read_templates, verify
from .hvk import NonDeterminismError, is_timed, lint, parse_hvk
from .hvk.semantics import outermost_run, write_rounds
from .kernel.constraints import TRUE, Constraint
from .syntax import ParseError
from .utcc import Engine, NonQuiescence, format_process, parse_utcc, parse_utcc_constraint
from .utcc.trace import Trace, parse_trace, write_trace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_NON_QUIESCENT = 3
EXIT_NON_DETERMINISTIC = 4
EXIT_STUCK = 5
EXIT_TEMPLATE = 6

MODES = ("hvk", "hvk+", "utcc", "encode-then-run")
CORPUS_PREFIX = "corpus:"


class UsageError(Exception):
    """A configuration that cannot be run; reported with exit code 1."""


class Stuck(Exception):
    """No round of an HVK run fired anything."""


@dataclass
class RunConfig:
    source: str
    mode: Optional[str] = None
    units: int = 10
    budget: Optional[int] = None
    inputs: list[Constraint] = field(default_factory=list)
    out: Optional[str] = None
    eager: bool = False
    force: bool = False
    counting: bool = False

    def __post_init__(self) -> None:
        if self.units < 1:
            raise UsageError("--units must be positive")
        if self.budget is not None and self.budget < 1:
            raise UsageError("--budget must be positive")
        if self.mode is not None and self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode}")


def read_source(name: str) -> str:
    if name.startswith(CORPUS_PREFIX):
        path = resources.files("sesscc.corpus").joinpath(*name[len(CORPUS_PREFIX):].split("/"))
        if not path.is_file():
            raise UsageError(f"no corpus entry {name}")
        return path.read_text(encoding="utf-8")
    if name == "-":
        return sys.stdin.read()
    try:
        return Path(name).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {name}: {exc.strerror}") from exc


def corpus_entries() -> list[str]:
    root = resources.files("sesscc.corpus")
    names = []
    for item in root.iterdir():
        if item.is_dir():
            names.extend(f"{item.name}/{sub.name}" for sub in item.iterdir() if sub.name.endswith(".hvk"))
        elif item.name.endswith(".hvk"):
            names.append(item.name)
    return sorted(names)


def read_inputs(path: Optional[str]) -> list[Constraint]:
    """One utcc constraint per line; a blank line stands for ``true``."""
    if path is None:
        return []
    return [parse_utcc_constraint(line) if line.strip() else TRUE
            for line in read_source(path).splitlines()]


def resolve_mode(cfg: RunConfig, text: str) -> str:
    if cfg.mode is not None:
        return cfg.mode
    if cfg.source.endswith(".utcc"):
        return "utcc"
    return "hvk+" if is_timed(parse_hvk(text)) else "hvk"


def _check_dialect(mode: str, p) -> None:
    if mode == "hvk" and is_timed(p):
        raise UsageError("the program uses timed constructs; run it with --mode hvk+")


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8") as fh:
        yield fh


def _engine(cfg: RunConfig) -> Engine:
    return Engine(cfg.budget, cfg.eager)


def program_trace(cfg: RunConfig, text: str, mode: str) -> Trace:
    """Run a utcc program, or an encoded HVK program, for ``cfg.units`` units."""
    if mode == "utcc":
        process = parse_utcc(text)
    else:
        hvk = parse_hvk(text)
        process = encode_program(hvk, counting=cfg.counting)
    return _engine(cfg).run(process, cfg.units, cfg.inputs)


# ------------------------------------------------------------- subcommands


def cmd_run(cfg: RunConfig, out: TextIO) -> int:
    text = read_source(cfg.source)
    mode = resolve_mode(cfg, text)
    if mode in ("hvk", "hvk+"):
        p = parse_hvk(text)
        _check_dialect(mode, p)
        for warning in lint(p):
            print(f"warning: {warning}", file=sys.stderr)
        rounds = outermost_run(p, cfg.units, cfg.force)
        write_rounds(rounds, out)
        if not any(r.fired for r in rounds):
            raise Stuck("no rule applies to the program")
        return EXIT_OK
    write_trace(program_trace(cfg, text, mode), out)
    return EXIT_OK


def cmd_encode(cfg: RunConfig, out: TextIO) -> int:
    p = parse_hvk(read_source(cfg.source))
    if cfg.mode is not None:
        _check_dialect(cfg.mode, p)
    out.write(format_process(encode_program(p, counting=cfg.counting)) + "\n")
    return EXIT_OK


def cmd_correspond(cfg: RunConfig, out: TextIO) -> int:
    p = parse_hvk(read_source(cfg.source))
    if cfg.mode is not None:
        _check_dialect(cfg.mode, p)
    report = correspond(p, cfg.units, EncodingContext(timed=is_timed(p), counting=cfg.counting),
                        cfg.budget)
    out.write("\n".join(report.lines()) + "\n")
    return EXIT_OK if report.agree else EXIT_ERROR


def cmd_verify(cfg: RunConfig, templates: str, out: TextIO) -> int:
    items = read_templates(read_source(templates).splitlines())
    text = read_source(cfg.source)
    if cfg.source.endswith(".jsonl"):
        trace = parse_trace(text)
    else:
        mode = resolve_mode(cfg, text)
        if mode in ("hvk", "hvk+"):
            mode = "encode-then-run"
        trace = program_trace(cfg, text, mode)
    for v in verify(trace, items):
        out.write(format_verdict(v) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sesscc",
        description="Run session programs and their utcc encoding, compare them, check properties.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("source", help="program file, trace file (verify), '-' or corpus:NAME")
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--units", type=int, default=10, help="time units / rounds (default 10)")
        p.add_argument("--budget", type=int,
                       help="internal steps per time unit (default: $SESSCC_BUDGET or 10000)")
        p.add_argument("--inputs", help="file with one input constraint per unit")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--force-pairing", action="store_true",
                       help="resolve ambiguous pairings by lowest thread index")
        p.add_argument("--count-acceptances", action="store_true",
                       help="also emit accepted(a, k) atoms when sessions are accepted")
        p.add_argument("--eager-expand", action="store_true",
                       help="expand derived utcc constructs before running")

    common(sub.add_parser("run", help="run a program and write its trace"))
    common(sub.add_parser("encode", help="print the utcc encoding of an HVK program"))
    common(sub.add_parser("correspond", help="compare HVK rounds with encoded time units"))
    verify_cmd = sub.add_parser("verify", help="check temporal templates on a trace")
    common(verify_cmd)
    verify_cmd.add_argument("--templates", required=True, help="JSON-lines template file")
    sub.add_parser("corpus", help="list the shipped example programs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "corpus":
        print("\n".join(corpus_entries()))
        return EXIT_OK
    try:
        cfg = RunConfig(args.source, args.mode, args.units, args.budget,
                        read_inputs(args.inputs), args.out, args.eager_expand,
                        args.force_pairing, args.count_acceptances)
        buffer = io.StringIO()
        match args.command:
            case "run":
                status = cmd_run(cfg, buffer)
            case "encode":
                status = cmd_encode(cfg, buffer)
            case "correspond":
                status = cmd_correspond(cfg, buffer)
            case "verify":
                status = cmd_verify(cfg, args.templates, buffer)
        with _output(cfg.out) as out:
            out.write(buffer.getvalue())
        return status
    except ParseError as exc:
        return _fail(EXIT_PARSE, f"parse error: {exc}")
    except NonQuiescence as exc:
        return _fail(EXIT_NON_QUIESCENT, str(exc))
    except NonDeterminismError as exc:
        return _fail(EXIT_NON_DETERMINISTIC, str(exc))
    except Stuck as exc:
        return _fail(EXIT_STUCK, f"stuck: {exc}")
    except MalformedTemplate as exc:
        return _fail(EXIT_TEMPLATE, f"malformed template: {exc}")
    except (UsageError, OSError, ValueError, TypeError, NameError, RecursionError) as exc:
        return _fail(EXIT_ERROR, f"error: {exc}")


def _fail(code: int, message: str) -> int:
    print(f"sesscc: {message}", file=sys.stderr)
    return code


__all__ = ["RunConfig", "build_parser", "cmd_correspond", "cmd_encode", "cmd_run", "cmd_verify",
           "main"]

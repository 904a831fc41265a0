"""legalc command line: typecheck, interpret, transpile, emit, selftest."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from . import __version__
from .errors import StructuredError, UsageError, print_error
from .harness import run_selftest
from .pipeline import (
    EMIT_STAGES,
    emit_stage,
    interpret,
    load_file,
    make_trace_collector,
)

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    scope: str | None = None
    binds: dict[str, str] = field(default_factory=dict)
    stage: str | None = None
    out: str | None = None
    emit: str | None = None
    n: int = 10000
    seed: int = 0
    trace: bool = False


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="legalc", description=__doc__)
    p.add_argument("--version", action="version", version="legalc %s" % __version__)
    sub = p.add_subparsers(dest="command", required=True)

    tc = sub.add_parser("typecheck", help="parse and type-check a program")
    tc.add_argument("input")

    it = sub.add_parser("interpret", help="run one scope and print its variables")
    it.add_argument("input")
    it.add_argument("--scope", required=True)
    it.add_argument("--bind", action="append", default=[], metavar="VAR=LITERAL")
    it.add_argument("--trace", action="store_true")

    tr = sub.add_parser("transpile", help="generate a standalone Python module")
    tr.add_argument("input")
    tr.add_argument("--out", required=True)
    tr.add_argument("--emit", choices=["symbol-map"], default=None)

    em = sub.add_parser("emit", help="dump an intermediate representation")
    em.add_argument("input")
    em.add_argument("--stage", choices=list(EMIT_STAGES), required=True)

    st = sub.add_parser("selftest", help="differential translation self-test")
    st.add_argument("--n", type=int, default=10000)
    st.add_argument("--seed", type=int, default=0)
    return p


def config_from_args(argv: list[str]) -> RunConfig:
    ns = _parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    for attr in ("input", "scope", "stage", "out", "emit", "n", "seed", "trace"):
        if hasattr(ns, attr):
            setattr(cfg, attr, getattr(ns, attr))
    if getattr(ns, "bind", None):
        for item in ns.bind:
            if "=" not in item:
                raise UsageError("--bind expects VAR=LITERAL, got %r" % item)
            key, _, value = item.partition("=")
            key = key.strip()
            if key.startswith(cfg.scope + "."):
                key = key[len(cfg.scope) + 1:]
            cfg.binds[key] = value.strip()
    return cfg


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    sys.setrecursionlimit(100_000)
    try:
        if cfg.command == "typecheck":
            pipe = load_file(cfg.input)
            from .scope_to_dcalc import typecheck_program

            typecheck_program(pipe.compiled)
            print("%s: ok (%d scopes)" % (cfg.input, len(pipe.compiled.order)), file=stdout)
            return EXIT_OK
        if cfg.command == "interpret":
            pipe = load_file(cfg.input)
            trace_lines = None
            hook = None
            if cfg.trace:
                trace_lines, hook = make_trace_collector(pipe.doc)
            try:
                result = interpret(pipe, cfg.scope, cfg.binds, trace=hook)
            finally:
                # On an abort the trace still prints, ending at the failure.
                if trace_lines is not None:
                    for line in trace_lines:
                        print(line, file=stderr)
            for line in result.lines():
                print(line, file=stdout)
            return EXIT_OK
        if cfg.command == "transpile":
            from .emit_python import emit

            pipe = load_file(cfg.input)
            from .scope_to_dcalc import typecheck_program

            typecheck_program(pipe.compiled)
            unit = emit(pipe.compiled)
            with open(cfg.out, "w", encoding="utf-8") as f:
                f.write(unit.text)
            if cfg.emit == "symbol-map":
                side = cfg.out + ".symbols.json"
                with open(side, "w", encoding="utf-8") as f:
                    f.write(unit.symbol_map_json())
            return EXIT_OK
        if cfg.command == "emit":
            pipe = load_file(cfg.input)
            stdout.write(emit_stage(pipe, cfg.stage))
            return EXIT_OK
        if cfg.command == "selftest":
            def progress(done, total):
                print("  %d/%d checked" % (done, total), file=stderr)

            report = run_selftest(cfg.n, cfg.seed, progress=progress)
            print("%d/%d agree" % (report.agreed, report.total), file=stdout)
            print(
                "%d/%d preserve typing" % (report.type_preserved, report.total),
                file=stdout,
            )
            if not report.ok:
                for failure in report.failures[:10]:
                    print(failure, file=stderr)
                return EXIT_SEMANTIC
            return EXIT_OK
        raise UsageError("unknown command %s" % cfg.command)
    except UsageError as err:
        print_error(err, stderr)
        return EXIT_USAGE
    except FileNotFoundError as err:
        print("[ERROR] cannot read %s" % err.filename, file=stderr)
        return EXIT_USAGE
    except StructuredError as err:
        print_error(err, stderr)
        return EXIT_SEMANTIC


def main(argv: list[str] | None = None) -> None:
    argv = argv if argv is not None else sys.argv[1:]
    try:
        cfg = config_from_args(argv)
    except UsageError as err:
        print_error(err, sys.stderr)
        sys.exit(EXIT_USAGE)
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()

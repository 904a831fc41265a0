"""End-to-end pipeline: literate file -> surface -> desugared -> scope
language -> default calculus -> lambda calculus, plus the interpreter
entry used by the command line."""

from __future__ import annotations

from dataclasses import dataclass

from . import dcalc as D
from . import scopelang as SL
from . import surface as S
from . import types as ty
from .desugar import desugar_scope, dump_labeled
from .errors import SourcePosition, StructuredError, UsageError
from .interp import ConflictEval, EmptyEval, deval, render_value
from .lexer import T, _tokenize_line
from .literate import LiterateDocument, extract_blocks
from .parser import parse
from .printer import pd, pl
from .scope_to_dcalc import CompiledProgram, compile_program, typecheck_program
from .translate import translate_program
from .types import SymbolTable


@dataclass
class Pipeline:
    file: str
    text: str
    doc: LiterateDocument
    program: S.SurfaceProgram
    table: SymbolTable
    scopes: list[SL.ScopeDecl]
    compiled: CompiledProgram


def load_text(text: str, file: str = "<input>") -> Pipeline:
    doc = extract_blocks(text, file)
    program = parse(doc)
    table = SymbolTable(program)
    scopes = SL.linearize_program(table, program)
    compiled = compile_program(table, scopes)
    return Pipeline(file, text, doc, program, table, scopes, compiled)


def load_file(path: str) -> Pipeline:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return load_text(text, path)


# ----------------------------------------------------------------- binds


def parse_literal(text: str) -> D.DLit:
    """Parse one surface literal (the --bind value syntax)."""
    try:
        tokens = _tokenize_line(text.strip(), 1, "<bind>")
    except StructuredError:
        raise UsageError("cannot parse literal %r" % text)
    if len(tokens) == 1:
        tok = tokens[0]
        if tok.kind is T.INT:
            return D.DLit("int", tok.value)
        if tok.kind is T.MONEY:
            return D.DLit("money", tok.value)
        if tok.kind is T.DATE:
            import datetime

            y, m, d = tok.value
            try:
                return D.DLit("date", datetime.date(y, m, d))
            except ValueError:
                raise UsageError("invalid date %r" % text)
        if tok.is_kw("true"):
            return D.dbool(True)
        if tok.is_kw("false"):
            return D.dbool(False)
    if len(tokens) == 2 and tokens[0].kind is T.INT and tokens[1].is_kw("day"):
        return D.DLit("duration", tokens[0].value)
    raise UsageError("cannot parse literal %r (expected bool, integer, money, date or duration)" % text)


_LIT_TO_TYPE = {
    "bool": ty.BOOL,
    "int": ty.INT,
    "money": ty.MONEY,
    "date": ty.DATE,
    "duration": ty.DURATION,
}


@dataclass
class ScopeResult:
    scope: str
    values: list[tuple[str, object]]

    def lines(self) -> list[str]:
        return ["%s.%s = %s" % (self.scope, n, render_value(v)) for n, v in self.values]


def interpret(pipe: Pipeline, scope: str, binds: dict[str, str] | None = None,
              trace=None) -> ScopeResult:
    """Run one scope with the given literal overrides.

    Unbound variables become never-defined thunks; the scope's own
    definitions still win over those (their empty is contained by the
    per-definition override slot).
    """
    if scope not in pipe.compiled.scopes:
        raise UsageError("no scope named %s in %s" % (scope, pipe.file))
    typecheck_program(pipe.compiled)
    locals_ = pipe.compiled.scope_locals(scope)
    decl = pipe.compiled.scopes[scope].decl
    binds = dict(binds or {})
    thunks = []
    for name, vt in locals_:
        u = D.fresh_id()
        if name in binds:
            lit = parse_literal(binds.pop(name))
            lit_ty = _LIT_TO_TYPE[lit.tag]
            if not ty.compatible(lit_ty, vt):
                raise UsageError(
                    "binding %s=%s has type %r but the variable has type %r"
                    % (name, lit.value, lit_ty, vt)
                )
            thunks.append(D.DLam(u, "_", ty.UNIT, lit))
        else:
            hint = "variable %s.%s was never defined" % (scope, name)
            thunks.append(D.DLam(u, "_", ty.UNIT, D.DEmpty(hint=hint)))
    if binds:
        raise UsageError(
            "unknown variable%s in --bind: %s"
            % ("s" if len(binds) > 1 else "", ", ".join(sorted(binds)))
        )
    call = D.DApp(D.DTop(scope), D.DTupleT(tuple(thunks)))
    try:
        out = deval(call, tops=pipe.compiled.tops, trace=trace)
    except EmptyEval as exc:
        from .errors import NeverDefinedError

        positions = [(None, exc.pos)] if exc.pos else []
        raise NeverDefinedError(exc.hint or "no applicable definition", positions)
    except ConflictEval as exc:
        from .errors import ConflictError

        positions: list = [("This definition applies:", p) for p in exc.positions]
        if not positions and exc.pos:
            positions = [(None, exc.pos)]
        raise ConflictError(
            "multiple definitions apply at the same time", positions
        )
    return ScopeResult(scope, list(zip([n for n, _ in locals_], out)))


def make_trace_collector(doc: LiterateDocument):
    lines: list[str] = []

    def hook(origin: D.DefaultOrigin, branch: str, pos: SourcePosition | None):
        where = str(pos) if pos else "<none>"
        line = "[TRACE] %s.%s: %s @ %s" % (origin.scope, origin.var, branch, where)
        if pos is not None:
            crumb = doc.breadcrumb(pos.start_line)
            if crumb:
                line += " | " + crumb
        lines.append(line)

    return lines, hook


# ------------------------------------------------------------ emit stages

EMIT_STAGES = ("desugared", "scopelang", "dcalc", "lcalc")


def emit_stage(pipe: Pipeline, stage: str) -> str:
    if stage == "desugared":
        chunks = []
        for name in pipe.program.scope_decls:
            labeled, _ = desugar_scope(name, pipe.program.uses_of(name))
            if labeled:
                chunks.append(dump_labeled(labeled))
        return "\n".join(chunks) + "\n"
    if stage == "scopelang":
        return "\n\n".join(SL.dump_scope(sc) for sc in pipe.scopes) + "\n"
    if stage == "dcalc":
        return "\n".join(
            "let %s = %s" % (name, pd(pipe.compiled.tops[name]))
            for name in pipe.compiled.order
        ) + "\n"
    if stage == "lcalc":
        ltops = translate_program(pipe.compiled.tops)
        return "\n".join(
            "let %s = %s" % (name, pl(ltops[name])) for name in pipe.compiled.order
        ) + "\n"
    raise UsageError("unknown emit stage %s" % stage)

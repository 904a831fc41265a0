"""Transpile the lambda-calculus program to a standalone Python module.

One function per scope (tuple of thunks in, tuple of forced values out),
structures as generated dataclasses, the two error terms as the runtime's
exception classes, and a __main__ dispatcher so scenario scopes can be run
directly and diffed against the interpreter.
"""

from __future__ import annotations

import json
import keyword
import unicodedata
from dataclasses import dataclass, field

from . import lcalc as L
from . import types as ty
from .errors import UnsupportedConstruct
from .scope_to_dcalc import CompiledProgram
from .translate import translate_program
from . import __version__

_RESERVED = set(keyword.kwlist) | {"rt", "sys", "dataclass", "overrides", "main"}


def transliterate(name: str) -> str:
    """Deterministic ASCII identifier for a source name."""
    norm = unicodedata.normalize("NFKD", name)
    out = []
    for ch in norm:
        if unicodedata.combining(ch):
            continue
        if ch.isascii() and (ch.isalnum() or ch == "_"):
            out.append(ch)
        else:
            out.append("_")
    ident = "".join(out) or "_"
    if ident[0].isdigit():
        ident = "_" + ident
    return ident


class _Names:
    """Injective, deterministic mapping from source names to identifiers."""

    def __init__(self):
        self.taken: set[str] = set(_RESERVED)
        self.map: dict[str, str] = {}

    def assign(self, source: str, style: str = "plain") -> str:
        if source in self.map:
            return self.map[source]
        base = transliterate(source)
        if style == "snake":
            base = _snake(base)
        ident = base
        n = 1
        while ident in self.taken:
            n += 1
            ident = "%s_%d" % (base, n)
        self.taken.add(ident)
        self.map[source] = ident
        return ident


def _snake(name: str) -> str:
    out = []
    for i, ch in enumerate(name):
        if ch.isupper():
            if i > 0 and (name[i - 1].islower() or (i + 1 < len(name) and name[i + 1].islower())):
                out.append("_")
            out.append(ch.lower())
        else:
            out.append(ch)
    return "".join(out).strip("_") or "_"


@dataclass
class EmitUnit:
    module_name: str
    source_file: str
    scope_functions: dict[str, str]  # source scope name -> emitted identifier
    symbol_map: dict[str, str]
    text: str

    def symbol_map_json(self) -> str:
        return json.dumps(self.symbol_map, indent=2, sort_keys=True) + "\n"


class _Fn:
    """Emission context for one Python function body."""

    def __init__(self, emitter: "_Emitter"):
        self.emitter = emitter
        self.tmp = 0
        self.locals: dict[int, str] = {}
        self.taken: set[str] = set(_RESERVED)

    def local(self, var_id: int, name: str) -> str:
        if var_id in self.locals:
            return self.locals[var_id]
        base = transliterate(name).replace(".", "_")
        ident = base
        n = 1
        while ident in self.taken:
            n += 1
            ident = "%s_%d" % (base, n)
        self.taken.add(ident)
        self.locals[var_id] = ident
        return ident

    def temp(self, stem: str = "tmp") -> str:
        self.tmp += 1
        return "_%s_%d" % (stem, self.tmp)


class _Emitter:
    def __init__(self, compiled: CompiledProgram):
        self.compiled = compiled
        self.names = _Names()
        self.struct_names: dict[str, str] = {}

    # ------------------------------------------------------------ program

    def emit(self, module_name: str) -> EmitUnit:
        compiled = self.compiled
        ltops = translate_program(compiled.tops)
        scope_idents = {
            name: self.names.assign(name, "snake") for name in compiled.order
        }
        for struct in compiled.table.structs:
            self.struct_names[struct] = self.names.assign(struct)

        lines: list[str] = []
        lines.append("# Generated by legalc %s from %s." % (__version__, compiled.table.program.file))
        lines.append("# Scopes: %s." % ", ".join(compiled.order))
        lines.append("# Do not edit; regenerate with: legalc transpile %s" % compiled.table.program.file)
        lines.append("")
        lines.append("import sys")
        lines.append("from dataclasses import dataclass")
        lines.append("")
        lines.append("import legalc_runtime as rt")
        lines.append("")
        for struct, fields_ in self.compiled.table.structs.items():
            lines.append("")
            lines.append("@dataclass(frozen=True)")
            lines.append("class %s:" % self.struct_names[struct])
            for fname, _ in fields_:
                lines.append("    %s: object" % transliterate(fname))
            lines.append("")
        for name in compiled.order:
            lines.append("")
            lines.extend(self._scope_function(scope_idents[name], name, ltops[name]))
            lines.append("")
        lines.extend(self._main_block(scope_idents))
        text = "\n".join(lines).rstrip("\n") + "\n"
        symbol_map = dict(self.names.map)
        return EmitUnit(module_name, compiled.table.program.file, scope_idents, symbol_map, text)

    def _scope_function(self, ident: str, scope: str, term: L.LTerm) -> list[str]:
        assert isinstance(term, L.LLam)
        fn = _Fn(self)
        param = fn.local(term.var_id, "overrides")
        stmts, expr = self._expr(term.body, fn)
        out = ["def %s(%s):" % (ident, param)]
        doc = '    """Scope %s: %s -> tuple of its %d variables."""' % (
            scope, "tuple of thunk overrides", len(self.compiled.scope_locals(scope))
        )
        out.append(doc)
        for s in stmts:
            out.append("    " + s)
        out.append("    return %s" % expr)
        return out

    def _main_block(self, scope_idents: dict[str, str]) -> list[str]:
        lines = ["", 'if __name__ == "__main__":', "    sys.exit(rt.main(sys.argv, {"]
        for name, ident in scope_idents.items():
            var_names = [v for v, _ in self.compiled.scope_locals(name)]
            lines.append('        "%s": (%s, %r),' % (name, ident, var_names))
        lines.append("    }))")
        return lines

    # -------------------------------------------------------- expressions

    def _expr(self, t: L.LTerm, fn: _Fn) -> tuple[list[str], str]:
        if isinstance(t, L.LVar):
            return [], fn.local(t.id, t.name)
        if isinstance(t, L.LTop):
            return [], self.names.assign(t.name, "snake")
        if isinstance(t, L.LLit):
            return [], self._literal(t)
        if isinstance(t, L.LRaise):
            call = self._raise_expr(t)
            return [], call
        if isinstance(t, L.LLam):
            return self._lambda(t, fn)
        if isinstance(t, L.LApp):
            if isinstance(t.fn, L.LProcExc):
                stmts, arg = self._expr(t.arg, fn)
                return stmts, "rt.process_exceptions(%s)" % arg
            stmts, f = self._expr(t.fn, fn)
            if isinstance(t.arg, L.LLit) and t.arg.tag == "unit":
                return stmts, "%s()" % f  # thunks are zero-argument closures
            s2, a = self._expr(t.arg, fn)
            return stmts + s2, "%s(%s)" % (f, a)
        if isinstance(t, L.LProcExc):
            return [], "rt.process_exceptions"
        if isinstance(t, L.LNone):
            return [], "None"
        if isinstance(t, L.LSome):
            return self._expr(t.value, fn)  # plain optional encoding
        if isinstance(t, L.LMatchOpt):
            stmts, scrut = self._expr(t.scrutinee, fn)
            res = fn.temp("opt")
            binder = fn.local(t.some_binder[0], t.some_binder[1])
            body: list[str] = ["%s = %s" % (res, scrut)]
            n_stmts, n_expr = self._expr(t.none_body, fn)
            s_stmts, s_expr = self._expr(t.some_body, fn)
            body.append("if %s is None:" % res)
            for s in n_stmts:
                body.append("    " + s)
            body.append("    %s = %s" % (res, n_expr))
            body.append("else:")
            body.append("    %s = %s" % (binder, res))
            for s in s_stmts:
                body.append("    " + s)
            body.append("    %s = %s" % (res, s_expr))
            return stmts + body, res
        if isinstance(t, L.LList):
            return self._seq(t.items, fn, "[%s]")
        if isinstance(t, L.LFold):
            s1, f = self._expr(t.fn, fn)
            s2, init = self._expr(t.init, fn)
            s3, coll = self._expr(t.coll, fn)
            return s1 + s2 + s3, "rt.fold_left(%s, %s, %s)" % (f, init, coll)
        if isinstance(t, L.LTry):
            stmts: list[str] = []
            res = fn.temp("caught")
            b_stmts, b_expr = self._expr(t.body, fn)
            h_stmts, h_expr = self._expr(t.handler, fn)
            exc = "rt.RuntimeEmpty" if t.eps == L.EMPTY else "rt.RuntimeConflict"
            stmts.append("try:")
            for s in b_stmts:
                stmts.append("    " + s)
            stmts.append("    %s = %s" % (res, b_expr))
            stmts.append("except %s:" % exc)
            for s in h_stmts:
                stmts.append("    " + s)
            stmts.append("    %s = %s" % (res, h_expr))
            return stmts, res
        if isinstance(t, L.LIf):
            s1, cond = self._expr(t.cond, fn)
            t_stmts, t_expr = self._expr(t.then, fn)
            e_stmts, e_expr = self._expr(t.orelse, fn)
            if not t_stmts and not e_stmts:
                return s1, "(%s if %s else %s)" % (t_expr, cond, e_expr)
            res = fn.temp("if")
            out = s1 + ["if %s:" % cond]
            out.extend("    " + s for s in t_stmts)
            out.append("    %s = %s" % (res, t_expr))
            out.append("else:")
            out.extend("    " + s for s in e_stmts)
            out.append("    %s = %s" % (res, e_expr))
            return out, res
        if isinstance(t, L.LLet):
            name = fn.local(t.var_id, t.var_name)
            stmts, bound = self._expr(t.bound, fn)
            stmts = stmts + ["%s = %s" % (name, bound)]
            b_stmts, b_expr = self._expr(t.body, fn)
            return stmts + b_stmts, b_expr
        if isinstance(t, L.LTuple):
            if len(t.items) == 1:
                stmts, one = self._seq(t.items, fn, "%s")
                return stmts, "(%s,)" % one
            return self._seq(t.items, fn, "(%s)")
        if isinstance(t, L.LProj):
            stmts, base = self._expr(t.tuple_, fn)
            return stmts, "%s[%d]" % (base, t.index)
        if isinstance(t, L.LStruct):
            stmts: list[str] = []
            args = []
            for name, v in t.fields:
                s, e = self._expr(v, fn)
                stmts.extend(s)
                args.append("%s=%s" % (transliterate(name), e))
            return stmts, "%s(%s)" % (self.struct_names[t.struct], ", ".join(args))
        if isinstance(t, L.LField):
            stmts, base = self._expr(t.base, fn)
            return stmts, "%s.%s" % (base, transliterate(t.field))
        if isinstance(t, L.LInject):
            if t.payload is None:
                return [], 'rt.EnumValue("%s", "%s")' % (t.enum, t.case)
            stmts, p = self._expr(t.payload, fn)
            return stmts, 'rt.EnumValue("%s", "%s", %s)' % (t.enum, t.case, p)
        if isinstance(t, L.LMatch):
            stmts, scrut = self._expr(t.scrutinee, fn)
            res = fn.temp("match")
            sv = fn.temp("scrut")
            out = stmts + ["%s = %s" % (sv, scrut)]
            first = True
            for case, binder, body in t.arms:
                cond = '%s.case == "%s"' % (sv, case)
                out.append("%s %s:" % ("if" if first else "elif", cond))
                first = False
                if binder is not None:
                    out.append("    %s = %s.payload" % (fn.local(binder[0], binder[1]), sv))
                b_stmts, b_expr = self._expr(body, fn)
                out.extend("    " + s for s in b_stmts)
                out.append("    %s = %s" % (res, b_expr))
            out.append("else:")
            out.append('    raise AssertionError("unreachable case " + %s.case)' % sv)
            return out, res
        if isinstance(t, L.LBinOp):
            s1, a = self._expr(t.left, fn)
            s2, b = self._expr(t.right, fn)
            return s1 + s2, self._binop(t.op, a, b)
        if isinstance(t, L.LNot):
            stmts, a = self._expr(t.operand, fn)
            return stmts, "(not %s)" % a
        raise UnsupportedConstruct("cannot emit %s" % type(t).__name__)

    def _seq(self, items, fn: _Fn, shape: str) -> tuple[list[str], str]:
        stmts: list[str] = []
        parts = []
        for i in items:
            s, e = self._expr(i, fn)
            stmts.extend(s)
            parts.append(e)
        return stmts, shape % ", ".join(parts)

    def _lambda(self, t: L.LLam, fn: _Fn) -> tuple[list[str], str]:
        zero_arg = isinstance(t.var_ty, ty.TBase) and t.var_ty.name == "unit"
        param = None if zero_arg else fn.local(t.var_id, t.var_name)
        b_stmts, b_expr = self._expr(t.body, fn)
        if not b_stmts:
            if zero_arg:
                return [], "(lambda: %s)" % b_expr
            return [], "(lambda %s: %s)" % (param, b_expr)
        name = fn.temp("fn")
        head = "def %s(%s):" % (name, "" if zero_arg else param)
        stmts = [head]
        if zero_arg and t.var_id in fn.locals:
            stmts.append("    %s = rt.UNIT" % fn.locals[t.var_id])
        stmts.extend("    " + s for s in b_stmts)
        stmts.append("    return %s" % b_expr)
        return stmts, name

    def _literal(self, t: L.LLit) -> str:
        if t.tag == "unit":
            return "rt.UNIT"
        if t.tag == "bool":
            return "True" if t.value else "False"
        if t.tag == "int":
            return str(t.value)
        if t.tag == "money":
            return "rt.Money(%d)" % t.value
        if t.tag == "duration":
            return "rt.Duration(%d)" % t.value
        assert t.tag == "date"
        return "rt.date(%d, %d, %d)" % (t.value.year, t.value.month, t.value.day)

    def _raise_expr(self, t: L.LRaise) -> str:
        if t.eps == L.EMPTY:
            if t.hint:
                return "rt.raise_empty(%r)" % t.hint
            return "rt.raise_empty()"
        return "rt.raise_conflict(%r)" % (_positions_str(t.positions) or None)

    def _binop(self, op: str, a: str, b: str) -> str:
        if op == "and":
            return "rt.logic_and(%s, %s)" % (a, b)
        if op == "or":
            return "rt.logic_or(%s, %s)" % (a, b)
        if op == "=":
            return "(%s == %s)" % (a, b)
        if op == "+@":
            return "rt.date_add(%s, %s)" % (a, b)
        if op == "-@":
            return "rt.date_diff(%s, %s)" % (a, b)
        if op == "/":
            return "rt.int_div(%s, %s)" % (a, b)
        if op == "/$":
            return "rt.money_div(%s, %s)" % (a, b)
        base = op.rstrip("$@^")
        return "(%s %s %s)" % (a, base, b)


def _positions_str(positions) -> str:
    return "; ".join(str(p) for p in positions) if positions else ""


def emit(compiled: CompiledProgram, module_name: str = "generated") -> EmitUnit:
    return _Emitter(compiled).emit(module_name)

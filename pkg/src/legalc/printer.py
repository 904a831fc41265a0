"""Stable textual printers for both calculi (--emit dcalc/lcalc, harness
counterexamples). Defaults print as `<e1, e2 | just :- cons>`."""

from __future__ import annotations

import datetime

from . import dcalc as D
from . import lcalc as L
from .interp import render_money


def _lit(tag: str, value) -> str:
    if tag == "unit":
        return "()"
    if tag == "bool":
        return "true" if value else "false"
    if tag == "money":
        return render_money(value)
    if tag == "duration":
        return "%d day" % value
    if tag == "date":
        assert isinstance(value, datetime.date)
        return "|%04d-%02d-%02d|" % (value.year, value.month, value.day)
    return str(value)


def pd(t: D.DTerm) -> str:
    if isinstance(t, D.DVar):
        return "%s_%d" % (t.name, t.id)
    if isinstance(t, D.DTop):
        return t.name
    if isinstance(t, D.DLit):
        return _lit(t.tag, t.value)
    if isinstance(t, D.DEmpty):
        return "EMPTY"
    if isinstance(t, D.DConflict):
        return "CONFLICT"
    if isinstance(t, D.DLam):
        return "\\(%s_%d: %r). %s" % (t.var_name, t.var_id, t.var_ty, pd(t.body))
    if isinstance(t, D.DApp):
        return "(%s %s)" % (pd(t.fn), pd(t.arg))
    if isinstance(t, D.DDefault):
        return "<%s | %s :- %s>" % (
            ", ".join(pd(e) for e in t.excs), pd(t.just), pd(t.cons)
        )
    if isinstance(t, D.DIf):
        return "(if %s then %s else %s)" % (pd(t.cond), pd(t.then), pd(t.orelse))
    if isinstance(t, D.DLet):
        return "(let %s_%d = %s in %s)" % (t.var_name, t.var_id, pd(t.bound), pd(t.body))
    if isinstance(t, D.DTupleT):
        return "(%s)" % ", ".join(pd(i) for i in t.items)
    if isinstance(t, D.DProj):
        return "%s.#%d" % (pd(t.tuple_), t.index)
    if isinstance(t, D.DStructT):
        return "%s{%s}" % (t.struct, ", ".join("%s = %s" % (n, pd(v)) for n, v in t.fields))
    if isinstance(t, D.DFieldT):
        return "%s.%s" % (pd(t.base), t.field)
    if isinstance(t, D.DInject):
        if t.payload is None:
            return t.case
        return "%s(%s)" % (t.case, pd(t.payload))
    if isinstance(t, D.DMatch):
        arms = " ".join(
            "| %s%s -> %s" % (c, " %s_%d" % (b[1], b[0]) if b else "", pd(e))
            for c, b, e in t.arms
        )
        return "(match %s with %s)" % (pd(t.scrutinee), arms)
    if isinstance(t, D.DColl):
        return "[%s]" % "; ".join(pd(i) for i in t.items)
    if isinstance(t, D.DFold):
        return "(fold %s %s %s)" % (pd(t.fn), pd(t.init), pd(t.coll))
    if isinstance(t, D.DBinOp):
        return "(%s %s %s)" % (pd(t.left), t.op, pd(t.right))
    if isinstance(t, D.DNot):
        return "(not %s)" % pd(t.operand)
    raise AssertionError(type(t))


def pl(t: L.LTerm) -> str:
    if isinstance(t, L.LVar):
        return "%s_%d" % (t.name, t.id)
    if isinstance(t, L.LTop):
        return t.name
    if isinstance(t, L.LLit):
        return _lit(t.tag, t.value)
    if isinstance(t, L.LRaise):
        return "raise %s" % ("EMPTY" if t.eps == L.EMPTY else "CONFLICT")
    if isinstance(t, L.LTry):
        return "(try %s with %s -> %s)" % (
            pl(t.body), "EMPTY" if t.eps == L.EMPTY else "CONFLICT", pl(t.handler)
        )
    if isinstance(t, L.LProcExc):
        return "process_exceptions"
    if isinstance(t, L.LLam):
        return "\\(%s_%d: %r). %s" % (t.var_name, t.var_id, t.var_ty, pl(t.body))
    if isinstance(t, L.LApp):
        return "(%s %s)" % (pl(t.fn), pl(t.arg))
    if isinstance(t, L.LNone):
        return "None"
    if isinstance(t, L.LSome):
        return "Some %s" % pl(t.value)
    if isinstance(t, L.LMatchOpt):
        return "(match %s with None -> %s | Some %s_%d -> %s)" % (
            pl(t.scrutinee), pl(t.none_body), t.some_binder[1], t.some_binder[0], pl(t.some_body)
        )
    if isinstance(t, L.LList):
        return "[%s]" % "; ".join(pl(i) for i in t.items)
    if isinstance(t, L.LFold):
        return "(fold_left %s %s %s)" % (pl(t.fn), pl(t.init), pl(t.coll))
    if isinstance(t, L.LIf):
        return "(if %s then %s else %s)" % (pl(t.cond), pl(t.then), pl(t.orelse))
    if isinstance(t, L.LLet):
        return "(let %s_%d = %s in %s)" % (t.var_name, t.var_id, pl(t.bound), pl(t.body))
    if isinstance(t, L.LTuple):
        return "(%s)" % ", ".join(pl(i) for i in t.items)
    if isinstance(t, L.LProj):
        return "%s.#%d" % (pl(t.tuple_), t.index)
    if isinstance(t, L.LStruct):
        return "%s{%s}" % (t.struct, ", ".join("%s = %s" % (n, pl(v)) for n, v in t.fields))
    if isinstance(t, L.LField):
        return "%s.%s" % (pl(t.base), t.field)
    if isinstance(t, L.LInject):
        if t.payload is None:
            return t.case
        return "%s(%s)" % (t.case, pl(t.payload))
    if isinstance(t, L.LMatch):
        arms = " ".join(
            "| %s%s -> %s" % (c, " %s_%d" % (b[1], b[0]) if b else "", pl(e))
            for c, b, e in t.arms
        )
        return "(match %s with %s)" % (pl(t.scrutinee), arms)
    if isinstance(t, L.LBinOp):
        return "(%s %s %s)" % (pl(t.left), t.op, pl(t.right))
    if isinstance(t, L.LNot):
        return "(not %s)" % pl(t.operand)
    raise AssertionError(type(t))

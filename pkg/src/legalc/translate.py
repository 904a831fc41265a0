"""Translation from the default calculus to the lambda calculus.

Pure fragments map to themselves; the two error terms become raises; a
default becomes a process_exceptions pass over its thunked exceptions,
falling back to `if justification then consequence else raise empty`.
The translation-correctness theorem is validated here in its executable
form: source and translated terms must evaluate to matching outcomes
(identical first-order values, or the matching raised error), and typing
must be preserved under the identity type translation. Only this
end-to-end corollary is checked; the per-step simulation with its
existential step counts is not observable in a big-step harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dcalc as D
from . import lcalc as L
from . import types as ty
from .errors import DivergedError
from .interp import VClosure, term_value


@dataclass
class TranslationOutput:
    term: L.LTerm
    default_map: list[tuple[D.DTerm, L.LTerm]] = field(default_factory=list)


def translate(t: D.DTerm) -> L.LTerm:
    return _translate(t, None)


def translate_with_map(t: D.DTerm) -> TranslationOutput:
    out = TranslationOutput(term=None)  # type: ignore[arg-type]
    out.term = _translate(t, out.default_map)
    return out


def _empty_raise(t: D.DDefault) -> L.LRaise:
    if t.origin is not None and t.origin.pos is not None:
        hint = "no definition applied for %s.%s" % (t.origin.scope, t.origin.var)
        return L.LRaise(L.EMPTY, t.origin.pos, hint)
    return L.LRaise(L.EMPTY, t.pos)


def _translate(t: D.DTerm, default_map) -> L.LTerm:
    rec = lambda sub: _translate(sub, default_map)
    if isinstance(t, D.DVar):
        return L.LVar(t.id, t.name, t.pos)
    if isinstance(t, D.DTop):
        return L.LTop(t.name, t.pos)
    if isinstance(t, D.DLit):
        return L.LLit(t.tag, t.value, t.pos)
    if isinstance(t, D.DEmpty):
        return L.LRaise(L.EMPTY, t.pos, t.hint)
    if isinstance(t, D.DConflict):
        return L.LRaise(L.CONFLICT, t.pos, positions=t.positions)
    if isinstance(t, D.DLam):
        return L.LLam(t.var_id, t.var_name, t.var_ty, rec(t.body), t.pos)
    if isinstance(t, D.DApp):
        return L.LApp(rec(t.fn), rec(t.arg), t.pos)
    if isinstance(t, D.DDefault):
        fallback = L.LIf(rec(t.just), rec(t.cons), _empty_raise(t), t.pos)
        if not t.excs:
            out: L.LTerm = fallback
        else:
            thunks = tuple(
                L.LLam(D.fresh_id(), "_", ty.UNIT, rec(e), e.pos) for e in t.excs
            )
            r = D.fresh_id()
            v = D.fresh_id()
            out = L.LLet(
                r, "exceptions",
                L.LApp(L.LProcExc(t.pos), L.LList(thunks, t.pos), t.pos),
                L.LMatchOpt(
                    L.LVar(r, "exceptions", t.pos),
                    fallback,
                    (v, "value"),
                    L.LVar(v, "value", t.pos),
                    t.pos,
                ),
                t.pos,
            )
        if default_map is not None:
            default_map.append((t, out))
        return out
    if isinstance(t, D.DIf):
        return L.LIf(rec(t.cond), rec(t.then), rec(t.orelse), t.pos)
    if isinstance(t, D.DLet):
        return L.LLet(t.var_id, t.var_name, rec(t.bound), rec(t.body), t.pos)
    if isinstance(t, D.DTupleT):
        return L.LTuple(tuple(rec(i) for i in t.items), t.pos)
    if isinstance(t, D.DProj):
        return L.LProj(rec(t.tuple_), t.index, t.pos)
    if isinstance(t, D.DStructT):
        return L.LStruct(t.struct, tuple((n, rec(v)) for n, v in t.fields), t.pos)
    if isinstance(t, D.DFieldT):
        return L.LField(rec(t.base), t.field, t.pos)
    if isinstance(t, D.DInject):
        payload = None if t.payload is None else rec(t.payload)
        return L.LInject(t.enum, t.case, payload, t.pos)
    if isinstance(t, D.DMatch):
        arms = tuple((case, binder, rec(body)) for case, binder, body in t.arms)
        return L.LMatch(rec(t.scrutinee), t.enum, arms, t.pos)
    if isinstance(t, D.DColl):
        return L.LList(tuple(rec(i) for i in t.items), t.pos)
    if isinstance(t, D.DFold):
        return L.LFold(rec(t.fn), rec(t.init), rec(t.coll), t.pos)
    if isinstance(t, D.DBinOp):
        return L.LBinOp(t.op, rec(t.left), rec(t.right), t.pos)
    if isinstance(t, D.DNot):
        return L.LNot(rec(t.operand), t.pos)
    raise AssertionError(type(t))


def translate_program(tops: dict[str, D.DTerm]) -> dict[str, L.LTerm]:
    return {name: translate(term) for name, term in tops.items()}


# ------------------------------------------------------------- validation


@dataclass
class Verdict:
    ok: bool
    detail: str = ""


def check_type_preservation(dterm: D.DTerm, table=None, tops: dict[str, ty.DType] | None = None) -> Verdict:
    dtau = D.typecheck(dterm, D.TypeEnv(table, tops or {}))
    lterm = translate(dterm)
    ltau = L.l_typecheck(lterm, L.LTypeEnv(table, tops or {}))
    if ty.compatible(dtau, ltau):
        return Verdict(True)
    return Verdict(False, "source type %r became %r" % (dtau, ltau))


class _Fn:
    """Marker standing for any function value during comparisons."""


_FN = _Fn()


def _to_runtime(t: D.DTerm):
    if isinstance(t, D.DLam):
        return _FN
    if isinstance(t, D.DTupleT):
        return tuple(_to_runtime(i) for i in t.items)
    if isinstance(t, D.DColl):
        return [_to_runtime(i) for i in t.items]
    if isinstance(t, D.DStructT):
        from .interp import VStruct

        return VStruct(t.struct, tuple((n, _to_runtime(v)) for n, v in t.fields))
    if isinstance(t, D.DInject):
        from .interp import VEnum

        return VEnum(t.enum, t.case, None if t.payload is None else _to_runtime(t.payload))
    return term_value(t)


def values_agree(dvalue, lvalue) -> bool:
    """First-order structural agreement; functions agree as functions."""
    d_fn = dvalue is _FN or isinstance(dvalue, VClosure)
    l_fn = lvalue is _FN or isinstance(lvalue, VClosure)
    if d_fn or l_fn:
        return d_fn and l_fn
    if isinstance(dvalue, tuple) and isinstance(lvalue, tuple):
        return len(dvalue) == len(lvalue) and all(
            values_agree(a, b) for a, b in zip(dvalue, lvalue)
        )
    if isinstance(dvalue, list) and isinstance(lvalue, list):
        return len(dvalue) == len(lvalue) and all(
            values_agree(a, b) for a, b in zip(dvalue, lvalue)
        )
    from .interp import VEnum, VStruct

    if isinstance(dvalue, VStruct) and isinstance(lvalue, VStruct):
        return dvalue.name == lvalue.name and all(
            n1 == n2 and values_agree(v1, v2)
            for (n1, v1), (n2, v2) in zip(dvalue.fields, lvalue.fields)
        )
    if isinstance(dvalue, VEnum) and isinstance(lvalue, VEnum):
        if (dvalue.enum, dvalue.case) != (lvalue.enum, lvalue.case):
            return False
        if (dvalue.payload is None) != (lvalue.payload is None):
            return False
        return dvalue.payload is None or values_agree(dvalue.payload, lvalue.payload)
    return dvalue == lvalue


def check_simulation(dterm: D.DTerm, dtops: dict[str, D.DTerm] | None = None,
                     budget: int = 10**6) -> Verdict:
    """The transitive-closure corollary: joint evaluation to one outcome."""
    ltops = translate_program(dtops or {})
    try:
        dresult = D.eval_term(dterm, dtops, budget)
    except DivergedError:
        return Verdict(False, "source evaluation diverged")
    loutcome = L.l_eval(translate(dterm), ltops, budget)
    if isinstance(dresult, D.DEmpty):
        if loutcome.kind == L.EMPTY:
            return Verdict(True)
        return Verdict(False, "source empty but target %s" % loutcome.kind)
    if isinstance(dresult, D.DConflict):
        if loutcome.kind == L.CONFLICT:
            return Verdict(True)
        return Verdict(False, "source conflict but target %s" % loutcome.kind)
    if loutcome.kind != "value":
        return Verdict(False, "source value but target raised %s" % loutcome.kind)
    try:
        dvalue = _to_runtime(dresult)
    except ValueError:
        return Verdict(False, "source result is not a comparable value")
    ok = values_agree(dvalue, loutcome.value)
    return Verdict(ok, "" if ok else "values differ: %r vs %r" % (dvalue, loutcome.value))

"""The enriched lambda calculus: the translation target.

Options, lists with a left fold, and two exception kinds: the empty error
(catchable) and the conflict error (never caught by generated code). The
process_exceptions helper is a built-in constant; its reference definition
as a plain fold term is also provided for the equivalence tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import types as ty
from .errors import DivergedError, SourcePosition, TypecheckError
from .interp import VUNIT, VClosure as _VC, VEnum, VMoney, VStruct, VDuration, _binop
from .types import DType, TAny, TArrow, TColl, TEnum, TOption, TStruct, TTuple

EMPTY = "empty"
CONFLICT = "conflict"


@dataclass(frozen=True, eq=False)
class LTerm:
    pass


@dataclass(frozen=True, eq=False)
class LVar(LTerm):
    id: int
    name: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LTop(LTerm):
    name: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LLit(LTerm):
    tag: str
    value: object
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LLam(LTerm):
    var_id: int
    var_name: str
    var_ty: DType
    body: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LApp(LTerm):
    fn: LTerm
    arg: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LNone(LTerm):
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LSome(LTerm):
    value: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LMatchOpt(LTerm):
    scrutinee: LTerm
    none_body: LTerm
    some_binder: tuple[int, str]
    some_body: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LList(LTerm):
    items: tuple[LTerm, ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LFold(LTerm):
    fn: LTerm
    init: LTerm
    coll: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LRaise(LTerm):
    eps: str  # EMPTY | CONFLICT
    pos: SourcePosition | None = None
    hint: str | None = None
    positions: tuple[SourcePosition, ...] = ()


@dataclass(frozen=True, eq=False)
class LTry(LTerm):
    body: LTerm
    eps: str
    handler: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LProcExc(LTerm):
    """The built-in process_exceptions constant."""

    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LIf(LTerm):
    cond: LTerm
    then: LTerm
    orelse: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LLet(LTerm):
    var_id: int
    var_name: str
    bound: LTerm
    body: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LTuple(LTerm):
    items: tuple[LTerm, ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LProj(LTerm):
    tuple_: LTerm
    index: int
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LStruct(LTerm):
    struct: str
    fields: tuple[tuple[str, LTerm], ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LField(LTerm):
    base: LTerm
    field: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LInject(LTerm):
    enum: str
    case: str
    payload: LTerm | None
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LMatch(LTerm):
    scrutinee: LTerm
    enum: str
    arms: tuple[tuple[str, tuple[int, str] | None, LTerm], ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LBinOp(LTerm):
    op: str
    left: LTerm
    right: LTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class LNot(LTerm):
    operand: LTerm
    pos: SourcePosition | None = None


# ----------------------------------------------------------------- typing

_LIT_TYPE = {
    "unit": ty.UNIT,
    "bool": ty.BOOL,
    "int": ty.INT,
    "money": ty.MONEY,
    "date": ty.DATE,
    "duration": ty.DURATION,
}


def _fail(msg, pos, expected=None, found=None):
    if expected is not None and found is not None:
        msg = "%s (expected %r, found %r)" % (msg, expected, found)
    return TypecheckError(msg, [(None, pos)] if pos else [])


class LTypeEnv:
    def __init__(self, table=None, tops: dict[str, DType] | None = None):
        self.table = table
        self.tops = tops or {}
        self.vars: dict[int, DType] = {}

    def bind(self, var_id: int, t: DType) -> "LTypeEnv":
        child = LTypeEnv(self.table, self.tops)
        child.vars = dict(self.vars)
        child.vars[var_id] = t
        return child


def l_typecheck(t: LTerm, env: LTypeEnv, expected: DType | None = None) -> DType:
    got = _synth(t, env)
    if expected is not None:
        if not ty.compatible(got, expected):
            raise _fail("term does not have the requested type", t.pos, expected, got)
        return ty.join(got, expected)
    return got


def _check(t: LTerm, env: LTypeEnv, expected: DType, what: str) -> DType:
    got = _synth(t, env)
    if not ty.compatible(got, expected):
        raise _fail(what, t.pos, expected, got)
    return ty.join(got, expected)


def _synth(t: LTerm, env: LTypeEnv) -> DType:
    if isinstance(t, LVar):
        if t.id not in env.vars:
            raise _fail("unbound variable %s" % t.name, t.pos)
        return env.vars[t.id]
    if isinstance(t, LTop):
        if t.name not in env.tops:
            raise _fail("unknown top-level name %s" % t.name, t.pos)
        return env.tops[t.name]
    if isinstance(t, LLit):
        return _LIT_TYPE[t.tag]
    if isinstance(t, LRaise):
        return ty.ANY
    if isinstance(t, LTry):
        body = _synth(t.body, env)
        handler = _check(t.handler, env, body, "try handler type mismatch")
        return ty.join(body, handler)
    if isinstance(t, LProcExc):
        return TArrow(TColl(TArrow(ty.UNIT, ty.ANY)), TOption(ty.ANY))
    if isinstance(t, LLam):
        return TArrow(t.var_ty, _synth(t.body, env.bind(t.var_id, t.var_ty)))
    if isinstance(t, LApp):
        if isinstance(t.fn, LProcExc):
            arg = _synth(t.arg, env)
            if isinstance(arg, TAny):
                return TOption(ty.ANY)
            if not (isinstance(arg, TColl) and (
                isinstance(arg.elem, TAny)
                or (isinstance(arg.elem, TArrow) and ty.compatible(arg.elem.param, ty.UNIT))
            )):
                raise _fail("process_exceptions takes a list of thunks", t.pos,
                            "collection of unit -> tau", arg)
            elem = arg.elem
            out = elem.result if isinstance(elem, TArrow) else ty.ANY
            return TOption(out)
        fn = _synth(t.fn, env)
        if isinstance(fn, TAny):
            _synth(t.arg, env)
            return ty.ANY
        if not isinstance(fn, TArrow):
            raise _fail("only functions can be applied", t.pos, "a function type", fn)
        _check(t.arg, env, fn.param, "argument type mismatch")
        return fn.result
    if isinstance(t, LNone):
        return TOption(ty.ANY)
    if isinstance(t, LSome):
        return TOption(_synth(t.value, env))
    if isinstance(t, LMatchOpt):
        st = _synth(t.scrutinee, env)
        if isinstance(st, TAny):
            st = TOption(ty.ANY)
        if not isinstance(st, TOption):
            raise _fail("option match needs an option", t.pos, "an option", st)
        none_t = _synth(t.none_body, env)
        some_t = _synth(t.some_body, env.bind(t.some_binder[0], st.elem))
        if not ty.compatible(none_t, some_t):
            raise _fail("option match arms disagree", t.pos, none_t, some_t)
        return ty.join(none_t, some_t)
    if isinstance(t, LList):
        elem: DType = ty.ANY
        for i in t.items:
            got = _synth(i, env)
            if not ty.compatible(got, elem):
                raise _fail("list items disagree", i.pos or t.pos, elem, got)
            elem = ty.join(elem, got)
        return TColl(elem)
    if isinstance(t, LFold):
        fn = _synth(t.fn, env)
        acc = _synth(t.init, env)
        coll = _synth(t.coll, env)
        if isinstance(fn, TAny):
            return acc
        if not (isinstance(fn, TArrow) and isinstance(fn.result, TArrow)):
            raise _fail("fold needs a two-argument function", t.pos, "acc -> elem -> acc", fn)
        if not ty.compatible(fn.param, acc) or not ty.compatible(fn.result.result, acc):
            raise _fail("fold accumulator type mismatch", t.pos, fn.param, acc)
        if isinstance(coll, TColl):
            if not ty.compatible(coll.elem, fn.result.param):
                raise _fail("fold element type mismatch", t.pos, fn.result.param, coll.elem)
        elif not isinstance(coll, TAny):
            raise _fail("fold needs a collection", t.pos, "a collection", coll)
        return ty.join(acc, fn.param)
    if isinstance(t, LIf):
        _check(t.cond, env, ty.BOOL, "an if condition must be a boolean")
        a = _synth(t.then, env)
        b = _check(t.orelse, env, a, "the branches of an if must agree")
        return ty.join(a, b)
    if isinstance(t, LLet):
        bound = _synth(t.bound, env)
        return _synth(t.body, env.bind(t.var_id, bound))
    if isinstance(t, LTuple):
        return TTuple(tuple(_synth(i, env) for i in t.items))
    if isinstance(t, LProj):
        tt = _synth(t.tuple_, env)
        if isinstance(tt, TAny):
            return ty.ANY
        if not isinstance(tt, TTuple) or t.index >= len(tt.items):
            raise _fail("bad tuple projection", t.pos, "a wide enough tuple", tt)
        return tt.items[t.index]
    if isinstance(t, LStruct):
        decl = dict(env.table.struct_fields(t.struct))
        for name, v in t.fields:
            _check(v, env, decl[name], "field %s has the wrong type" % name)
        return TStruct(t.struct)
    if isinstance(t, LField):
        base = _synth(t.base, env)
        if isinstance(base, TAny):
            return ty.ANY
        if not isinstance(base, TStruct):
            raise _fail("field access on a non-structure", t.pos, "a structure", base)
        return env.table.field_type(base.name, t.field, t.pos)
    if isinstance(t, LInject):
        cases = dict(env.table.enum_cases(t.enum))
        want = cases[t.case]
        if (want is None) != (t.payload is None):
            raise _fail("enumeration payload mismatch for %s" % t.case, t.pos)
        if t.payload is not None:
            _check(t.payload, env, want, "enumeration payload type mismatch")
        return TEnum(t.enum)
    if isinstance(t, LMatch):
        _check(t.scrutinee, env, TEnum(t.enum), "match scrutinee type mismatch")
        cases = env.table.enum_cases(t.enum)
        if [c for c, _, _ in t.arms] != [c for c, _ in cases]:
            raise _fail("match arms must cover each case once, in order", t.pos)
        out: DType | None = None
        for (case, binder, body), (_, payload) in zip(t.arms, cases):
            inner = env
            if binder is not None:
                if payload is None:
                    raise _fail("case %s has no payload to bind" % case, t.pos)
                inner = env.bind(binder[0], payload)
            got = _synth(body, inner)
            if out is None:
                out = got
            elif not ty.compatible(got, out):
                raise _fail("match arms disagree", body.pos or t.pos, out, got)
            else:
                out = ty.join(out, got)
        return out if out is not None else ty.ANY
    if isinstance(t, LBinOp):
        if t.op == "=":
            a = _synth(t.left, env)
            _check(t.right, env, a, "comparing values of different types")
            return ty.BOOL
        from .dcalc import _OP_SIG

        sig = _OP_SIG.get(t.op)
        if sig is None:
            raise _fail("unknown operator %s" % t.op, t.pos)
        lt, rt, out = sig
        _check(t.left, env, lt, "left operand of %s" % t.op)
        _check(t.right, env, rt, "right operand of %s" % t.op)
        return out
    if isinstance(t, LNot):
        _check(t.operand, env, ty.BOOL, "not needs a boolean")
        return ty.BOOL
    raise AssertionError(type(t))


# ------------------------------------------------------------- evaluation


class LRaised(Exception):
    def __init__(self, eps: str, pos=None, hint=None, positions=()):
        self.eps = eps
        self.pos = pos
        self.hint = hint
        self.positions = positions


@dataclass(frozen=True)
class VSome:
    value: object


_PROC_EXC = object()


@dataclass(frozen=True)
class LOutcome:
    kind: str  # "value" | EMPTY | CONFLICT
    value: object | None = None

    @staticmethod
    def of_value(v) -> "LOutcome":
        return LOutcome("value", v)

    @staticmethod
    def raised(eps: str) -> "LOutcome":
        return LOutcome(eps)


def _lit_value(t: LLit):
    if t.tag == "unit":
        return VUNIT
    if t.tag == "money":
        return VMoney(t.value)
    if t.tag == "duration":
        return VDuration(t.value)
    return t.value


class _LEval:
    def __init__(self, tops: dict[str, LTerm], budget: int):
        self.tops = tops
        self.top_cache: dict[str, object] = {}
        self.fuel = budget

    def run(self, t: LTerm, env: dict):
        while True:
            self.fuel -= 1
            if self.fuel <= 0:
                raise DivergedError("evaluation budget exceeded")
            if isinstance(t, LLet):
                bound = self.run(t.bound, env)
                env = dict(env)
                env[t.var_id] = bound
                t = t.body
                continue
            return self._eval(t, env)

    def _eval(self, t: LTerm, env: dict):
        if isinstance(t, LLit):
            return _lit_value(t)
        if isinstance(t, LVar):
            return env[t.id]
        if isinstance(t, LTop):
            if t.name not in self.top_cache:
                self.top_cache[t.name] = self.run(self.tops[t.name], {})
            return self.top_cache[t.name]
        if isinstance(t, LLam):
            return _VC(t.var_id, t.body, env)
        if isinstance(t, LProcExc):
            return _PROC_EXC
        if isinstance(t, LApp):
            fn = self.run(t.fn, env)
            arg = self.run(t.arg, env)
            return self._apply(fn, arg)
        if isinstance(t, LRaise):
            raise LRaised(t.eps, t.pos, t.hint, t.positions)
        if isinstance(t, LTry):
            try:
                return self.run(t.body, env)
            except LRaised as exc:
                if exc.eps != t.eps:
                    raise
                return self.run(t.handler, env)
        if isinstance(t, LNone):
            return None
        if isinstance(t, LSome):
            return VSome(self.run(t.value, env))
        if isinstance(t, LMatchOpt):
            scrut = self.run(t.scrutinee, env)
            if scrut is None:
                return self.run(t.none_body, env)
            inner = dict(env)
            inner[t.some_binder[0]] = scrut.value
            return self.run(t.some_body, inner)
        if isinstance(t, LList):
            return [self.run(i, env) for i in t.items]
        if isinstance(t, LFold):
            fn = self.run(t.fn, env)
            acc = self.run(t.init, env)
            for item in self.run(t.coll, env):
                acc = self._apply(self._apply(fn, acc), item)
            return acc
        if isinstance(t, LIf):
            return self.run(t.then if self.run(t.cond, env) else t.orelse, env)
        if isinstance(t, LLet):
            return self.run(t, env)
        if isinstance(t, LTuple):
            return tuple(self.run(i, env) for i in t.items)
        if isinstance(t, LProj):
            return self.run(t.tuple_, env)[t.index]
        if isinstance(t, LStruct):
            return VStruct(t.struct, tuple((n, self.run(v, env)) for n, v in t.fields))
        if isinstance(t, LField):
            return dict(self.run(t.base, env).fields)[t.field]
        if isinstance(t, LInject):
            payload = None if t.payload is None else self.run(t.payload, env)
            return VEnum(t.enum, t.case, payload)
        if isinstance(t, LMatch):
            scrut = self.run(t.scrutinee, env)
            for case, binder, body in t.arms:
                if case == scrut.case:
                    if binder is None:
                        return self.run(body, env)
                    inner = dict(env)
                    inner[binder[0]] = scrut.payload
                    return self.run(body, inner)
            raise AssertionError("no matching arm")
        if isinstance(t, LBinOp):
            left = self.run(t.left, env)
            right = self.run(t.right, env)
            return _binop(t.op, left, right, t.pos)
        if isinstance(t, LNot):
            return not self.run(t.operand, env)
        raise AssertionError(type(t))

    def _apply(self, fn, arg):
        if fn is _PROC_EXC:
            return self._process_exceptions(arg)
        assert isinstance(fn, _VC), "applying a non-function"
        inner = dict(fn.env)
        inner[fn.var_id] = arg
        return self.run(fn.body, inner)

    def _process_exceptions(self, thunks):
        """Fold with a None accumulator: one value wins, two conflict."""
        acc = None
        for thunk in thunks:
            self.fuel -= 1
            if self.fuel <= 0:
                raise DivergedError("evaluation budget exceeded")
            try:
                value = VSome(self._apply(thunk, VUNIT))
            except LRaised as exc:
                if exc.eps != EMPTY:
                    raise
                value = None
            if acc is None:
                acc = value
            elif value is not None:
                raise LRaised(CONFLICT)
        return acc


def l_eval(t: LTerm, tops: dict[str, LTerm] | None = None, budget: int = 10**6) -> LOutcome:
    try:
        return LOutcome.of_value(_LEval(tops or {}, budget).run(t, {}))
    except LRaised as exc:
        return LOutcome.raised(exc.eps)


def l_eval_raw(t: LTerm, tops: dict[str, LTerm] | None = None, budget: int = 10**6):
    """Evaluate and let exceptions escape (used by the CLI wiring)."""
    return _LEval(tops or {}, budget).run(t, {})


# --------------------------------------------- reference process_exceptions

_ids = itertools.count(1)


def process_exceptions_term(tau: DType) -> LTerm:
    """The helper written out as a plain term: a left fold whose accumulator
    starts at None, becomes Some on the first value, and conflicts on the
    second."""
    a = next(_ids)
    e = next(_ids)
    av = next(_ids)
    r = next(_ids)
    rv = next(_ids)
    lst = next(_ids)
    thunk_ty = TArrow(ty.UNIT, tau)
    step = LLam(
        a, "acc", TOption(tau),
        LLam(
            e, "thunk", thunk_ty,
            LLet(
                r, "forced",
                LTry(LSome(LApp(LVar(e, "thunk"), LLit("unit", None))), EMPTY, LNone()),
                LMatchOpt(
                    LVar(a, "acc"),
                    LVar(r, "forced"),
                    (av, "a"),
                    LMatchOpt(
                        LVar(r, "forced"),
                        LSome(LVar(av, "a")),
                        (rv, "_"),
                        LRaise(CONFLICT),
                    ),
                ),
            ),
        ),
    )
    return LLam(lst, "exceptions", TColl(thunk_ty), LFold(step, LNone(), LVar(lst, "exceptions")))

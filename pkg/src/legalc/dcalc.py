"""The default calculus: terms, typing, small-step reference semantics.

Error-term behavior follows the two-context discipline: a conflict aborts
through any evaluation context; an empty error propagates through ordinary
contexts only, so an empty arising inside the exception list of a default
is contained there as a value. Defaults evaluate their exceptions first,
left to right, then the justification, then the consequence.

`step`/`eval` are the substitution-based reference semantics; `deval` is a
faster big-step environment evaluator used by the command-line interpreter
and the trace hooks, checked against `eval` in the test suite.
"""

from __future__ import annotations

import datetime
import itertools
from dataclasses import dataclass, field

from .errors import (
    DivergedError,
    SourcePosition,
    StructuredError,
    TypecheckError,
)
from . import types as ty
from .types import DType, TAny, TArrow, TColl, TEnum, TStruct, TTuple

_ids = itertools.count(1)


def fresh_id() -> int:
    return next(_ids)


UNIT = object()  # the unit literal's payload


# ------------------------------------------------------------------ terms


@dataclass(frozen=True, eq=False)
class DTerm:
    pass


@dataclass(frozen=True, eq=False)
class DVar(DTerm):
    id: int
    name: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DTop(DTerm):
    name: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DLit(DTerm):
    tag: str  # unit | bool | int | money | date | duration
    value: object
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DLam(DTerm):
    var_id: int
    var_name: str
    var_ty: DType
    body: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DApp(DTerm):
    fn: DTerm
    arg: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True)
class DefaultOrigin:
    """Where a default came from, for traces and conflict reports."""

    scope: str
    var: str
    exc_positions: tuple[SourcePosition | None, ...]
    pos: SourcePosition | None
    override: bool = False  # the caller-override wrapper inserted per def


@dataclass(frozen=True, eq=False)
class DDefault(DTerm):
    excs: tuple[DTerm, ...]
    just: DTerm
    cons: DTerm
    pos: SourcePosition | None = None
    origin: DefaultOrigin | None = None


@dataclass(frozen=True, eq=False)
class DEmpty(DTerm):
    pos: SourcePosition | None = None
    hint: str | None = None  # e.g. "variable S.x was never defined"


@dataclass(frozen=True, eq=False)
class DConflict(DTerm):
    pos: SourcePosition | None = None
    positions: tuple[SourcePosition, ...] = ()


@dataclass(frozen=True, eq=False)
class DIf(DTerm):
    cond: DTerm
    then: DTerm
    orelse: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DLet(DTerm):
    var_id: int
    var_name: str
    bound: DTerm
    body: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DTupleT(DTerm):
    items: tuple[DTerm, ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DProj(DTerm):
    tuple_: DTerm
    index: int
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DStructT(DTerm):
    struct: str
    fields: tuple[tuple[str, DTerm], ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DFieldT(DTerm):
    base: DTerm
    field: str
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DInject(DTerm):
    enum: str
    case: str
    payload: DTerm | None
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DMatch(DTerm):
    scrutinee: DTerm
    enum: str
    arms: tuple[tuple[str, tuple[int, str] | None, DTerm], ...]  # case, binder, body
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DColl(DTerm):
    items: tuple[DTerm, ...]
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DFold(DTerm):
    fn: DTerm
    init: DTerm
    coll: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DBinOp(DTerm):
    op: str
    left: DTerm
    right: DTerm
    pos: SourcePosition | None = None


@dataclass(frozen=True, eq=False)
class DNot(DTerm):
    operand: DTerm
    pos: SourcePosition | None = None


def dbool(b: bool, pos=None) -> DLit:
    return DLit("bool", b, pos)


def dunit(pos=None) -> DLit:
    return DLit("unit", UNIT, pos)


# ------------------------------------------------------------------ values


def is_value(t: DTerm) -> bool:
    """Error-free structured values, plus the two error terms themselves."""
    if isinstance(t, (DLam, DLit, DEmpty, DConflict)):
        return True
    return _is_strict_value(t)


def _is_strict_value(t: DTerm) -> bool:
    """A value that contains no error term in a component position."""
    if isinstance(t, (DLam, DLit)):
        return True
    if isinstance(t, DTupleT):
        return all(_is_strict_value(i) for i in t.items)
    if isinstance(t, DStructT):
        return all(_is_strict_value(v) for _, v in t.fields)
    if isinstance(t, DInject):
        return t.payload is None or _is_strict_value(t.payload)
    if isinstance(t, DColl):
        return all(_is_strict_value(i) for i in t.items)
    return False


def term_equal(a: DTerm, b: DTerm) -> bool:
    """Structural equality ignoring positions and error payloads."""
    if isinstance(a, DEmpty) and isinstance(b, DEmpty):
        return True
    if isinstance(a, DConflict) and isinstance(b, DConflict):
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, DVar):
        return a.id == b.id
    if isinstance(a, DTop):
        return a.name == b.name
    if isinstance(a, DLit):
        return a.tag == b.tag and a.value == b.value
    if isinstance(a, DLam):
        return a.var_id == b.var_id and ty.compatible(a.var_ty, b.var_ty) and term_equal(a.body, b.body)
    if isinstance(a, DApp):
        return term_equal(a.fn, b.fn) and term_equal(a.arg, b.arg)
    if isinstance(a, DDefault):
        return (
            len(a.excs) == len(b.excs)
            and all(term_equal(x, y) for x, y in zip(a.excs, b.excs))
            and term_equal(a.just, b.just)
            and term_equal(a.cons, b.cons)
        )
    if isinstance(a, DIf):
        return all(term_equal(x, y) for x, y in [(a.cond, b.cond), (a.then, b.then), (a.orelse, b.orelse)])
    if isinstance(a, DLet):
        return a.var_id == b.var_id and term_equal(a.bound, b.bound) and term_equal(a.body, b.body)
    if isinstance(a, DTupleT) or isinstance(a, DColl):
        return len(a.items) == len(b.items) and all(term_equal(x, y) for x, y in zip(a.items, b.items))
    if isinstance(a, DProj):
        return a.index == b.index and term_equal(a.tuple_, b.tuple_)
    if isinstance(a, DStructT):
        return a.struct == b.struct and len(a.fields) == len(b.fields) and all(
            n1 == n2 and term_equal(v1, v2) for (n1, v1), (n2, v2) in zip(a.fields, b.fields)
        )
    if isinstance(a, DFieldT):
        return a.field == b.field and term_equal(a.base, b.base)
    if isinstance(a, DInject):
        if a.enum != b.enum or a.case != b.case or (a.payload is None) != (b.payload is None):
            return False
        return a.payload is None or term_equal(a.payload, b.payload)
    if isinstance(a, DMatch):
        if a.enum != b.enum or len(a.arms) != len(b.arms) or not term_equal(a.scrutinee, b.scrutinee):
            return False
        for (c1, b1, e1), (c2, b2, e2) in zip(a.arms, b.arms):
            if c1 != c2 or (b1 is None) != (b2 is None) or not term_equal(e1, e2):
                return False
            if b1 is not None and b1[0] != b2[0]:
                return False
        return True
    if isinstance(a, DFold):
        return term_equal(a.fn, b.fn) and term_equal(a.init, b.init) and term_equal(a.coll, b.coll)
    if isinstance(a, DBinOp):
        return a.op == b.op and term_equal(a.left, b.left) and term_equal(a.right, b.right)
    if isinstance(a, DNot):
        return term_equal(a.operand, b.operand)
    raise AssertionError(type(a))


# ------------------------------------------------------------ substitution


def subst(t: DTerm, var_id: int, value: DTerm) -> DTerm:
    """Substitute a closed value for a variable (no capture possible)."""
    if isinstance(t, DVar):
        return value if t.id == var_id else t
    if isinstance(t, (DTop, DLit, DEmpty, DConflict)):
        return t
    if isinstance(t, DLam):
        if t.var_id == var_id:
            return t
        return DLam(t.var_id, t.var_name, t.var_ty, subst(t.body, var_id, value), t.pos)
    if isinstance(t, DApp):
        return DApp(subst(t.fn, var_id, value), subst(t.arg, var_id, value), t.pos)
    if isinstance(t, DDefault):
        return DDefault(
            tuple(subst(e, var_id, value) for e in t.excs),
            subst(t.just, var_id, value),
            subst(t.cons, var_id, value),
            t.pos,
            t.origin,
        )
    if isinstance(t, DIf):
        return DIf(subst(t.cond, var_id, value), subst(t.then, var_id, value),
                   subst(t.orelse, var_id, value), t.pos)
    if isinstance(t, DLet):
        bound = subst(t.bound, var_id, value)
        body = t.body if t.var_id == var_id else subst(t.body, var_id, value)
        return DLet(t.var_id, t.var_name, bound, body, t.pos)
    if isinstance(t, DTupleT):
        return DTupleT(tuple(subst(i, var_id, value) for i in t.items), t.pos)
    if isinstance(t, DProj):
        return DProj(subst(t.tuple_, var_id, value), t.index, t.pos)
    if isinstance(t, DStructT):
        return DStructT(t.struct, tuple((n, subst(v, var_id, value)) for n, v in t.fields), t.pos)
    if isinstance(t, DFieldT):
        return DFieldT(subst(t.base, var_id, value), t.field, t.pos)
    if isinstance(t, DInject):
        payload = None if t.payload is None else subst(t.payload, var_id, value)
        return DInject(t.enum, t.case, payload, t.pos)
    if isinstance(t, DMatch):
        arms = []
        for case, binder, body in t.arms:
            if binder is not None and binder[0] == var_id:
                arms.append((case, binder, body))
            else:
                arms.append((case, binder, subst(body, var_id, value)))
        return DMatch(subst(t.scrutinee, var_id, value), t.enum, tuple(arms), t.pos)
    if isinstance(t, DColl):
        return DColl(tuple(subst(i, var_id, value) for i in t.items), t.pos)
    if isinstance(t, DFold):
        return DFold(subst(t.fn, var_id, value), subst(t.init, var_id, value),
                     subst(t.coll, var_id, value), t.pos)
    if isinstance(t, DBinOp):
        return DBinOp(t.op, subst(t.left, var_id, value), subst(t.right, var_id, value), t.pos)
    if isinstance(t, DNot):
        return DNot(subst(t.operand, var_id, value), t.pos)
    raise AssertionError(type(t))


# ----------------------------------------------------------------- typing

_OP_SIG: dict[str, tuple[DType, DType, DType]] = {
    "+": (ty.INT, ty.INT, ty.INT),
    "-": (ty.INT, ty.INT, ty.INT),
    "*": (ty.INT, ty.INT, ty.INT),
    "/": (ty.INT, ty.INT, ty.INT),
    "+$": (ty.MONEY, ty.MONEY, ty.MONEY),
    "-$": (ty.MONEY, ty.MONEY, ty.MONEY),
    "/$": (ty.MONEY, ty.INT, ty.MONEY),
    "+@": (ty.DATE, ty.DURATION, ty.DATE),
    "-@": (ty.DATE, ty.DATE, ty.DURATION),
    "+^": (ty.DURATION, ty.DURATION, ty.DURATION),
    "-^": (ty.DURATION, ty.DURATION, ty.DURATION),
    "and": (ty.BOOL, ty.BOOL, ty.BOOL),
    "or": (ty.BOOL, ty.BOOL, ty.BOOL),
}
for _suffix, _t in [("", ty.INT), ("$", ty.MONEY), ("@", ty.DATE), ("^", ty.DURATION)]:
    for _cmp in ["<", "<=", ">", ">="]:
        _OP_SIG[_cmp + _suffix] = (_t, _t, ty.BOOL)

_EQ_TYPES = (ty.BOOL, ty.INT, ty.MONEY, ty.DATE, ty.DURATION)

_LIT_TYPE = {
    "unit": ty.UNIT,
    "bool": ty.BOOL,
    "int": ty.INT,
    "money": ty.MONEY,
    "date": ty.DATE,
    "duration": ty.DURATION,
}


class TypeEnv:
    """Variable ids to types, plus declarations and top-level names."""

    def __init__(self, table=None, tops: dict[str, DType] | None = None):
        self.table = table
        self.tops = tops or {}
        self.vars: dict[int, DType] = {}

    def bind(self, var_id: int, t: DType) -> "TypeEnv":
        child = TypeEnv(self.table, self.tops)
        child.vars = dict(self.vars)
        child.vars[var_id] = t
        return child


def _fail(msg: str, pos, expected=None, found=None) -> TypecheckError:
    if expected is not None and found is not None:
        msg = "%s (expected %r, found %r)" % (msg, expected, found)
    return TypecheckError(msg, [(None, pos)] if pos else [])


def typecheck(t: DTerm, env: TypeEnv, expected: DType | None = None) -> DType:
    got = _synth(t, env)
    if expected is not None:
        if not ty.compatible(got, expected):
            raise _fail("term does not have the requested type", t.pos, expected, got)
        return ty.join(got, expected)
    return got


def _check(t: DTerm, env: TypeEnv, expected: DType, what: str) -> DType:
    got = _synth(t, env)
    if not ty.compatible(got, expected):
        raise _fail(what, t.pos, expected, got)
    return ty.join(got, expected)


def _synth(t: DTerm, env: TypeEnv) -> DType:
    if isinstance(t, DVar):
        if t.id not in env.vars:
            raise _fail("unbound variable %s" % t.name, t.pos)
        return env.vars[t.id]
    if isinstance(t, DTop):
        if t.name not in env.tops:
            raise _fail("unknown top-level name %s" % t.name, t.pos)
        return env.tops[t.name]
    if isinstance(t, DLit):
        return _LIT_TYPE[t.tag]
    if isinstance(t, (DEmpty, DConflict)):
        return ty.ANY
    if isinstance(t, DLam):
        body = _synth(t.body, env.bind(t.var_id, t.var_ty))
        return TArrow(t.var_ty, body)
    if isinstance(t, DApp):
        fn = _synth(t.fn, env)
        if isinstance(fn, TAny):
            _synth(t.arg, env)
            return ty.ANY
        if not isinstance(fn, TArrow):
            raise _fail("only functions can be applied", t.pos, "a function type", fn)
        _check(t.arg, env, fn.param, "argument type mismatch")
        return fn.result
    if isinstance(t, DDefault):
        out = _synth(t.cons, env)
        for e in t.excs:
            got = _synth(e, env)
            if not ty.compatible(got, out):
                raise _fail("an exception disagrees with the consequence type", e.pos or t.pos, out, got)
            out = ty.join(out, got)
        _check(t.just, env, ty.BOOL, "a justification must be a boolean")
        return out
    if isinstance(t, DIf):
        _check(t.cond, env, ty.BOOL, "an if condition must be a boolean")
        a = _synth(t.then, env)
        b = _check(t.orelse, env, a, "the branches of an if must agree")
        return ty.join(a, b)
    if isinstance(t, DLet):
        bound = _synth(t.bound, env)
        return _synth(t.body, env.bind(t.var_id, bound))
    if isinstance(t, DTupleT):
        return TTuple(tuple(_synth(i, env) for i in t.items))
    if isinstance(t, DProj):
        tt = _synth(t.tuple_, env)
        if isinstance(tt, TAny):
            return ty.ANY
        if not isinstance(tt, TTuple) or t.index >= len(tt.items):
            raise _fail("bad tuple projection", t.pos, "a wide enough tuple", tt)
        return tt.items[t.index]
    if isinstance(t, DStructT):
        decl = dict(env.table.struct_fields(t.struct))
        for name, v in t.fields:
            _check(v, env, decl[name], "field %s has the wrong type" % name)
        return TStruct(t.struct)
    if isinstance(t, DFieldT):
        base = _synth(t.base, env)
        if isinstance(base, TAny):
            return ty.ANY
        if not isinstance(base, TStruct):
            raise _fail("field access on a non-structure", t.pos, "a structure", base)
        return env.table.field_type(base.name, t.field, t.pos)
    if isinstance(t, DInject):
        cases = dict(env.table.enum_cases(t.enum))
        want = cases[t.case]
        if (want is None) != (t.payload is None):
            raise _fail("enumeration payload mismatch for %s" % t.case, t.pos)
        if t.payload is not None:
            _check(t.payload, env, want, "enumeration payload type mismatch")
        return TEnum(t.enum)
    if isinstance(t, DMatch):
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
    if isinstance(t, DColl):
        elem: DType = ty.ANY
        for i in t.items:
            got = _synth(i, env)
            if not ty.compatible(got, elem):
                raise _fail("collection items disagree", i.pos or t.pos, elem, got)
            elem = ty.join(elem, got)
        return TColl(elem)
    if isinstance(t, DFold):
        fn = _synth(t.fn, env)
        acc = _synth(t.init, env)
        coll = _synth(t.coll, env)
        if isinstance(fn, TAny):
            return acc
        if not (isinstance(fn, TArrow) and isinstance(fn.result, TArrow)):
            raise _fail("fold needs a two-argument function", t.pos, "acc -> elem -> acc", fn)
        if not ty.compatible(fn.param, acc) or not ty.compatible(fn.result.result, acc):
            raise _fail("fold accumulator type mismatch", t.pos, fn.param, acc)
        want_elem = fn.result.param
        if isinstance(coll, TColl):
            if not ty.compatible(coll.elem, want_elem):
                raise _fail("fold element type mismatch", t.pos, want_elem, coll.elem)
        elif not isinstance(coll, TAny):
            raise _fail("fold needs a collection", t.pos, "a collection", coll)
        return ty.join(acc, fn.param)
    if isinstance(t, DBinOp):
        if t.op == "=":
            a = _synth(t.left, env)
            b = _check(t.right, env, a, "comparing values of different types")
            merged = ty.join(a, b)
            if not isinstance(merged, TAny) and merged not in _EQ_TYPES:
                raise _fail("equality is only defined on scalar values", t.pos, "a scalar", merged)
            return ty.BOOL
        sig = _OP_SIG.get(t.op)
        if sig is None:
            raise _fail("unknown operator %s" % t.op, t.pos)
        lt, rt, out = sig
        _check(t.left, env, lt, "left operand of %s" % t.op)
        _check(t.right, env, rt, "right operand of %s" % t.op)
        return out
    if isinstance(t, DNot):
        _check(t.operand, env, ty.BOOL, "not needs a boolean")
        return ty.BOOL
    raise AssertionError(type(t))


# ------------------------------------------------------------- small step

_VALUE = 0
_STEPPED = 1
_EMPTY = 2
_CONFLICT = 3


class _Machine:
    def __init__(self, tops: dict[str, DTerm] | None = None):
        self.tops = tops or {}

    # Each case returns (kind, term-or-None, payload). EMPTY means the
    # subterm just stepped to the empty error; CONFLICT likewise. The
    # caller frame decides whether to lift or (for exception slots) contain.

    def step1(self, t: DTerm):
        if isinstance(t, (DLam, DLit, DEmpty, DConflict)):
            return _VALUE, None, None
        if _is_strict_value(t):
            return _VALUE, None, None
        if isinstance(t, DVar):
            raise AssertionError("stuck: free variable %s" % t.name)
        if isinstance(t, DTop):
            if t.name not in self.tops:
                raise AssertionError("stuck: unknown top-level %s" % t.name)
            return _STEPPED, self.tops[t.name], None
        if isinstance(t, DApp):
            k, v, p = self._hole(t.fn)
            if k is not None:
                return k, (DApp(v, t.arg, t.pos) if k == _STEPPED else None), p
            k, v, p = self._hole(t.arg)
            if k is not None:
                return k, (DApp(t.fn, v, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.fn, DLam), "stuck: applying a non-function"
            return _STEPPED, subst(t.fn.body, t.fn.var_id, t.arg), None
        if isinstance(t, DDefault):
            excs = t.excs
            for i, e in enumerate(excs):
                if is_value(e):
                    continue
                k, v, p = self.step1(e)
                if k == _CONFLICT:
                    return _CONFLICT, None, p
                if k == _EMPTY:
                    # Containment: the empty becomes the slot's value.
                    v = DEmpty(pos=p[0] if p else None, hint=p[1] if p else None)
                    k = _STEPPED
                new = excs[:i] + (v,) + excs[i + 1:]
                return _STEPPED, DDefault(new, t.just, t.cons, t.pos, t.origin), None
            live = [(i, e) for i, e in enumerate(excs) if not isinstance(e, DEmpty)]
            if len(live) >= 2:
                positions = self._conflict_positions(t, [i for i, _ in live])
                return _CONFLICT, None, (t.pos, positions)
            if len(live) == 1:
                v = live[0][1]
                if isinstance(v, DConflict):
                    return _CONFLICT, None, (v.pos, v.positions)
                return _STEPPED, v, None
            k, v, p = self._hole(t.just)
            if k is not None:
                if k == _STEPPED:
                    return _STEPPED, DDefault(excs, v, t.cons, t.pos, t.origin), None
                return k, None, p
            assert isinstance(t.just, DLit) and t.just.tag == "bool", "stuck: non-boolean justification"
            if t.just.value is False:
                return _EMPTY, None, self._empty_payload(t)
            k, v, p = self._hole(t.cons)
            if k is not None:
                if k == _STEPPED:
                    return _STEPPED, DDefault(excs, t.just, v, t.pos, t.origin), None
                return k, None, p
            return _STEPPED, t.cons, None
        if isinstance(t, DIf):
            k, v, p = self._hole(t.cond)
            if k is not None:
                return k, (DIf(v, t.then, t.orelse, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.cond, DLit), "stuck: non-boolean condition"
            return _STEPPED, (t.then if t.cond.value else t.orelse), None
        if isinstance(t, DLet):
            k, v, p = self._hole(t.bound)
            if k is not None:
                return k, (DLet(t.var_id, t.var_name, v, t.body, t.pos) if k == _STEPPED else None), p
            return _STEPPED, subst(t.body, t.var_id, t.bound), None
        if isinstance(t, DTupleT):
            k, items, p = self._hole_seq(t.items)
            return k, (DTupleT(items, t.pos) if k == _STEPPED else None), p
        if isinstance(t, DProj):
            k, v, p = self._hole(t.tuple_)
            if k is not None:
                return k, (DProj(v, t.index, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.tuple_, DTupleT), "stuck: projecting a non-tuple"
            return _STEPPED, t.tuple_.items[t.index], None
        if isinstance(t, DStructT):
            vals = tuple(v for _, v in t.fields)
            k, items, p = self._hole_seq(vals)
            if k == _STEPPED:
                fields = tuple((n, items[i]) for i, (n, _) in enumerate(t.fields))
                return _STEPPED, DStructT(t.struct, fields, t.pos), None
            return k, None, p
        if isinstance(t, DFieldT):
            k, v, p = self._hole(t.base)
            if k is not None:
                return k, (DFieldT(v, t.field, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.base, DStructT), "stuck: field access on a non-structure"
            return _STEPPED, dict(t.base.fields)[t.field], None
        if isinstance(t, DInject):
            assert t.payload is not None  # payload-less injections are values
            k, v, p = self._hole(t.payload)
            if k is not None:
                return k, (DInject(t.enum, t.case, v, t.pos) if k == _STEPPED else None), p
            raise AssertionError("unreachable: injection of a value is a value")
        if isinstance(t, DMatch):
            k, v, p = self._hole(t.scrutinee)
            if k is not None:
                return k, (DMatch(v, t.enum, t.arms, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.scrutinee, DInject), "stuck: matching a non-enumeration"
            for case, binder, body in t.arms:
                if case == t.scrutinee.case:
                    if binder is None:
                        return _STEPPED, body, None
                    return _STEPPED, subst(body, binder[0], t.scrutinee.payload), None
            raise AssertionError("stuck: no matching arm")
        if isinstance(t, DColl):
            k, items, p = self._hole_seq(t.items)
            return k, (DColl(items, t.pos) if k == _STEPPED else None), p
        if isinstance(t, DFold):
            for attr, rebuild in (
                ("fn", lambda v: DFold(v, t.init, t.coll, t.pos)),
                ("init", lambda v: DFold(t.fn, v, t.coll, t.pos)),
                ("coll", lambda v: DFold(t.fn, t.init, v, t.pos)),
            ):
                sub = getattr(t, attr)
                k, v, p = self._hole(sub)
                if k is not None:
                    return k, (rebuild(v) if k == _STEPPED else None), p
            coll = t.coll
            assert isinstance(coll, DColl), "stuck: folding a non-collection"
            if not coll.items:
                return _STEPPED, t.init, None
            head, rest = coll.items[0], coll.items[1:]
            acc = DApp(DApp(t.fn, t.init, t.pos), head, t.pos)
            return _STEPPED, DFold(t.fn, acc, DColl(rest, coll.pos), t.pos), None
        if isinstance(t, DBinOp):
            k, v, p = self._hole(t.left)
            if k is not None:
                return k, (DBinOp(t.op, v, t.right, t.pos) if k == _STEPPED else None), p
            k, v, p = self._hole(t.right)
            if k is not None:
                return k, (DBinOp(t.op, t.left, v, t.pos) if k == _STEPPED else None), p
            return _STEPPED, apply_binop(t.op, t.left, t.right, t.pos), None
        if isinstance(t, DNot):
            k, v, p = self._hole(t.operand)
            if k is not None:
                return k, (DNot(v, t.pos) if k == _STEPPED else None), p
            assert isinstance(t.operand, DLit)
            return _STEPPED, dbool(not t.operand.value, t.pos), None
        raise AssertionError(type(t))

    def _empty_payload(self, t: DDefault):
        if t.origin is not None and t.origin.pos is not None:
            return (t.origin.pos, "no definition applied for %s.%s" % (t.origin.scope, t.origin.var))
        return (t.pos, None)

    def _conflict_positions(self, t: DDefault, live: list[int]) -> tuple[SourcePosition, ...]:
        if t.origin is None:
            return ()
        out = []
        for i in live:
            if i < len(t.origin.exc_positions) and t.origin.exc_positions[i] is not None:
                out.append(t.origin.exc_positions[i])
        return tuple(out)

    def _hole(self, sub: DTerm):
        """Evaluate inside an ordinary (C-lambda) hole: errors lift."""
        if isinstance(sub, DEmpty):
            return _EMPTY, None, (sub.pos, sub.hint)
        if isinstance(sub, DConflict):
            return _CONFLICT, None, (sub.pos, sub.positions)
        if is_value(sub):
            return None, None, None
        k, v, p = self.step1(sub)
        assert k != _VALUE
        return k, v, p

    def _hole_seq(self, items: tuple[DTerm, ...]):
        for i, sub in enumerate(items):
            k, v, p = self._hole(sub)
            if k is None:
                continue
            if k == _STEPPED:
                return _STEPPED, items[:i] + (v,) + items[i + 1:], None
            return k, None, p
        raise AssertionError("unreachable: sequence of values")


def step(t: DTerm, tops: dict[str, DTerm] | None = None) -> DTerm | None:
    """One small step; None when the term is a value."""
    k, v, p = _Machine(tops).step1(t)
    if k == _VALUE:
        return None
    if k == _STEPPED:
        return v
    if k == _EMPTY:
        pos, hint = p if p else (None, None)
        return DEmpty(pos=pos, hint=hint)
    pos, positions = p if p else (None, ())
    return DConflict(pos=pos, positions=positions or ())


def eval_term(t: DTerm, tops: dict[str, DTerm] | None = None, budget: int = 10**6) -> DTerm:
    """Transitive closure of step, with a budget for the random harness."""
    machine = _Machine(tops)
    for _ in range(budget):
        k, v, p = machine.step1(t)
        if k == _VALUE:
            return t
        if k == _EMPTY:
            pos, hint = p if p else (None, None)
            return DEmpty(pos=pos, hint=hint)
        if k == _CONFLICT:
            pos, positions = p if p else (None, ())
            return DConflict(pos=pos, positions=positions or ())
        t = v
    raise DivergedError("evaluation did not finish within %d steps" % budget)


# --------------------------------------------------------------- literals


def apply_binop(op: str, lt: DLit, rt: DLit, pos) -> DLit:
    l, r = lt.value, rt.value
    if op in ("and", "or"):
        return dbool((l and r) if op == "and" else (l or r), pos)
    if op == "=":
        return dbool(l == r and lt.tag == rt.tag, pos)
    base, suffix = (op[:-1], op[-1]) if op[-1] in "$@^" else (op, "")
    if base in ("<", "<=", ">", ">="):
        cmp = {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r}[base]
        return dbool(cmp, pos)
    if op == "+@":
        try:
            return DLit("date", l + datetime.timedelta(days=r), pos)
        except OverflowError:
            raise StructuredError("date arithmetic out of range", [(None, pos)] if pos else [])
    if op == "-@":
        return DLit("duration", (l - r).days, pos)
    if base == "/":
        if r == 0:
            raise StructuredError("division by zero", [(None, pos)] if pos else [])
        q = abs(l) // abs(r)
        value = q if (l >= 0) == (r >= 0) else -q
        return DLit(lt.tag, value, pos)
    value = l + r if base == "+" else l - r if base == "-" else l * r
    return DLit(lt.tag, value, pos)

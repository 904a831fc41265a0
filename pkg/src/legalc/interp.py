"""Big-step environment evaluator over the default calculus.

Semantically identical to iterating `dcalc.step` (the test suite checks
this on the random-term corpus); used by the command line because it is
much faster on large programs, and because the trace hooks naturally live
where defaults are resolved.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass
from typing import Callable

from . import dcalc as D
from .errors import SourcePosition, StructuredError


class EmptyEval(Exception):
    """An empty error propagating out of ordinary evaluation contexts."""

    def __init__(self, pos=None, hint=None):
        self.pos = pos
        self.hint = hint


class ConflictEval(Exception):
    """A conflict error aborting evaluation through any context."""

    def __init__(self, pos=None, positions: tuple[SourcePosition, ...] = ()):
        self.pos = pos
        self.positions = positions


@dataclass(frozen=True)
class VMoney:
    cents: int


@dataclass(frozen=True)
class VDuration:
    days: int


@dataclass(frozen=True)
class VStruct:
    name: str
    fields: tuple[tuple[str, object], ...]


@dataclass(frozen=True)
class VEnum:
    enum: str
    case: str
    payload: object | None


@dataclass(frozen=True)
class VClosure:
    var_id: int
    body: D.DTerm
    env: dict

    def __eq__(self, other):  # closures never compare equal structurally
        return self is other


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "()"


VUNIT = _Unit()
_CONTAINED = object()  # marks an exception slot whose evaluation was empty

TraceHook = Callable[[D.DefaultOrigin, str, SourcePosition | None], None]


def _binop(op: str, l, r, pos):
    if op == "and":
        return l and r
    if op == "or":
        return l or r
    if op == "=":
        return l == r
    base, suffix = (op[:-1], op[-1]) if op[-1] in "$@^" else (op, "")
    if suffix == "$":
        if base in ("<", "<=", ">", ">="):
            return _compare(base, l.cents, r.cents)
        if base == "/":
            return VMoney(_divide(l.cents, r, pos))
        return VMoney(l.cents + r.cents if base == "+" else l.cents - r.cents)
    if suffix == "^":
        if base in ("<", "<=", ">", ">="):
            return _compare(base, l.days, r.days)
        return VDuration(l.days + r.days if base == "+" else l.days - r.days)
    if suffix == "@":
        if base in ("<", "<=", ">", ">="):
            return _compare(base, l, r)
        if base == "+":
            try:
                return l + datetime.timedelta(days=r.days)
            except OverflowError:
                raise StructuredError("date arithmetic out of range", [(None, pos)] if pos else [])
        return VDuration((l - r).days)
    if base in ("<", "<=", ">", ">="):
        return _compare(base, l, r)
    if base == "/":
        return _divide(l, r, pos)
    return l + r if base == "+" else l - r if base == "-" else l * r


def _compare(base: str, l, r) -> bool:
    return {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r}[base]


def _divide(l: int, r: int, pos) -> int:
    if r == 0:
        raise StructuredError("division by zero", [(None, pos)] if pos else [])
    q = abs(l) // abs(r)
    return q if (l >= 0) == (r >= 0) else -q


def _lit_value(t: D.DLit):
    if t.tag == "unit":
        return VUNIT
    if t.tag == "money":
        return VMoney(t.value)
    if t.tag == "duration":
        return VDuration(t.value)
    return t.value  # bool, int, datetime.date


def deval(t: D.DTerm, env: dict | None = None, tops: dict[str, D.DTerm] | None = None,
          trace: TraceHook | None = None):
    """Evaluate a closed term to a runtime value.

    Raises EmptyEval/ConflictEval for the two error outcomes.
    """
    return _Eval(tops or {}, trace).run(t, env or {})


class _Eval:
    def __init__(self, tops: dict[str, D.DTerm], trace: TraceHook | None):
        self.tops = tops
        self.top_cache: dict[str, object] = {}
        self.trace = trace

    def run(self, t: D.DTerm, env: dict):
        while True:
            if isinstance(t, D.DLet):
                # Let chains are consumed iteratively to bound recursion.
                bound = self.run(t.bound, env)
                env = dict(env)
                env[t.var_id] = bound
                t = t.body
                continue
            return self._eval(t, env)

    def _eval(self, t: D.DTerm, env: dict):
        if isinstance(t, D.DLit):
            return _lit_value(t)
        if isinstance(t, D.DVar):
            try:
                return env[t.id]
            except KeyError:
                raise AssertionError("unbound variable %s" % t.name)
        if isinstance(t, D.DTop):
            if t.name not in self.top_cache:
                self.top_cache[t.name] = self.run(self.tops[t.name], {})
            return self.top_cache[t.name]
        if isinstance(t, D.DEmpty):
            raise EmptyEval(t.pos, t.hint)
        if isinstance(t, D.DConflict):
            raise ConflictEval(t.pos, t.positions)
        if isinstance(t, D.DLam):
            return VClosure(t.var_id, t.body, env)
        if isinstance(t, D.DApp):
            fn = self.run(t.fn, env)
            arg = self.run(t.arg, env)
            try:
                return self._apply(fn, arg)
            except EmptyEval as exc:
                # A forced thunk reports the position of the read.
                if exc.pos is None and t.pos is not None:
                    exc.pos = t.pos
                raise
        if isinstance(t, D.DDefault):
            return self._default(t, env)
        if isinstance(t, D.DIf):
            cond = self.run(t.cond, env)
            return self.run(t.then if cond else t.orelse, env)
        if isinstance(t, D.DLet):
            return self.run(t, env)
        if isinstance(t, D.DTupleT):
            return tuple(self.run(i, env) for i in t.items)
        if isinstance(t, D.DProj):
            return self.run(t.tuple_, env)[t.index]
        if isinstance(t, D.DStructT):
            return VStruct(t.struct, tuple((n, self.run(v, env)) for n, v in t.fields))
        if isinstance(t, D.DFieldT):
            base = self.run(t.base, env)
            return dict(base.fields)[t.field]
        if isinstance(t, D.DInject):
            payload = None if t.payload is None else self.run(t.payload, env)
            return VEnum(t.enum, t.case, payload)
        if isinstance(t, D.DMatch):
            scrut = self.run(t.scrutinee, env)
            for case, binder, body in t.arms:
                if case == scrut.case:
                    if binder is None:
                        return self.run(body, env)
                    inner = dict(env)
                    inner[binder[0]] = scrut.payload
                    return self.run(body, inner)
            raise AssertionError("no matching arm for %s" % scrut.case)
        if isinstance(t, D.DColl):
            return [self.run(i, env) for i in t.items]
        if isinstance(t, D.DFold):
            fn = self.run(t.fn, env)
            acc = self.run(t.init, env)
            for item in self.run(t.coll, env):
                acc = self._apply(self._apply(fn, acc), item)
            return acc
        if isinstance(t, D.DBinOp):
            left = self.run(t.left, env)
            right = self.run(t.right, env)
            return _binop(t.op, left, right, t.pos)
        if isinstance(t, D.DNot):
            return not self.run(t.operand, env)
        raise AssertionError(type(t))

    def _apply(self, fn, arg):
        assert isinstance(fn, VClosure), "applying a non-function"
        inner = dict(fn.env)
        inner[fn.var_id] = arg
        return self.run(fn.body, inner)

    def _default(self, t: D.DDefault, env: dict):
        # Exceptions first, left to right; an empty is contained per slot.
        slots: list[object] = []
        for e in t.excs:
            try:
                slots.append(self.run(e, env))
            except EmptyEval:
                slots.append(_CONTAINED)
        live = [(i, v) for i, v in enumerate(slots) if v is not _CONTAINED]
        if len(live) >= 2:
            positions = ()
            if t.origin is not None:
                positions = tuple(
                    p for i, _ in live
                    for p in [t.origin.exc_positions[i] if i < len(t.origin.exc_positions) else None]
                    if p is not None
                )
            raise ConflictEval(t.pos, positions)
        if len(live) == 1:
            idx, value = live[0]
            self._record(t, "exception #%d" % (idx + 1), idx)
            return value
        just = self.run(t.just, env)
        if just:
            value = self.run(t.cons, env)
            self._record(t, "base case", None)
            return value
        self._record(t, "no applicable definition", None)
        if t.origin is not None and t.origin.pos is not None:
            raise EmptyEval(t.origin.pos, "no definition applied for %s.%s" % (t.origin.scope, t.origin.var))
        raise EmptyEval(t.pos, None)

    def _record(self, t: D.DDefault, branch: str, exc_index) -> None:
        if self.trace is None or t.origin is None:
            return
        origin = t.origin
        if origin.override:
            branch = "caller-provided value" if exc_index is not None else "local definition"
        pos = origin.pos
        if exc_index is not None and not origin.override and exc_index < len(origin.exc_positions):
            pos = origin.exc_positions[exc_index] or pos
        self.trace(origin, branch, pos)


def term_value(t: D.DTerm):
    """Convert a small-step value term into the runtime representation."""
    if isinstance(t, D.DLit):
        return _lit_value(t)
    if isinstance(t, D.DTupleT):
        return tuple(term_value(i) for i in t.items)
    if isinstance(t, D.DStructT):
        return VStruct(t.struct, tuple((n, term_value(v)) for n, v in t.fields))
    if isinstance(t, D.DInject):
        return VEnum(t.enum, t.case, None if t.payload is None else term_value(t.payload))
    if isinstance(t, D.DColl):
        return [term_value(i) for i in t.items]
    if isinstance(t, (D.DLam, D.DEmpty, D.DConflict)):
        raise ValueError("not a first-order plain value: %r" % t)
    raise ValueError(type(t))


# ---------------------------------------------------------------- render


def render_money(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return "%s$%s.%02d" % (sign, format(cents // 100, ","), cents % 100)


def render_value(v) -> str:
    if v is VUNIT:
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, VMoney):
        return render_money(v.cents)
    if isinstance(v, VDuration):
        return "%d day" % v.days
    if isinstance(v, datetime.date):
        return "|%04d-%02d-%02d|" % (v.year, v.month, v.day)
    if isinstance(v, VStruct):
        inner = ", ".join("%s = %s" % (n, render_value(x)) for n, x in v.fields)
        return "%s { %s }" % (v.name, inner)
    if isinstance(v, VEnum):
        if v.payload is None:
            return v.case
        return "%s content %s" % (v.case, render_value(v.payload))
    if isinstance(v, tuple):
        return "(%s)" % ", ".join(render_value(x) for x in v)
    if isinstance(v, list):
        return "[%s]" % "; ".join(render_value(x) for x in v)
    if isinstance(v, VClosure):
        return "<function>"
    raise AssertionError(type(v))

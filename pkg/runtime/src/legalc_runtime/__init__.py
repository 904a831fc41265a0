"""Runtime support for programs emitted by the legalc compiler.

Standard library only. Provides the two error kinds, the exception-list
folding helper, exact money/duration arithmetic on integers, civil-day
date arithmetic, and value rendering that matches the reference
interpreter byte for byte.

Version is pinned to the compiler version that emits code against it.
"""

from __future__ import annotations

import datetime
import sys
from dataclasses import dataclass, fields, is_dataclass

__version__ = "0.1.0"


class RuntimeEmpty(Exception):
    """No applicable definition. Caught only by process_exceptions and the
    default-expression expansions in generated code."""

    def __init__(self, hint: str | None = None, position: str | None = None):
        super().__init__(hint or "no applicable definition")
        self.hint = hint
        self.position = position


class RuntimeConflict(Exception):
    """Two or more definitions applied at once. Never caught by generated
    code; reaching the host application means the source program is wrong."""

    def __init__(self, position: str | None = None):
        super().__init__("conflict: multiple definitions apply")
        self.position = position


class InvalidDate(Exception):
    pass


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "()"


UNIT = _Unit()


@dataclass(frozen=True, order=True)
class Money:
    """Exact amount in integer cents; no floating point anywhere."""

    cents: int

    def __add__(self, other: "Money") -> "Money":
        return Money(self.cents + other.cents)

    def __sub__(self, other: "Money") -> "Money":
        return Money(self.cents - other.cents)


@dataclass(frozen=True, order=True)
class Duration:
    """A time interval, always a whole number of days."""

    days: int

    def __add__(self, other: "Duration") -> "Duration":
        return Duration(self.days + other.days)

    def __sub__(self, other: "Duration") -> "Duration":
        return Duration(self.days - other.days)


@dataclass(frozen=True)
class EnumValue:
    enum: str
    case: str
    payload: object | None = None


def date(year: int, month: int, day: int) -> datetime.date:
    try:
        return datetime.date(year, month, day)
    except ValueError as exc:
        raise InvalidDate(str(exc)) from None


def date_add(d: datetime.date, n: Duration) -> datetime.date:
    """Proleptic Gregorian civil-day addition (leap years included)."""
    try:
        return d + datetime.timedelta(days=n.days)
    except OverflowError as exc:
        raise InvalidDate(str(exc)) from None


def date_diff(d1: datetime.date, d2: datetime.date) -> Duration:
    return Duration((d1 - d2).days)


def int_div(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    if b == 0:
        raise ZeroDivisionError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def money_div(m: Money, b: int) -> Money:
    return Money(int_div(m.cents, b))


def logic_and(a: bool, b: bool) -> bool:
    # Both operands are evaluated by the caller; no short-circuiting.
    return a and b


def logic_or(a: bool, b: bool) -> bool:
    return a or b


def fold_left(f, init, items):
    acc = init
    for item in items:
        acc = f(acc)(item)
    return acc


def process_exceptions(thunks):
    """Left fold over zero-argument callables with a None accumulator.

    None -> value on the first thunk that returns instead of raising
    RuntimeEmpty; a second returning thunk is a RuntimeConflict. Returns
    the winning value, or None when every thunk raised RuntimeEmpty.
    (Generated values are never the Python None object, so the optional
    is unambiguous.)
    """
    acc = None
    found = False
    for thunk in thunks:
        try:
            value = thunk()
            has_value = True
        except RuntimeEmpty:
            value, has_value = None, False
        if has_value:
            if found:
                raise RuntimeConflict()
            acc, found = value, True
    return acc


def raise_empty(hint: str | None = None):
    """Expression-position raise of the empty error."""
    raise RuntimeEmpty(hint)


def raise_conflict(position: str | None = None):
    raise RuntimeConflict(position)


def undefined_thunk(label: str):
    """Override slot for a variable the caller leaves unset."""

    def thunk():
        raise RuntimeEmpty("variable %s was never defined" % label)

    return thunk


# ---------------------------------------------------------------- render


def render_money(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return "%s$%s.%02d" % (sign, format(cents // 100, ","), cents % 100)


def render_value(v) -> str:
    """Rendering identical to the reference interpreter's output."""
    if v is UNIT:
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Money):
        return render_money(v.cents)
    if isinstance(v, Duration):
        return "%d day" % v.days
    if isinstance(v, datetime.date):
        return "|%04d-%02d-%02d|" % (v.year, v.month, v.day)
    if isinstance(v, EnumValue):
        if v.payload is None:
            return v.case
        return "%s content %s" % (v.case, render_value(v.payload))
    if isinstance(v, tuple):
        return "(%s)" % ", ".join(render_value(x) for x in v)
    if isinstance(v, list):
        return "[%s]" % "; ".join(render_value(x) for x in v)
    if is_dataclass(v):  # generated structure classes
        inner = ", ".join(
            "%s = %s" % (f.name, render_value(getattr(v, f.name))) for f in fields(v)
        )
        return "%s { %s }" % (type(v).__name__, inner)
    if callable(v):
        return "<function>"
    raise TypeError("cannot render %r" % (v,))


def format_scope_result(scope: str, names: list[str], values: tuple) -> str:
    return "\n".join(
        "%s.%s = %s" % (scope, n, render_value(v)) for n, v in zip(names, values)
    )


def main(argv, scopes: dict):
    """Entry point for generated modules: run one scope and print it.

    `scopes` maps source scope names to (function, variable-name list).
    Exit status 0 on success, 1 on a semantic error, 2 on usage errors,
    mirroring the compiler's interpreter."""
    if len(argv) != 2 or argv[1] not in scopes:
        print("usage: %s {%s}" % (argv[0], "|".join(scopes)), file=sys.stderr)
        return 2
    name = argv[1]
    fn, var_names = scopes[name]
    overrides = tuple(undefined_thunk("%s.%s" % (name, v)) for v in var_names)
    try:
        result = fn(overrides)
    except RuntimeConflict:
        print("[ERROR] Conflict error: multiple definitions apply", file=sys.stderr)
        return 1
    except RuntimeEmpty as exc:
        print("[ERROR] Error: %s" % (exc.hint or "no applicable definition"), file=sys.stderr)
        return 1
    print(format_scope_result(name, var_names, result))
    return 0

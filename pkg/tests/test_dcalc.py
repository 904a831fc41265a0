import datetime
import random

import pytest

from legalc import dcalc as D
from legalc import types as ty
from legalc.dcalc import (
    DApp,
    DBinOp,
    DConflict,
    DDefault,
    DEmpty,
    DLam,
    DLit,
    DVar,
    TypeEnv,
    dbool,
    eval_term,
    fresh_id,
    is_value,
    step,
    term_equal,
    typecheck,
)
from legalc.errors import TypecheckError
from legalc.harness import gen_symbols, gen_tops, generate_term, TOP_TYPES

E = DEmpty()
CONFLICT = DConflict()
T = dbool(True)
F = dbool(False)


def num(n):
    return DLit("int", n)


# --------------------------------------------------- the 8 reduction rules


def test_rule_d_context():
    # Reduction happens inside an evaluation context.
    t = DBinOp("+", num(1), DBinOp("+", num(2), num(3)))
    t2 = step(t)
    assert term_equal(t2, DBinOp("+", num(1), num(5)))


def test_rule_d_beta():
    x = fresh_id()
    t = DApp(DLam(x, "x", ty.BOOL, DVar(x, "x")), T)
    assert term_equal(step(t), T)


def test_rule_d_context_conflict_error():
    # A conflict aborts through any context, including exception slots.
    inner = DDefault((num(1), num(2)), T, num(0))
    assert isinstance(eval_term(DBinOp("+", num(1), inner)), DConflict)
    outer = DDefault((inner,), T, num(0))
    assert isinstance(eval_term(outer), DConflict)


def test_rule_d_context_empty_error():
    # An empty propagates through ordinary contexts only.
    empties = DDefault((), F, num(0))
    assert isinstance(eval_term(DBinOp("+", num(1), empties)), DEmpty)
    # ... but is contained in an exception slot:
    contained = DDefault((empties,), T, num(9))
    assert eval_term(contained).value == 9


def test_rule_d_default_true_no_exceptions():
    t = DDefault((E, E), T, num(5))
    assert eval_term(t).value == 5


def test_rule_d_default_false_no_exceptions():
    t = DDefault((E, E), F, num(5))
    assert isinstance(eval_term(t), DEmpty)


def test_rule_d_default_one_exception():
    # Justification and consequence stay unevaluated: both would conflict.
    poison = DDefault((num(1), num(2)), T, num(0))
    t = DDefault((E, num(7), E), CONFLICT, poison)
    assert eval_term(t).value == 7


def test_rule_d_default_exceptions_conflict():
    t = DDefault((num(3), E, num(4)), T, num(0))
    assert isinstance(eval_term(t), DConflict)


# --------------------------------------------------------- typing rules


def test_typing_conflict_error_is_polymorphic():
    env = TypeEnv()
    assert typecheck(CONFLICT, env, expected=ty.MONEY) == ty.MONEY
    assert typecheck(CONFLICT, env, expected=ty.BOOL) == ty.BOOL


def test_typing_empty_error_is_polymorphic():
    env = TypeEnv()
    assert typecheck(E, env, expected=ty.MONEY) == ty.MONEY
    assert typecheck(E, env, expected=ty.TArrow(ty.INT, ty.INT)).param == ty.INT


def test_typing_t_default():
    env = TypeEnv()
    assert typecheck(DDefault((), T, F), env) == ty.BOOL
    assert typecheck(DDefault((E, E), T, num(3)), env) == ty.INT


def test_typing_rejects_mixed_branches():
    env = TypeEnv()
    bad = DDefault((DDefault((), T, num(1)),), T, F)
    with pytest.raises(TypecheckError):
        typecheck(bad, env)


def test_typing_rejects_non_boolean_justification():
    with pytest.raises(TypecheckError):
        typecheck(DDefault((), num(1), num(2)), TypeEnv())


# ------------------------------------------------------------- evaluation


def test_eval_beta_example():
    x = fresh_id()
    t = DApp(DLam(x, "x", ty.BOOL, DVar(x, "x")), T)
    assert eval_term(t).value is True


def test_eval_inner_empty_then_base():
    inner = DDefault((), F, T)
    t = DDefault((inner,), T, F)
    assert eval_term(t).value is False


def test_step_none_iff_value():
    assert step(T) is None
    assert step(E) is None
    assert step(CONFLICT) is None
    assert step(DBinOp("+", num(1), num(1))) is not None


def test_step_is_deterministic():
    t = DDefault((DBinOp("+", num(1), num(2)), DBinOp("+", num(3), num(4))), T, num(0))
    a = step(t)
    b = step(t)
    assert term_equal(a, b)


def test_exactly_one_rule_with_conflicting_justification():
    # k = 1 wins even when the justification itself would conflict.
    t = DDefault((num(9),), CONFLICT, CONFLICT)
    assert eval_term(t).value == 9
    # k >= 2 conflicts regardless of everything else.
    t = DDefault((num(1), num(2), E), F, num(0))
    assert isinstance(eval_term(t), DConflict)


# ------------------------------------------------------------- arithmetic


def next_day(d: datetime.date) -> datetime.date:
    """Independent oracle: naive civil-calendar next-day increment."""
    days_in_month = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
    leap = d.year % 4 == 0 and (d.year % 100 != 0 or d.year % 400 == 0)
    dim = 29 if (d.month == 2 and leap) else days_in_month[d.month - 1]
    if d.day < dim:
        return datetime.date(d.year, d.month, d.day + 1)
    if d.month < 12:
        return datetime.date(d.year, d.month + 1, 1)
    return datetime.date(d.year + 1, 1, 1)


def test_date_addition_matches_repeated_increment_oracle():
    rng = random.Random(7)
    for _ in range(25):
        d = datetime.date(rng.randint(1950, 2050), rng.randint(1, 12), rng.randint(1, 28))
        n = rng.randint(0, 1200)
        expect = d
        for _ in range(n):
            expect = next_day(expect)
        got = eval_term(DBinOp("+@", DLit("date", d), DLit("duration", n)))
        assert got.value == expect
        diff = eval_term(DBinOp("-@", DLit("date", expect), DLit("date", d)))
        assert diff.value == n  # diff(d + n, d) = n


def test_leap_year_addition():
    got = eval_term(DBinOp("+@", DLit("date", datetime.date(2020, 2, 28)), DLit("duration", 1)))
    assert got.value == datetime.date(2020, 2, 29)


def test_money_arithmetic_is_exact_cents():
    a = DLit("money", 123456)
    b = DLit("money", 1)
    assert eval_term(DBinOp("+$", a, b)).value == 123457
    assert eval_term(DBinOp("-$", a, b)).value == 123455
    assert eval_term(DBinOp("/$", DLit("money", 100), num(3))).value == 33


def test_integer_division_truncates_toward_zero():
    cases = [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3)]
    for a, b, want in cases:
        assert eval_term(DBinOp("/", num(a), num(b))).value == want


# ------------------------------------------- progress and preservation


def test_progress_and_preservation_on_random_terms():
    rng = random.Random(20240211)
    table = gen_symbols()
    tops = gen_tops()
    for _ in range(300):
        term = generate_term(rng, max_depth=6)
        env = TypeEnv(table, dict(TOP_TYPES))
        tau = typecheck(term, env)
        steps = 0
        while True:
            nxt = step(term, tops)
            if nxt is None:
                assert is_value(term)  # progress: values are the only stuck terms
                break
            term = nxt
            tau2 = typecheck(term, TypeEnv(table, dict(TOP_TYPES)))
            assert ty.compatible(tau, tau2), (tau, tau2)
            tau = ty.join(tau, tau2)
            steps += 1
            assert steps < 10**6


# Hypothesis property: the exactly-one discipline over arbitrary slots.

from hypothesis import given, strategies as st

_slot = st.one_of(st.none(), st.integers(-50, 50))


@given(st.lists(_slot, max_size=6), st.booleans())
def test_exactly_one_property(slots, just):
    excs = tuple(E if s is None else num(s) for s in slots)
    live = [s for s in slots if s is not None]
    poison = DDefault((num(1), num(2)), T, num(0))  # would conflict if reached
    term = DDefault(excs, poison if live else dbool(just), num(77))
    out = eval_term(term)
    if len(live) >= 2:
        assert isinstance(out, DConflict)
    elif len(live) == 1:
        assert out.value == live[0]
    elif just:
        assert out.value == 77
    else:
        assert isinstance(out, DEmpty)

import random

from legalc import dcalc as D
from legalc import lcalc as L
from legalc import types as ty
from legalc.harness import gen_tops, generate_term, run_selftest
from legalc.interp import ConflictEval, EmptyEval, deval, term_value
from legalc.translate import (
    check_simulation,
    check_type_preservation,
    translate,
    translate_with_map,
    values_agree,
)

T = D.dbool(True)
F = D.dbool(False)


def num(n):
    return D.DLit("int", n)


def test_no_exception_default_translates_to_if():
    out = translate(D.DDefault((), T, F))
    assert isinstance(out, L.LIf)
    assert isinstance(out.orelse, L.LRaise) and out.orelse.eps == L.EMPTY


def test_errors_translate_to_raises():
    assert translate(D.DEmpty()).eps == L.EMPTY
    assert translate(D.DConflict()).eps == L.CONFLICT


def test_identity_on_pure_fragment():
    x = D.fresh_id()
    lam = D.DLam(x, "x", ty.BOOL, D.DVar(x, "x"))
    out = translate(lam)
    assert isinstance(out, L.LLam) and isinstance(out.body, L.LVar)
    assert out.var_id == x and out.body.id == x


def test_default_with_exceptions_uses_process_exceptions():
    out = translate(D.DDefault((num(1), num(2)), T, num(0)))
    assert isinstance(out, L.LLet)
    assert isinstance(out.bound, L.LApp) and isinstance(out.bound.fn, L.LProcExc)
    assert isinstance(out.body, L.LMatchOpt)


def test_value_identity_for_first_order_values():
    import datetime

    values = [
        num(5), D.dbool(True), D.DLit("money", 123), D.dunit(),
        D.DLit("date", datetime.date(2020, 1, 1)),
        D.DTupleT((num(1), D.dbool(False))),
        D.DColl((num(1), num(2))),
    ]
    for v in values:
        out = L.l_eval(translate(v))
        assert out.kind == "value"
        assert values_agree(term_value(v), out.value)


def test_translation_map_covers_every_default():
    term = D.DDefault((D.DDefault((), T, num(1)),), T, num(0))
    out = translate_with_map(term)
    mapped = {id(d) for d, _ in out.default_map}
    count = _count_defaults(term)
    assert len(out.default_map) == count
    assert id(term) in mapped


def _count_defaults(t) -> int:
    import dataclasses

    n = 1 if isinstance(t, D.DDefault) else 0
    if not dataclasses.is_dataclass(t):
        return n
    for f in dataclasses.fields(t):
        v = getattr(t, f.name)
        if isinstance(v, D.DTerm):
            n += _count_defaults(v)
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, D.DTerm):
                    n += _count_defaults(item)
                elif isinstance(item, tuple):
                    n += sum(_count_defaults(s) for s in item if isinstance(s, D.DTerm))
    return n


# ----------------------------------------------------- preservation/simulation


def test_type_preservation_spec_examples():
    assert check_type_preservation(D.DDefault((), T, F)).ok
    assert check_type_preservation(D.DEmpty()).ok


def test_simulation_spec_examples():
    E = D.DEmpty()
    assert check_simulation(D.DDefault((E, num(5), E), T, num(0))).ok
    assert check_simulation(D.DDefault((num(3), num(4)), T, num(0))).ok
    assert check_simulation(D.DDefault((E,), F, num(0))).ok


def test_thunked_default_shape_agrees():
    # The exact shape that breaks the naive per-step simulation.
    u = D.fresh_id()
    inner = D.DDefault((D.DEmpty(), num(3)), T, num(0))
    term = D.DApp(D.DLam(u, "u", ty.UNIT, inner), D.dunit())
    assert check_simulation(term).ok


def test_small_differential_run_is_clean():
    report = run_selftest(800, seed=20240808)
    assert report.ok, report.failures[:3]


def test_deval_matches_small_step_on_random_corpus():
    rng = random.Random(99)
    tops = gen_tops()
    for _ in range(500):
        term = generate_term(rng, max_depth=5)
        small = D.eval_term(term, tops)
        try:
            big = deval(term, tops=tops)
            if isinstance(small, (D.DEmpty, D.DConflict)):
                raise AssertionError("small-step errored but deval returned %r" % (big,))
            if isinstance(small, D.DLam):
                continue
            assert values_agree(term_value(small), big)
        except EmptyEval:
            assert isinstance(small, D.DEmpty)
        except ConflictEval:
            assert isinstance(small, D.DConflict)

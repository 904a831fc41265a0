"""Random well-typed term generation and the differential self-test.

The generator produces closed default-calculus terms of bounded depth,
reaching every constructor, and is deliberately biased toward nested
defaults and defaults thunked under lambdas applied to unit: the shape
for which the naive per-step simulation fails and only the joint-outcome
corollary holds.
"""

from __future__ import annotations

import datetime
import random
from dataclasses import dataclass, field

from . import dcalc as D
from . import types as ty
from .parser import parse_text
from .printer import pd
from .translate import check_simulation, check_type_preservation
from .types import SymbolTable, TArrow, TColl, TEnum, TStruct, TTuple

_GEN_DECLS = """```catala
declaration structure GenPair:
  data first content integer
  data second content boolean

declaration enumeration GenShape:
  -- Dot
  -- Box content integer
```
"""


def gen_symbols() -> SymbolTable:
    return SymbolTable(parse_text(_GEN_DECLS, "<generator>"))


PAIR = TStruct("GenPair")
SHAPE = TEnum("GenShape")

TOP_TYPES: dict[str, ty.DType] = {"shared_inc": TArrow(ty.INT, ty.INT)}


def gen_tops() -> dict[str, D.DTerm]:
    x = D.fresh_id()
    return {
        "shared_inc": D.DLam(
            x, "x", ty.INT, D.DBinOp("+", D.DVar(x, "x"), D.DLit("int", 1))
        )
    }


RESULT_POOL: list[ty.DType] = [
    ty.BOOL, ty.INT, ty.MONEY, ty.DURATION, ty.DATE, ty.UNIT,
    TTuple((ty.INT, ty.BOOL)), TColl(ty.INT), PAIR, SHAPE,
]

_ARITH = {
    ty.INT: ["+", "-", "*"],
    ty.MONEY: ["+$", "-$"],
    ty.DURATION: ["+^", "-^"],
}
_CMP_BASE = {ty.INT: "", ty.MONEY: "$", ty.DATE: "@", ty.DURATION: "^"}


@dataclass
class _Gen:
    rng: random.Random
    env: list[tuple[int, str, ty.DType]] = field(default_factory=list)

    def lit(self, typ: ty.DType) -> D.DTerm:
        r = self.rng
        if typ == ty.BOOL:
            return D.dbool(r.random() < 0.5)
        if typ == ty.INT:
            return D.DLit("int", r.randint(-20, 20))
        if typ == ty.MONEY:
            return D.DLit("money", r.randint(-10000, 100000))
        if typ == ty.DURATION:
            return D.DLit("duration", r.randint(0, 900))
        if typ == ty.DATE:
            return D.DLit("date", datetime.date(r.randint(1990, 2050), r.randint(1, 12), r.randint(1, 28)))
        if typ == ty.UNIT:
            return D.dunit()
        if isinstance(typ, TTuple):
            return D.DTupleT(tuple(self.lit(i) for i in typ.items))
        if isinstance(typ, TColl):
            return D.DColl(tuple(self.lit(typ.elem) for _ in range(r.randint(0, 3))))
        if typ == PAIR:
            return D.DStructT("GenPair", (("first", self.lit(ty.INT)), ("second", self.lit(ty.BOOL))))
        if typ == SHAPE:
            if r.random() < 0.5:
                return D.DInject("GenShape", "Dot", None)
            return D.DInject("GenShape", "Box", self.lit(ty.INT))
        if isinstance(typ, TArrow):
            v = D.fresh_id()
            return D.DLam(v, "p", typ.param, self.lit(typ.result))
        raise AssertionError(typ)

    def leaf(self, typ: ty.DType) -> D.DTerm:
        r = self.rng.random()
        if r < 0.06:
            return D.DEmpty()
        if r < 0.10:
            return D.DConflict()
        vars_of_type = [(i, n) for i, n, t in self.env if t == typ]
        if vars_of_type and self.rng.random() < 0.4:
            i, n = self.rng.choice(vars_of_type)
            return D.DVar(i, n)
        return self.lit(typ)

    def gen(self, typ: ty.DType, depth: int) -> D.DTerm:
        if depth <= 0:
            return self.leaf(typ)
        r = self.rng
        roll = r.random()
        if roll < 0.30:
            return self.default(typ, depth)
        if roll < 0.38:
            return self.thunked_default(typ, depth)
        if roll < 0.46:
            return D.DIf(self.gen(ty.BOOL, depth - 1), self.gen(typ, depth - 1), self.gen(typ, depth - 1))
        if roll < 0.54:
            return self.let(typ, depth)
        if roll < 0.60:
            return self.app(typ, depth)
        if roll < 0.64:
            return self.match(typ, depth)
        if roll < 0.92:
            out = self.typed_form(typ, depth)
            if out is not None:
                return out
        return self.leaf(typ)

    def default(self, typ: ty.DType, depth: int) -> D.DTerm:
        n = self.rng.randint(0, 3)
        excs = tuple(self.gen(typ, depth - 1) for _ in range(n))
        return D.DDefault(excs, self.gen(ty.BOOL, depth - 1), self.gen(typ, depth - 1))

    def thunked_default(self, typ: ty.DType, depth: int) -> D.DTerm:
        u = D.fresh_id()
        body = self.default(typ, depth)
        return D.DApp(D.DLam(u, "u", ty.UNIT, body), D.dunit())

    def let(self, typ: ty.DType, depth: int) -> D.DTerm:
        bound_ty = self.rng.choice([ty.INT, ty.BOOL, ty.MONEY, typ])
        v = D.fresh_id()
        bound = self.gen(bound_ty, depth - 1)
        self.env.append((v, "x", bound_ty))
        body = self.gen(typ, depth - 1)
        self.env.pop()
        return D.DLet(v, "x", bound, body)

    def app(self, typ: ty.DType, depth: int) -> D.DTerm:
        if typ == ty.INT and self.rng.random() < 0.3:
            return D.DApp(D.DTop("shared_inc"), self.gen(ty.INT, depth - 1))
        param_ty = self.rng.choice([ty.INT, ty.BOOL, ty.UNIT])
        v = D.fresh_id()
        self.env.append((v, "a", param_ty))
        body = self.gen(typ, depth - 1)
        self.env.pop()
        return D.DApp(D.DLam(v, "a", param_ty, body), self.gen(param_ty, depth - 1))

    def match(self, typ: ty.DType, depth: int) -> D.DTerm:
        scrut = self.gen(SHAPE, depth - 1)
        v = D.fresh_id()
        self.env.append((v, "payload", ty.INT))
        box_body = self.gen(typ, depth - 1)
        self.env.pop()
        return D.DMatch(scrut, "GenShape", (
            ("Dot", None, self.gen(typ, depth - 1)),
            ("Box", (v, "payload"), box_body),
        ))

    def typed_form(self, typ: ty.DType, depth: int) -> D.DTerm | None:
        r = self.rng
        if typ in _ARITH:
            op = r.choice(_ARITH[typ])
            return D.DBinOp(op, self.gen(typ, depth - 1), self.gen(typ, depth - 1))
        if typ == ty.DATE:
            return D.DBinOp("+@", self.gen(ty.DATE, depth - 1), D.DLit("duration", r.randint(0, 400)))
        if typ == ty.BOOL:
            roll = r.random()
            if roll < 0.3:
                base = r.choice([ty.INT, ty.MONEY, ty.DATE, ty.DURATION])
                op = r.choice(["<", "<=", ">", ">="]) + _CMP_BASE[base]
                return D.DBinOp(op, self.gen(base, depth - 1), self.gen(base, depth - 1))
            if roll < 0.5:
                return D.DNot(self.gen(ty.BOOL, depth - 1))
            if roll < 0.7:
                base = r.choice([ty.INT, ty.BOOL, ty.DURATION])
                return D.DBinOp("=", self.gen(base, depth - 1), self.gen(base, depth - 1))
            return D.DBinOp(r.choice(["and", "or"]), self.gen(ty.BOOL, depth - 1), self.gen(ty.BOOL, depth - 1))
        if typ == ty.INT:
            roll = r.random()
            if roll < 0.3:
                return D.DProj(self.gen(TTuple((ty.INT, ty.BOOL)), depth - 1), 0)
            if roll < 0.5:
                return D.DFieldT(self.gen(PAIR, depth - 1), "first")
            if roll < 0.7:
                acc, x = D.fresh_id(), D.fresh_id()
                fn = D.DLam(acc, "acc", ty.INT,
                            D.DLam(x, "x", ty.INT,
                                   D.DBinOp("+", D.DVar(acc, "acc"), D.DVar(x, "x"))))
                return D.DFold(fn, self.gen(ty.INT, depth - 1), self.gen(TColl(ty.INT), depth - 1))
            return None
        if isinstance(typ, TTuple):
            return D.DTupleT(tuple(self.gen(i, depth - 1) for i in typ.items))
        if isinstance(typ, TColl):
            return D.DColl(tuple(self.gen(typ.elem, depth - 1) for _ in range(r.randint(0, 3))))
        if typ == PAIR:
            return D.DStructT("GenPair", (
                ("first", self.gen(ty.INT, depth - 1)),
                ("second", self.gen(ty.BOOL, depth - 1)),
            ))
        if typ == SHAPE:
            if r.random() < 0.4:
                return D.DInject("GenShape", "Dot", None)
            return D.DInject("GenShape", "Box", self.gen(ty.INT, depth - 1))
        return None


def generate_term(rng: random.Random, max_depth: int = 6) -> D.DTerm:
    typ = rng.choice(RESULT_POOL)
    return _Gen(rng).gen(typ, rng.randint(1, max_depth))


@dataclass
class SelftestReport:
    total: int
    agreed: int
    type_preserved: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.agreed == self.total and self.type_preserved == self.total


def run_selftest(n: int, seed: int, max_depth: int = 6, budget: int = 10**6,
                 progress=None) -> SelftestReport:
    rng = random.Random(seed)
    table = gen_symbols()
    tops = gen_tops()
    report = SelftestReport(total=n, agreed=0, type_preserved=0)
    for i in range(n):
        term = generate_term(rng, max_depth)
        tp = check_type_preservation(term, table, TOP_TYPES)
        if tp.ok:
            report.type_preserved += 1
        else:
            report.failures.append("type preservation: %s\n  %s" % (tp.detail, pd(term)))
        sim = check_simulation(term, tops, budget)
        if sim.ok:
            report.agreed += 1
        else:
            report.failures.append("outcome disagreement: %s\n  %s" % (sim.detail, pd(term)))
        if progress is not None and (i + 1) % 1000 == 0:
            progress(i + 1, n)
    return report

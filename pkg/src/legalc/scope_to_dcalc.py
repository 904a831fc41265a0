"""Compile linearized scopes into default-calculus functions.

A scope becomes a top-level function taking one tuple of thunked overrides
(one slot per context variable, unit -> tau each) and returning the tuple
of all its variables, forced. Each definition shadows its binding with
    let x = < x () | true :- e >
so a caller-provided value takes precedence over the local default; calls
re-thunk forced values and rebind the callee's variables as forced.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

from . import dcalc as D
from . import scopelang as SL
from . import surface as S
from . import types as ty
from .desugar import DefaultExpr, MaterializedDef
from .errors import SourcePosition, StructuredError, TypecheckError
from .types import DType, SymbolTable, TArrow, TColl, TEnum, TStruct, TTuple


@dataclass
class _Binding:
    var_id: int
    name: str
    dtype: DType
    forced: bool  # member of the Delta set


@dataclass
class CompiledProgram:
    order: list[str]
    tops: dict[str, D.DTerm]
    top_types: dict[str, DType]
    scopes: dict[str, SL.ScopeDecl]
    table: SymbolTable

    def scope_locals(self, scope: str) -> list[tuple[str, DType]]:
        return self.scopes[scope].variables

    def type_env(self) -> D.TypeEnv:
        return D.TypeEnv(self.table, dict(self.top_types))


def scope_fn_type(variables: list[tuple[str, DType]]) -> TArrow:
    thunks = TTuple(tuple(TArrow(ty.UNIT, t) for _, t in variables))
    outs = TTuple(tuple(t for _, t in variables))
    return TArrow(thunks, outs)


class _ExprCompiler:
    """Surface expression to default-calculus term, with type synthesis."""

    def __init__(self, table: SymbolTable, scope: SL.ScopeDecl,
                 bindings: dict[tuple, _Binding]):
        self.table = table
        self.scope = scope
        self.bindings = bindings
        self.binders: dict[str, tuple[int, DType]] = {}

    def _ref(self, key: tuple, pos: SourcePosition) -> tuple[D.DTerm, DType]:
        b = self.bindings[key]
        var = D.DVar(b.var_id, b.name, pos)
        if b.forced:
            return var, b.dtype
        # Reading a still-thunked binding forces it at the read position.
        return D.DApp(var, D.dunit(pos), pos), b.dtype

    def compile(self, e: S.Expr) -> tuple[D.DTerm, DType]:
        if isinstance(e, S.ELit):
            return self._literal(e)
        if isinstance(e, S.EIdent):
            if e.name in self.binders:
                vid, t = self.binders[e.name]
                return D.DVar(vid, e.name, e.pos), t
            if ("v", e.name) in self.bindings:
                return self._ref(("v", e.name), e.pos)
            if e.name in self.table.case_owner:
                enum, _ = self.table.case_owner[e.name]
                cases = dict(self.table.enum_cases(enum))
                if cases[e.name] is not None:
                    raise TypecheckError(
                        "case %s needs a content payload" % e.name, [(None, e.pos)]
                    )
                return D.DInject(enum, e.name, None, e.pos), TEnum(enum)
            raise TypecheckError(
                "unknown variable %s in scope %s" % (e.name, self.scope.name),
                [(None, e.pos)],
            )
        if isinstance(e, S.EField):
            if isinstance(e.base, S.EIdent) and e.base.name not in self.binders:
                inst = self.scope.instance(e.base.name)
                if inst is not None:
                    key = ("s", inst.name, e.field)
                    if key not in self.bindings:
                        raise TypecheckError(
                            "scope %s has no variable %s" % (inst.scope, e.field),
                            [(None, e.pos)],
                        )
                    return self._ref(key, e.pos)
            base, bt = self.compile(e.base)
            if not isinstance(bt, TStruct):
                raise TypecheckError(
                    "field access on a non-structure value", [(None, e.pos)]
                )
            ft = self.table.field_type(bt.name, e.field, e.pos)
            return D.DFieldT(base, e.field, e.pos), ft
        if isinstance(e, S.EApp):
            fn, ft = self.compile(e.fn)
            arg, _ = self.compile(e.arg)
            if not isinstance(ft, TArrow):
                raise TypecheckError(
                    "only function variables can be applied with of", [(None, e.pos)]
                )
            return D.DApp(fn, arg, e.pos), ft.result
        if isinstance(e, S.EIf):
            cond, _ = self.compile(e.cond)
            then, tt = self.compile(e.then)
            orelse, _ = self.compile(e.orelse)
            return D.DIf(cond, then, orelse, e.pos), tt
        if isinstance(e, S.EMatch):
            return self._match(e)
        if isinstance(e, S.EInject):
            if e.case not in self.table.case_owner:
                raise TypecheckError("unknown enumeration case %s" % e.case, [(None, e.pos)])
            enum, _ = self.table.case_owner[e.case]
            payload_ty = dict(self.table.enum_cases(enum))[e.case]
            if payload_ty is None:
                raise TypecheckError("case %s takes no content" % e.case, [(None, e.pos)])
            payload, _ = self.compile(e.payload)
            return D.DInject(enum, e.case, payload, e.pos), TEnum(enum)
        if isinstance(e, S.EStructBuild):
            return self._struct_build(e)
        if isinstance(e, S.ECollection):
            items = []
            elem: DType = ty.ANY
            for item in e.items:
                t, it = self.compile(item)
                items.append(t)
                elem = ty.join(elem, it)
            return D.DColl(tuple(items), e.pos), TColl(elem)
        if isinstance(e, S.ESum):
            return self._sum(e)
        if isinstance(e, S.ECardinal):
            coll, _ = self.compile(e.coll)
            acc = D.fresh_id()
            x = D.fresh_id()
            one = D.DLit("int", 1, e.pos)
            fn = D.DLam(acc, "acc", ty.INT,
                        D.DLam(x, "item", ty.ANY,
                               D.DBinOp("+", D.DVar(acc, "acc", e.pos), one, e.pos), e.pos), e.pos)
            return D.DFold(fn, D.DLit("int", 0, e.pos), coll, e.pos), ty.INT
        if isinstance(e, S.EBinOp):
            left, lt = self.compile(e.left)
            right, _ = self.compile(e.right)
            out = self._op_result(e.op, lt, e.pos)
            return D.DBinOp(e.op, left, right, e.pos), out
        if isinstance(e, S.ENot):
            inner, _ = self.compile(e.operand)
            return D.DNot(inner, e.pos), ty.BOOL
        if isinstance(e, S.EIs):
            operand, ot = self.compile(e.operand)
            if e.case not in self.table.case_owner:
                raise TypecheckError("unknown enumeration case %s" % e.case, [(None, e.pos)])
            enum, _ = self.table.case_owner[e.case]
            arms = tuple(
                (case, None, D.dbool(case == e.case, e.pos))
                for case, _ in self.table.enum_cases(enum)
            )
            return D.DMatch(operand, enum, arms, e.pos), ty.BOOL
        raise AssertionError(type(e))

    def _literal(self, e: S.ELit) -> tuple[D.DTerm, DType]:
        if e.kind == "bool":
            return D.dbool(e.value, e.pos), ty.BOOL
        if e.kind == "integer":
            return D.DLit("int", e.value, e.pos), ty.INT
        if e.kind == "money":
            return D.DLit("money", e.value, e.pos), ty.MONEY
        if e.kind == "duration":
            return D.DLit("duration", e.value, e.pos), ty.DURATION
        assert e.kind == "date"
        y, m, d = e.value
        try:
            value = datetime.date(y, m, d)
        except ValueError:
            raise StructuredError("invalid date literal", [(None, e.pos)])
        return D.DLit("date", value, e.pos), ty.DATE

    def _match(self, e: S.EMatch) -> tuple[D.DTerm, DType]:
        scrut, st = self.compile(e.scrutinee)
        if not isinstance(st, TEnum):
            raise TypecheckError("match needs an enumeration value", [(None, e.pos)])
        cases = self.table.enum_cases(st.name)
        by_case = {arm.case: arm for arm in e.arms}
        if sorted(by_case) != sorted(c for c, _ in cases) or len(e.arms) != len(cases):
            raise TypecheckError(
                "match must cover each case of %s exactly once" % st.name,
                [(None, e.pos)],
            )
        arms = []
        out: DType = ty.ANY
        for case, payload in cases:
            arm = by_case[case]
            saved = None
            binder = None
            if arm.binder is not None:
                if payload is None:
                    raise TypecheckError(
                        "case %s has no content to bind" % case, [(None, arm.pos)]
                    )
                vid = D.fresh_id()
                binder = (vid, arm.binder)
                saved = self.binders.get(arm.binder)
                self.binders[arm.binder] = (vid, payload)
            body, bt = self.compile(arm.body)
            if arm.binder is not None:
                if saved is None:
                    del self.binders[arm.binder]
                else:
                    self.binders[arm.binder] = saved
            out = ty.join(out, bt)
            arms.append((case, binder, body))
        return D.DMatch(scrut, st.name, tuple(arms), e.pos), out

    def _struct_build(self, e: S.EStructBuild) -> tuple[D.DTerm, DType]:
        if e.struct not in self.table.structs:
            raise TypecheckError("unknown structure %s" % e.struct, [(None, e.pos)])
        decl = self.table.struct_fields(e.struct)
        given = dict(e.fields)
        if sorted(given) != sorted(n for n, _ in decl) or len(e.fields) != len(decl):
            raise TypecheckError(
                "structure literal must set each field of %s exactly once" % e.struct,
                [(None, e.pos)],
            )
        fields = []
        for name, _ in decl:  # declaration order fixes evaluation order
            t, _ = self.compile(given[name])
            fields.append((name, t))
        return D.DStructT(e.struct, tuple(fields), e.pos), TStruct(e.struct)

    _SUM_OPS = {"int": ("+", D.DLit("int", 0)), "money": ("+$", D.DLit("money", 0)),
                "duration": ("+^", D.DLit("duration", 0))}

    def _sum(self, e: S.ESum) -> tuple[D.DTerm, DType]:
        coll, ct = self.compile(e.coll)
        elem = ct.elem if isinstance(ct, TColl) else ty.ANY
        vid = D.fresh_id()
        saved = self.binders.get(e.binder)
        self.binders[e.binder] = (vid, elem)
        body, bt = self.compile(e.body)
        if saved is None:
            del self.binders[e.binder]
        else:
            self.binders[e.binder] = saved
        tag = bt.name if isinstance(bt, ty.TBase) else None
        if tag not in self._SUM_OPS:
            raise TypecheckError(
                "sum needs integer, money or duration items", [(None, e.pos)]
            )
        op, zero = self._SUM_OPS[tag]
        acc = D.fresh_id()
        fn = D.DLam(acc, "acc", bt,
                    D.DLam(vid, e.binder, elem,
                           D.DBinOp(op, D.DVar(acc, "acc", e.pos), body, e.pos), e.pos), e.pos)
        return D.DFold(fn, zero, coll, e.pos), bt

    def _op_result(self, op: str, left: DType, pos) -> DType:
        if op == "=":
            return ty.BOOL
        sig = D._OP_SIG.get(op)
        if sig is None:
            raise TypecheckError("unknown operator %s" % op, [(None, pos)])
        return sig[2]


def _default_term(comp: _ExprCompiler, mdef: MaterializedDef, dtype: DType) -> D.DTerm:
    """Materialized default tree to a term; function defs wrap a lambda."""
    param_binder = None
    if mdef.param is not None:
        if not isinstance(dtype, TArrow):
            raise TypecheckError(
                "definition of %s takes a parameter but the variable is not a function"
                % ".".join(mdef.var),
                [(None, mdef.pos)],
            )
        vid = D.fresh_id()
        comp.binders[mdef.param] = (vid, dtype.param)
        param_binder = (vid, mdef.param, dtype.param)

    var_name = ".".join(mdef.var)

    def build(dx: DefaultExpr) -> D.DTerm:
        excs = tuple(build(x) for x in dx.exceptions)
        just, _ = comp.compile(dx.just)
        if dx.cons is None:
            cons: D.DTerm = D.DEmpty(pos=dx.pos)
        else:
            cons, _ = comp.compile(dx.cons)
        origin = D.DefaultOrigin(
            scope=mdef.scope,
            var=var_name,
            exc_positions=tuple(x.pos for x in dx.exceptions),
            pos=dx.pos,
        )
        return D.DDefault(excs, just, cons, dx.pos, origin)

    term = build(mdef.dexpr)
    if param_binder is not None:
        vid, name, pt = param_binder
        term = D.DLam(vid, name, pt, term, mdef.pos)
        del comp.binders[mdef.param]
    return term


def compile_scope(table: SymbolTable, sc: SL.ScopeDecl) -> D.DTerm:
    """C-Scope: prelude of projections and empty thunks, then the atoms."""
    param_id = D.fresh_id()
    lets: list[tuple[int, str, D.DTerm]] = []
    bindings: dict[tuple, _Binding] = {}

    for k, (name, vt) in enumerate(sc.variables):
        vid = D.fresh_id()
        lets.append((vid, name, D.DProj(D.DVar(param_id, "overrides"), k)))
        bindings[("v", name)] = _Binding(vid, name, vt, False)

    for inst in sc.instances:
        for y, yt in _callee_locals(table, inst.scope):
            vid = D.fresh_id()
            hint = "variable %s.%s was never defined" % (inst.scope, y)
            thunk = D.DLam(D.fresh_id(), "_", ty.UNIT, D.DEmpty(hint=hint))
            lets.append((vid, "%s.%s" % (inst.name, y), thunk))
            bindings[("s", inst.name, y)] = _Binding(vid, "%s.%s" % (inst.name, y), yt, False)

    comp = _ExprCompiler(table, sc, bindings)

    for atom in sc.atoms:
        if isinstance(atom, SL.DefAtom):
            _compile_def(comp, bindings, lets, atom)
        else:
            _compile_call(table, sc, bindings, lets, atom)

    # C-Empty: force every local and return the tuple.
    outs = []
    for name, _ in sc.variables:
        b = bindings[("v", name)]
        decl_pos = next(cv.pos for cv in sc.decl.context if cv.name == name)
        if b.forced:
            outs.append(D.DVar(b.var_id, name, decl_pos))
        else:
            outs.append(D.DApp(D.DVar(b.var_id, name, decl_pos), D.dunit(decl_pos), decl_pos))
    body: D.DTerm = D.DTupleT(tuple(outs), sc.decl.pos)
    for vid, name, bound in reversed(lets):
        body = D.DLet(vid, name, bound, body, sc.decl.pos)
    thunks = TTuple(tuple(TArrow(ty.UNIT, t) for _, t in sc.variables))
    return D.DLam(param_id, "overrides", thunks, body, sc.decl.pos)


def _compile_def(comp, bindings, lets, atom: SL.DefAtom) -> None:
    loc = atom.loc
    key = ("v", loc.name) if isinstance(loc, SL.ScopeVar) else ("s", loc.instance, loc.var)
    prev = bindings[key]
    mdef = atom.default
    local = _default_term(comp, mdef, atom.dtype)
    override = D.DApp(D.DVar(prev.var_id, prev.name, mdef.pos), D.dunit(mdef.pos), mdef.pos)
    wrapped = D.DDefault(
        (override,), D.dbool(True, mdef.pos), local, mdef.pos,
        D.DefaultOrigin(mdef.scope, ".".join(mdef.var), (None,), mdef.pos, override=True),
    )
    vid = D.fresh_id()
    lets.append((vid, prev.name, wrapped))
    bindings[key] = _Binding(vid, prev.name, prev.dtype, True)


def _compile_call(table, sc, bindings, lets, atom: SL.CallAtom) -> None:
    inst = atom.instance
    assert inst.scope != sc.name, "recursion is rejected before compilation"
    callee = _callee_locals(table, inst.scope)
    args = []
    for y, yt in callee:
        b = bindings[("s", inst.name, y)]
        if b.forced:
            # T-In: re-thunk the already-forced value.
            args.append(D.DLam(D.fresh_id(), "_", ty.UNIT, D.DVar(b.var_id, b.name, inst.pos), inst.pos))
        else:
            # T-NotIn: pass the existing thunk unchanged.
            args.append(D.DVar(b.var_id, b.name, inst.pos))
    call = D.DApp(D.DTop(inst.scope, inst.pos), D.DTupleT(tuple(args), inst.pos), inst.pos)
    rid = D.fresh_id()
    lets.append((rid, "%s()" % inst.instance_id, call))
    for j, (y, yt) in enumerate(callee):
        vid = D.fresh_id()
        name = "%s.%s" % (inst.name, y)
        lets.append((vid, name, D.DProj(D.DVar(rid, "%s()" % inst.instance_id, inst.pos), j, inst.pos)))
        bindings[("s", inst.name, y)] = _Binding(vid, name, yt, True)


def _callee_locals(table: SymbolTable, scope: str) -> list[tuple[str, DType]]:
    decl = table.program.scope_decls[scope]
    return [(cv.name, table.var_type(cv)) for cv in decl.context if cv.sub_scope is None]


def compile_program(table: SymbolTable, scopes: list[SL.ScopeDecl]) -> CompiledProgram:
    tops: dict[str, D.DTerm] = {}
    top_types: dict[str, DType] = {}
    for sc in scopes:
        top_types[sc.name] = scope_fn_type(sc.variables)
    for sc in scopes:
        tops[sc.name] = compile_scope(table, sc)
    return CompiledProgram(
        order=[sc.name for sc in scopes],
        tops=tops,
        top_types=top_types,
        scopes={sc.name: sc for sc in scopes},
        table=table,
    )


def typecheck_program(prog: CompiledProgram) -> None:
    env = prog.type_env()
    for name in prog.order:
        got = D.typecheck(prog.tops[name], env)
        want = prog.top_types[name]
        if not ty.compatible(got, want):
            raise TypecheckError(
                "scope %s compiled to an ill-typed function" % name,
                [(None, prog.scopes[name].decl.pos)],
            )

"""The first intermediate representation: per-scope atom lists over
locations, produced by two topological sorts (definitions within a scope,
then the scopes themselves)."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from . import surface as S
from .desugar import DefaultExpr, MaterializedDef, VarKey, desugar_scope
from .errors import CycleError, ScopeRecursionError, SourcePosition, TypecheckError
from .types import DType, SymbolTable


@dataclass(frozen=True)
class ScopeVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SubScopeVar:
    instance: str  # user-facing instance name
    instance_id: str  # <ScopeName>_<k>
    scope: str  # callee scope
    var: str

    def __str__(self):
        return "%s[%s]" % (self.instance_id, self.var)


Location = ScopeVar | SubScopeVar


@dataclass(frozen=True)
class SubScopeInstance:
    name: str
    instance_id: str
    scope: str
    pos: SourcePosition


@dataclass
class DefAtom:
    loc: Location
    dtype: DType
    default: MaterializedDef


@dataclass
class CallAtom:
    instance: SubScopeInstance


Atom = DefAtom | CallAtom


@dataclass
class ScopeDecl:
    """A linearized scope: declared variables, instances, sorted atoms."""

    name: str
    decl: S.ScopeDecl
    variables: list[tuple[str, DType]]  # declaration order, sub-scopes excluded
    instances: list[SubScopeInstance]  # declaration order
    atoms: list[Atom] = field(default_factory=list)
    edges: list[tuple[str, str, SourcePosition]] = field(default_factory=list)

    def instance(self, name: str) -> SubScopeInstance | None:
        for inst in self.instances:
            if inst.name == name:
                return inst
        return None

    def var_names(self) -> list[str]:
        return [n for n, _ in self.variables]


class Resolver:
    """Classifies identifiers inside one scope's expressions."""

    def __init__(self, table: SymbolTable, scope: ScopeDecl):
        self.table = table
        self.scope = scope
        self.vars = {n for n, _ in scope.variables}
        self.subs = {inst.name: inst for inst in scope.instances}

    def mentions(self, expr: S.Expr, bound: frozenset[str] = frozenset()) -> list[tuple[Location, SourcePosition]]:
        out: list[tuple[Location, SourcePosition]] = []
        self._walk(expr, bound, out)
        return out

    def _loc_of_field(self, e: S.EField) -> Location | None:
        base = e.base
        if isinstance(base, S.EIdent) and base.name in self.subs:
            inst = self.subs[base.name]
            return SubScopeVar(inst.name, inst.instance_id, inst.scope, e.field)
        return None

    def _walk(self, e: S.Expr, bound: frozenset[str], out: list) -> None:
        if isinstance(e, S.EIdent):
            if e.name in bound:
                return
            if e.name in self.vars:
                out.append((ScopeVar(e.name), e.pos))
                return
            if e.name in self.table.case_owner:
                return  # payload-less enumeration injection
            if e.name in self.subs:
                raise TypecheckError(
                    "sub-scope %s cannot be used as a value; access one of its variables"
                    % e.name,
                    [(None, e.pos)],
                )
            raise TypecheckError(
                "unknown variable %s in scope %s" % (e.name, self.scope.name),
                [(None, e.pos)],
            )
        if isinstance(e, S.EField):
            loc = self._loc_of_field(e)
            if loc is not None:
                if isinstance(e.base, S.EIdent) and e.base.name in bound:
                    pass  # a binder shadows the instance name
                else:
                    out.append((loc, e.pos))
                    return
            self._walk(e.base, bound, out)
            return
        if isinstance(e, S.EApp):
            self._walk(e.fn, bound, out)
            self._walk(e.arg, bound, out)
        elif isinstance(e, S.EIf):
            for sub in (e.cond, e.then, e.orelse):
                self._walk(sub, bound, out)
        elif isinstance(e, S.EMatch):
            self._walk(e.scrutinee, bound, out)
            for arm in e.arms:
                inner = bound | {arm.binder} if arm.binder else bound
                self._walk(arm.body, inner, out)
        elif isinstance(e, S.EInject):
            if e.payload is not None:
                self._walk(e.payload, bound, out)
        elif isinstance(e, S.EStructBuild):
            for _, fe in e.fields:
                self._walk(fe, bound, out)
        elif isinstance(e, S.ECollection):
            for item in e.items:
                self._walk(item, bound, out)
        elif isinstance(e, S.ESum):
            self._walk(e.coll, bound, out)
            self._walk(e.body, bound | {e.binder}, out)
        elif isinstance(e, S.ECardinal):
            self._walk(e.coll, bound, out)
        elif isinstance(e, S.EBinOp):
            self._walk(e.left, bound, out)
            self._walk(e.right, bound, out)
        elif isinstance(e, S.ENot):
            self._walk(e.operand, bound, out)
        elif isinstance(e, S.EIs):
            self._walk(e.operand, bound, out)


def default_mentions(res: Resolver, mdef: MaterializedDef) -> list[tuple[Location, SourcePosition]]:
    """All locations read anywhere in a materialized default tree."""
    bound = frozenset([mdef.param]) if mdef.param else frozenset()
    out: list[tuple[Location, SourcePosition]] = []

    def walk(d: DefaultExpr) -> None:
        out.extend(res.mentions(d.just, bound))
        if d.cons is not None:
            out.extend(res.mentions(d.cons, bound))
        for ex in d.exceptions:
            walk(ex)

    walk(mdef.dexpr)
    return out


def _instances_of(table: SymbolTable, decl: S.ScopeDecl) -> list[SubScopeInstance]:
    counters: dict[str, int] = {}
    out = []
    for cv in decl.context:
        if cv.sub_scope is None:
            continue
        if cv.sub_scope not in table.program.scope_decls:
            raise TypecheckError(
                "unknown scope %s for sub-scope %s" % (cv.sub_scope, cv.name),
                [(None, cv.pos)],
            )
        counters[cv.sub_scope] = counters.get(cv.sub_scope, 0) + 1
        out.append(
            SubScopeInstance(
                cv.name, "%s_%d" % (cv.sub_scope, counters[cv.sub_scope]), cv.sub_scope, cv.pos
            )
        )
    return out


def _resolve_target(scope: ScopeDecl, var: VarKey, pos: SourcePosition, table: SymbolTable) -> Location:
    if len(var) == 1:
        name = var[0]
        if name in {n for n, _ in scope.variables}:
            return ScopeVar(name)
        inst = scope.instance(name)
        if inst is not None:
            raise TypecheckError(
                "cannot define the sub-scope %s itself; define one of its variables" % name,
                [(None, pos)],
            )
        raise TypecheckError(
            "definition of unknown variable %s in scope %s" % (name, scope.name),
            [(None, pos)],
        )
    inst_name, var_name = var
    inst = scope.instance(inst_name)
    if inst is None:
        raise TypecheckError(
            "unknown sub-scope %s in scope %s" % (inst_name, scope.name),
            [(None, pos)],
        )
    callee = table.program.scope_decls[inst.scope]
    cv = callee.var(var_name)
    if cv is None or cv.sub_scope is not None:
        raise TypecheckError(
            "scope %s has no variable %s" % (inst.scope, var_name), [(None, pos)]
        )
    return SubScopeVar(inst.name, inst.instance_id, inst.scope, var_name)


def _loc_type(table: SymbolTable, scope: ScopeDecl, loc: Location) -> DType:
    if isinstance(loc, ScopeVar):
        for n, t in scope.variables:
            if n == loc.name:
                return t
        raise AssertionError(loc)
    callee = table.program.scope_decls[loc.scope]
    cv = callee.var(loc.var)
    assert cv is not None
    return table.var_type(cv)


def build_scope(table: SymbolTable, prog: S.SurfaceProgram, name: str) -> ScopeDecl:
    """Desugar one scope's uses and sort its atoms topologically."""
    decl = prog.scope_decls[name]
    variables = [
        (cv.name, table.var_type(cv)) for cv in decl.context if cv.sub_scope is None
    ]
    scope = ScopeDecl(name, decl, variables, _instances_of(table, decl))
    _, materialized = desugar_scope(name, prog.uses_of(name))
    res = Resolver(table, scope)

    # Graph nodes: "v:<name>" for variables, "s:<instance>" for sub-scopes.
    order: dict[str, int] = {}
    for idx, cv in enumerate(decl.context):
        key = ("s:" if cv.sub_scope else "v:") + cv.name
        order[key] = idx
    defs_by_node: dict[str, list[tuple[Location, MaterializedDef]]] = {k: [] for k in order}
    succ: dict[str, list[str]] = {k: [] for k in order}
    indeg: dict[str, int] = {k: 0 for k in order}
    edge_pos: dict[tuple[str, str], SourcePosition] = {}

    def add_edge(a: str, b: str, pos: SourcePosition) -> None:
        if a == b:
            raise CycleError(
                "definition of a sub-scope input reads one of the same sub-scope's variables",
                [(None, pos)],
            )
        if (a, b) not in edge_pos:
            edge_pos[(a, b)] = pos
            succ[a].append(b)
            indeg[b] += 1
            scope.edges.append((a, b, pos))

    for var, mdef in materialized.items():
        loc = _resolve_target(scope, var, mdef.pos, table)
        node = "v:" + loc.name if isinstance(loc, ScopeVar) else "s:" + loc.instance
        defs_by_node[node].append((loc, mdef))
        for mention, pos in default_mentions(res, mdef):
            src = "v:" + mention.name if isinstance(mention, ScopeVar) else "s:" + mention.instance
            if src == node and isinstance(loc, ScopeVar):
                raise CycleError(
                    "the definition of %s refers to %s itself" % (loc.name, loc.name),
                    [(None, pos)],
                )
            add_edge(src, node, pos)

    # Kahn's algorithm; ties broken by declaration order for determinism.
    ready = [(order[k], k) for k in order if indeg[k] == 0]
    heapq.heapify(ready)
    emitted: list[str] = []
    while ready:
        _, node = heapq.heappop(ready)
        emitted.append(node)
        if node.startswith("v:"):
            for loc, mdef in defs_by_node[node]:
                scope.atoms.append(DefAtom(loc, _loc_type(table, scope, loc), mdef))
        else:
            inputs = sorted(defs_by_node[node], key=lambda lm: (lm[1].pos, lm[0].var))
            for loc, mdef in inputs:
                scope.atoms.append(DefAtom(loc, _loc_type(table, scope, loc), mdef))
            inst = scope.instance(node[2:])
            assert inst is not None
            scope.atoms.append(CallAtom(inst))
        for nxt in succ[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, (order[nxt], nxt))
    if len(emitted) != len(order):
        _report_cycle(scope, set(order) - set(emitted), succ, edge_pos)
    return scope


def _report_cycle(scope: ScopeDecl, remaining: set[str], succ, edge_pos) -> None:
    # Every leftover node keeps an incoming edge from another leftover node,
    # so walking predecessors must loop; the loop is the reported cycle.
    pred: dict[str, str] = {}
    for (a, b) in edge_pos:
        if a in remaining and b in remaining:
            pred.setdefault(b, a)
    start = sorted(remaining)[0]
    path = [start]
    seen = {start}
    node = start
    while True:
        node = pred[node]
        if node in seen:
            break
        seen.add(node)
        path.append(node)
    # path[j:] walks predecessor edges; reverse it to get the forward cycle.
    forward = [node] + list(reversed(path[path.index(node):]))
    positions = []
    for a, b in zip(forward, forward[1:]):
        positions.append(("%s is used here:" % a[2:], edge_pos[(a, b)]))
    names = " -> ".join(n[2:] for n in forward)
    raise CycleError(
        "the variables of scope %s depend on each other in a cycle: %s" % (scope.name, names),
        positions,
    )


def linearize_program(table: SymbolTable, prog: S.SurfaceProgram) -> list[ScopeDecl]:
    """Sort the scopes so that callees come before their callers."""
    names = list(prog.scope_decls)
    order = {n: i for i, n in enumerate(names)}
    succ: dict[str, list[str]] = {n: [] for n in names}
    indeg = {n: 0 for n in names}
    inst_pos: dict[tuple[str, str], SourcePosition] = {}
    for name in names:
        decl = prog.scope_decls[name]
        for cv in decl.context:
            if cv.sub_scope is None:
                continue
            callee = cv.sub_scope
            if callee not in prog.scope_decls:
                raise TypecheckError(
                    "unknown scope %s for sub-scope %s" % (callee, cv.name),
                    [(None, cv.pos)],
                )
            if callee == name:
                raise ScopeRecursionError(
                    "scope %s uses itself as a sub-scope; recursion is not allowed" % name,
                    [(None, cv.pos)],
                )
            inst_pos.setdefault((callee, name), cv.pos)
            if name not in succ[callee]:
                succ[callee].append(name)
                indeg[name] += 1
    ready = [(order[n], n) for n in names if indeg[n] == 0]
    heapq.heapify(ready)
    out: list[str] = []
    while ready:
        _, node = heapq.heappop(ready)
        out.append(node)
        for nxt in succ[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, (order[nxt], nxt))
    if len(out) != len(names):
        remaining = sorted(set(names) - set(out))
        positions = []
        for callee in remaining:
            for caller in succ[callee]:
                if caller in remaining:
                    positions.append(
                        ("%s is used by %s here:" % (callee, caller), inst_pos[(callee, caller)])
                    )
        raise ScopeRecursionError(
            "scopes call each other in a cycle: %s" % " -> ".join(remaining),
            positions,
        )
    return [build_scope(table, prog, n) for n in out]


def dump_scope(scope: ScopeDecl) -> str:
    """Stable dump used by --emit scopelang."""
    lines = ["scope %s:" % scope.name]
    for a, b, pos in scope.edges:
        lines.append("  # dep %s -> %s (%s)" % (a[2:], b[2:], pos))
    for atom in scope.atoms:
        if isinstance(atom, DefAtom):
            lines.append("  def %s : %r" % (atom.loc, atom.dtype))
        else:
            lines.append("  call %s" % atom.instance.instance_id)
    return "\n".join(lines)

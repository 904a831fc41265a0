"""Desugaring: rewrite scope-use items into fully labeled definitions,
group them into per-variable exception trees, and materialize each tree
into a single nested default expression.

Sugar rules, applied per variable:
  (i)    a rule inserts (once) a base `false` definition labeled L_X and
         turns each rule into an exception to it with consequence `true`;
  (ii)   a definition without a condition gets condition `true`;
  (iiia) several unlabeled definitions with no exceptions become exceptions
         to an inserted no-default base (consequence = empty marker);
  (iiib) a single base definition gets the label L_X;
  (iv)   a bare `exception` attaches to the variable's base label.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import surface as S
from .errors import (
    AmbiguousException,
    DesugarError,
    LabelCycle,
    MultipleRoots,
    SourcePosition,
    UnknownLabel,
)

VarKey = tuple[str, ...]


@dataclass(frozen=True)
class LabeledDef:
    scope: str
    var: VarKey
    label: str
    parent_label: str | None  # set iff this is an exception
    param: str | None
    cond: S.Expr
    body: S.Expr | None  # None is the empty marker from `nodefault`
    pos: SourcePosition
    user_labeled: bool = False


@dataclass
class DefaultTree:
    node: LabeledDef
    children: list["DefaultTree"] = field(default_factory=list)

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


@dataclass(frozen=True)
class DefaultExpr:
    """Materialized default: exceptions | justification :- consequence."""

    exceptions: tuple["DefaultExpr", ...]
    just: S.Expr
    cons: S.Expr | None  # None renders as the empty error literal
    pos: SourcePosition


@dataclass
class MaterializedDef:
    scope: str
    var: VarKey
    param: str | None
    tree: DefaultTree
    dexpr: DefaultExpr
    pos: SourcePosition


def synthetic_label(scope: str, var: VarKey) -> str:
    return "__label_%s_%s" % (scope, "_".join(var))


def _true(pos: SourcePosition) -> S.Expr:
    return S.ELit(pos, "bool", True)


def _bool(pos: SourcePosition, b: bool) -> S.Expr:
    return S.ELit(pos, "bool", b)


@dataclass
class _RawItem:
    var: VarKey
    pos: SourcePosition
    is_rule: bool
    is_exception: bool
    target: str | None
    user_label: str | None
    param: str | None
    cond: S.Expr | None
    body: S.Expr | None  # None for rules (fulfilled)


def _flatten(item: S.Item) -> _RawItem:
    user_label = None
    is_exception = False
    target = None
    if isinstance(item, S.LabelItem):
        user_label = item.name
        item = item.inner
    if isinstance(item, S.ExceptionItem):
        is_exception = True
        target = item.target
        item = item.inner
    if isinstance(item, S.LabelItem):
        raise DesugarError(
            "a label must come before the exception keyword", [(None, item.pos)]
        )
    if isinstance(item, S.Rule):
        return _RawItem(item.var.parts, item.pos, True, is_exception, target,
                        user_label, None, item.cond, None)
    assert isinstance(item, S.Definition)
    return _RawItem(item.var.parts, item.pos, False, is_exception, target,
                    user_label, item.param, item.cond, item.body)


def apply_sugar(scope: str, items: list[S.Item]) -> list[LabeledDef]:
    """Rewrite the items of one scope into fully labeled definitions."""
    raw = [_flatten(it) for it in items]
    by_var: dict[VarKey, list[_RawItem]] = {}
    for r in raw:
        by_var.setdefault(r.var, []).append(r)

    out: list[LabeledDef] = []
    for var, group in by_var.items():
        out.extend(_desugar_variable(scope, var, group))
    return out


def _label_pool(scope: str, var: VarKey, group: list[_RawItem]) -> str:
    base = synthetic_label(scope, var)
    user = {r.user_label for r in group if r.user_label}
    if base in user:
        raise DesugarError(
            'label "%s" collides with a generated label; rename it' % base,
            [(None, next(r.pos for r in group if r.user_label == base))],
        )
    seen: set[str] = set()
    for r in group:
        if r.user_label:
            if r.user_label in seen:
                raise DesugarError(
                    'label "%s" is used twice for variable %s' % (r.user_label, ".".join(var)),
                    [(None, r.pos)],
                )
            seen.add(r.user_label)
    return base


def _desugar_variable(scope: str, var: VarKey, group: list[_RawItem]) -> list[LabeledDef]:
    name = ".".join(var)
    rules = [r for r in group if r.is_rule]
    if rules and len(rules) != len(group):
        raise DesugarError(
            "variable %s is defined both by rules and by definitions" % name,
            [(None, r.pos) for r in group],
        )
    lx = _label_pool(scope, var, group)
    out: list[LabeledDef] = []
    auto = 0

    def auto_label() -> str:
        nonlocal auto
        auto += 1
        return "__exc_%s_%d" % ("_".join(var), auto)

    if rules:
        # Table rule (i): one false base, every rule is a true-exception to it.
        root_pos = rules[0].pos
        out.append(LabeledDef(scope, var, lx, None, None, _true(root_pos),
                              _bool(root_pos, False), root_pos))
        for r in rules:
            parent = r.target if (r.is_exception and r.target) else lx
            out.append(LabeledDef(scope, var, r.user_label or auto_label(), parent,
                                  None, r.cond or _true(r.pos), _bool(r.pos, True),
                                  r.pos, user_labeled=bool(r.user_label)))
        _check_targets(out, name)
        return out

    plain = [r for r in group if not r.is_exception]
    exceptions = [r for r in group if r.is_exception]

    if not plain:
        raise UnknownLabel(
            "exception for variable %s, which has no definition to except" % name,
            [(None, exceptions[0].pos)],
        )
    if len(plain) > 1:
        bare = [e for e in exceptions if e.target is None]
        if bare:
            raise AmbiguousException(
                "unlabeled exception for variable %s, which has several candidate definitions" % name,
                [(None, bare[0].pos)] + [(None, p.pos) for p in plain],
            )
        if exceptions or any(p.user_label for p in plain):
            raise MultipleRoots(
                "variable %s has several base definitions" % name,
                [(None, p.pos) for p in plain],
            )
        # Table rule (iiia): no-default base, each definition is an exception.
        root_pos = plain[0].pos
        out.append(LabeledDef(scope, var, lx, None, plain[0].param,
                              _true(root_pos), None, root_pos))
        for p in plain:
            out.append(LabeledDef(scope, var, auto_label(), lx, p.param,
                                  p.cond or _true(p.pos), p.body, p.pos))
    else:
        # Table rule (iiib): the single definition becomes the labeled base.
        p = plain[0]
        root_label = p.user_label or lx
        out.append(LabeledDef(scope, var, root_label, None, p.param,
                              p.cond or _true(p.pos), p.body, p.pos,
                              user_labeled=bool(p.user_label)))
        for e in exceptions:
            # Table rule (iv) when no explicit target is given.
            parent = e.target or root_label
            out.append(LabeledDef(scope, var, e.user_label or auto_label(), parent,
                                  e.param, e.cond or _true(e.pos), e.body, e.pos,
                                  user_labeled=bool(e.user_label)))
    _check_targets(out, name)
    _check_params(out, name)
    return out


def _check_targets(defs: list[LabeledDef], name: str) -> None:
    labels = {d.label for d in defs}
    for d in defs:
        if d.parent_label is not None and d.parent_label not in labels:
            raise UnknownLabel(
                'exception refers to unknown label "%s" of variable %s' % (d.parent_label, name),
                [(None, d.pos)],
            )


def _check_params(defs: list[LabeledDef], name: str) -> None:
    params = {d.param for d in defs if d.body is not None or d.param}
    params.discard(None)
    if len(params) > 1:
        raise DesugarError(
            "definitions of %s use different parameter names: %s" % (name, ", ".join(sorted(params))),
            [(None, d.pos) for d in defs if d.param],
        )


def build_tree(defs: list[LabeledDef]) -> DefaultTree:
    """Arrange one variable's labeled definitions into its exception tree."""
    assert defs
    roots = [d for d in defs if d.parent_label is None]
    assert len(roots) == 1, "apply_sugar guarantees a single root"
    nodes = {d.label: DefaultTree(d) for d in defs}
    for d in defs:
        if d.parent_label is not None:
            nodes[d.parent_label].children.append(nodes[d.label])
    root = nodes[roots[0].label]
    reached: set[str] = set()
    stack = [root]
    while stack:
        t = stack.pop()
        reached.add(t.node.label)
        stack.extend(t.children)
    stray = [d for d in defs if d.label not in reached]
    if stray:
        raise LabelCycle(
            "exception labels of variable %s form a cycle" % ".".join(defs[0].var),
            [(None, d.pos) for d in stray],
        )
    return root


def materialize(tree: DefaultTree) -> DefaultExpr:
    """Bottom-up default-tree flattening: children become the exception list."""
    node = tree.node
    return DefaultExpr(
        exceptions=tuple(materialize(c) for c in tree.children),
        just=node.cond,
        cons=node.body,
        pos=node.pos,
    )


def desugar_scope(scope: str, uses: list[S.ScopeUse]) -> tuple[list[LabeledDef], dict[VarKey, MaterializedDef]]:
    """Labeled definitions plus one materialized default per variable.

    Items from all the scope's use blocks are treated as one unordered pool;
    an exception may appear textually before the definition it refines.
    """
    items = [it for u in uses for it in u.items]
    labeled = apply_sugar(scope, items)
    by_var: dict[VarKey, list[LabeledDef]] = {}
    for d in labeled:
        by_var.setdefault(d.var, []).append(d)
    out: dict[VarKey, MaterializedDef] = {}
    for var, defs in by_var.items():
        tree = build_tree(defs)
        out[var] = MaterializedDef(scope, var, _tree_param(tree), tree,
                                   materialize(tree), tree.node.pos)
    return labeled, out


def _tree_param(tree: DefaultTree) -> str | None:
    if tree.node.param:
        return tree.node.param
    for c in tree.children:
        p = _tree_param(c)
        if p:
            return p
    return None


def dump_labeled(defs: list[LabeledDef]) -> str:
    """Stable one-line-per-definition dump used by --emit desugared."""
    lines = []
    for d in defs:
        lines.append(
            "%s.%s | label=%s | parent=%s | pos=%s"
            % (d.scope, ".".join(d.var), d.label, d.parent_label or "-", d.pos)
        )
    return "\n".join(lines)

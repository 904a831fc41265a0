"""Surface abstract syntax: declarations, scope-use items, expressions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SourcePosition

# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class BaseType:
    name: str  # boolean | integer | money | date | duration


@dataclass(frozen=True)
class NamedType:
    name: str  # struct or enum reference


@dataclass(frozen=True)
class CollectionType:
    elem: "TypeExpr"


TypeExpr = BaseType | NamedType | CollectionType

BOOL = BaseType("boolean")
INTEGER = BaseType("integer")
MONEY = BaseType("money")
DATE = BaseType("date")
DURATION = BaseType("duration")


# ---------------------------------------------------------- declarations


@dataclass(frozen=True)
class StructField:
    name: str
    type: TypeExpr
    pos: SourcePosition


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: list[StructField]
    pos: SourcePosition


@dataclass(frozen=True)
class EnumCase:
    name: str
    payload: TypeExpr | None
    pos: SourcePosition


@dataclass(frozen=True)
class EnumDecl:
    name: str
    cases: list[EnumCase]
    pos: SourcePosition


@dataclass(frozen=True)
class ContextVar:
    """One `context` line of a scope declaration.

    Either a data/condition variable (possibly function-typed via
    `depends on`), or a sub-scope instance (`context p scope S`).
    """

    name: str
    type: TypeExpr | None  # None iff condition or sub-scope
    condition: bool
    param_type: TypeExpr | None  # `depends on` parameter
    sub_scope: str | None
    pos: SourcePosition


@dataclass(frozen=True)
class ScopeDecl:
    name: str
    context: list[ContextVar]
    pos: SourcePosition

    def var(self, name: str) -> ContextVar | None:
        for cv in self.context:
            if cv.name == name:
                return cv
        return None


# ------------------------------------------------------------ expressions


@dataclass(frozen=True)
class Expr:
    pos: SourcePosition


@dataclass(frozen=True)
class ELit(Expr):
    kind: str  # bool | integer | money | date | duration | unit
    value: object


@dataclass(frozen=True)
class EIdent(Expr):
    name: str


@dataclass(frozen=True)
class EField(Expr):
    base: Expr
    field: str


@dataclass(frozen=True)
class EApp(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class EIf(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


@dataclass(frozen=True)
class MatchArm:
    case: str
    binder: str | None
    body: Expr
    pos: SourcePosition


@dataclass(frozen=True)
class EMatch(Expr):
    scrutinee: Expr
    arms: list[MatchArm]


@dataclass(frozen=True)
class EInject(Expr):
    case: str
    payload: Expr | None


@dataclass(frozen=True)
class EStructBuild(Expr):
    struct: str
    fields: list[tuple[str, Expr]]


@dataclass(frozen=True)
class ECollection(Expr):
    items: list[Expr]


@dataclass(frozen=True)
class ESum(Expr):
    binder: str
    coll: Expr
    body: Expr


@dataclass(frozen=True)
class ECardinal(Expr):
    coll: Expr


@dataclass(frozen=True)
class EBinOp(Expr):
    op: str  # token text, suffix included
    left: Expr
    right: Expr


@dataclass(frozen=True)
class ENot(Expr):
    operand: Expr


@dataclass(frozen=True)
class EIs(Expr):
    operand: Expr
    case: str


# -------------------------------------------------------- scope-use items


@dataclass(frozen=True)
class VarRef:
    """Definition target: `x` or `sub.x`, before resolution."""

    parts: tuple[str, ...]
    pos: SourcePosition

    def __str__(self) -> str:
        return ".".join(self.parts)


@dataclass(frozen=True)
class Rule:
    var: VarRef
    cond: Expr | None
    pos: SourcePosition


@dataclass(frozen=True)
class Definition:
    var: VarRef
    param: str | None  # `definition f of p equals ...`
    cond: Expr | None
    body: Expr
    pos: SourcePosition


@dataclass(frozen=True)
class ExceptionItem:
    target: str | None  # label being excepted; None = resolve per sugar rules
    inner: "Item"
    pos: SourcePosition


@dataclass(frozen=True)
class LabelItem:
    name: str
    inner: "Item"
    pos: SourcePosition


Item = Rule | Definition | ExceptionItem | LabelItem


@dataclass(frozen=True)
class ScopeUse:
    scope: str
    items: list[Item]
    pos: SourcePosition


@dataclass
class SurfaceProgram:
    file: str
    struct_decls: dict[str, StructDecl] = field(default_factory=dict)
    enum_decls: dict[str, EnumDecl] = field(default_factory=dict)
    scope_decls: dict[str, ScopeDecl] = field(default_factory=dict)
    scope_uses: list[ScopeUse] = field(default_factory=list)

    def uses_of(self, scope: str) -> list[ScopeUse]:
        return [u for u in self.scope_uses if u.scope == scope]

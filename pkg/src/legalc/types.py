"""The type language shared by both intermediate calculi, plus the
declaration symbol table used to resolve surface types and names."""

from __future__ import annotations

from dataclasses import dataclass

from . import surface as S
from .errors import SourcePosition, TypecheckError


class DType:
    pass


@dataclass(frozen=True)
class TBase(DType):
    name: str  # bool | unit | int | money | date | duration

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TArrow(DType):
    param: DType
    result: DType

    def __repr__(self):
        return "(%r -> %r)" % (self.param, self.result)


@dataclass(frozen=True)
class TTuple(DType):
    items: tuple[DType, ...]

    def __repr__(self):
        return "(%s)" % " * ".join(repr(t) for t in self.items)


@dataclass(frozen=True)
class TStruct(DType):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TEnum(DType):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TColl(DType):
    elem: DType

    def __repr__(self):
        return "collection %r" % (self.elem,)


@dataclass(frozen=True)
class TOption(DType):
    elem: DType

    def __repr__(self):
        return "option %r" % (self.elem,)


@dataclass(frozen=True)
class TList(DType):
    elem: DType

    def __repr__(self):
        return "list %r" % (self.elem,)


@dataclass(frozen=True)
class TAny(DType):
    """Type of the polymorphic error terms when no context constrains them."""

    def __repr__(self):
        return "<any>"


BOOL = TBase("bool")
UNIT = TBase("unit")
INT = TBase("int")
MONEY = TBase("money")
DATE = TBase("date")
DURATION = TBase("duration")
ANY = TAny()

_BASE_MAP = {
    "boolean": BOOL,
    "integer": INT,
    "money": MONEY,
    "date": DATE,
    "duration": DURATION,
}


def compatible(a: DType, b: DType) -> bool:
    """Equality up to the polymorphic error type."""
    if isinstance(a, TAny) or isinstance(b, TAny):
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, TArrow):
        return compatible(a.param, b.param) and compatible(a.result, b.result)
    if isinstance(a, TTuple):
        return len(a.items) == len(b.items) and all(
            compatible(x, y) for x, y in zip(a.items, b.items)
        )
    if isinstance(a, (TColl, TOption, TList)):
        return compatible(a.elem, b.elem)
    return a == b


def join(a: DType, b: DType) -> DType:
    """Pick the more informative of two compatible types."""
    if isinstance(a, TAny):
        return b
    if isinstance(b, TAny):
        return a
    if isinstance(a, TArrow) and isinstance(b, TArrow):
        return TArrow(join(a.param, b.param), join(a.result, b.result))
    if isinstance(a, TTuple) and isinstance(b, TTuple):
        return TTuple(tuple(join(x, y) for x, y in zip(a.items, b.items)))
    if isinstance(a, TColl) and isinstance(b, TColl):
        return TColl(join(a.elem, b.elem))
    if isinstance(a, TOption) and isinstance(b, TOption):
        return TOption(join(a.elem, b.elem))
    if isinstance(a, TList) and isinstance(b, TList):
        return TList(join(a.elem, b.elem))
    return a


class SymbolTable:
    """Declared structs, enums and scopes, with name-resolution helpers."""

    def __init__(self, prog: S.SurfaceProgram):
        self.program = prog
        self.structs: dict[str, list[tuple[str, DType]]] = {}
        self.enums: dict[str, list[tuple[str, DType | None]]] = {}
        self.case_owner: dict[str, tuple[str, int]] = {}
        for sd in prog.struct_decls.values():
            seen: set[str] = set()
            for f in sd.fields:
                if f.name in seen:
                    raise TypecheckError(
                        "structure %s declares field %s twice" % (sd.name, f.name),
                        [(None, f.pos)],
                    )
                seen.add(f.name)
            self.structs[sd.name] = [(f.name, self.convert(f.type, f.pos)) for f in sd.fields]
        for ed in prog.enum_decls.values():
            cases = []
            for i, c in enumerate(ed.cases):
                cases.append((c.name, self.convert(c.payload, c.pos) if c.payload else None))
                if c.name in self.case_owner:
                    raise TypecheckError(
                        "enumeration case %s is declared twice; case names must be unique"
                        % c.name,
                        [(None, c.pos)],
                    )
                self.case_owner[c.name] = (ed.name, i)
            self.enums[ed.name] = cases
        for scope in prog.scope_decls.values():
            seen = set()
            for cv in scope.context:
                if cv.name in seen:
                    raise TypecheckError(
                        "scope %s declares %s twice" % (scope.name, cv.name),
                        [(None, cv.pos)],
                    )
                seen.add(cv.name)

    def convert(self, t: S.TypeExpr, pos: SourcePosition) -> DType:
        if isinstance(t, S.BaseType):
            return _BASE_MAP[t.name]
        if isinstance(t, S.CollectionType):
            return TColl(self.convert(t.elem, pos))
        assert isinstance(t, S.NamedType)
        if t.name in self.program.struct_decls:
            return TStruct(t.name)
        if t.name in self.program.enum_decls:
            return TEnum(t.name)
        raise TypecheckError("unknown type %s" % t.name, [(None, pos)])

    def struct_fields(self, name: str) -> list[tuple[str, DType]]:
        return self.structs[name]

    def field_type(self, struct: str, fld: str, pos: SourcePosition) -> DType:
        for fname, ftype in self.structs.get(struct, []):
            if fname == fld:
                return ftype
        raise TypecheckError(
            "structure %s has no field %s" % (struct, fld), [(None, pos)]
        )

    def enum_cases(self, name: str) -> list[tuple[str, DType | None]]:
        return self.enums[name]

    def var_type(self, cv: S.ContextVar) -> DType:
        """Type of a context variable (conditions are booleans)."""
        base = BOOL if cv.condition else self.convert(cv.type, cv.pos)
        if cv.param_type is not None:
            return TArrow(self.convert(cv.param_type, cv.pos), base)
        return base

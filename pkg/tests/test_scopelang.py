import pytest

from legalc.errors import CycleError, ScopeRecursionError
from legalc.parser import parse_text
from legalc.scopelang import (
    CallAtom,
    DefAtom,
    ScopeVar,
    build_scope,
    linearize_program,
)
from legalc.types import SymbolTable


def program(src: str):
    prog = parse_text(src, "t")
    return SymbolTable(prog), prog


def atoms_of(src: str, scope: str):
    table, prog = program(src)
    return build_scope(table, prog, scope).atoms


def names(atoms):
    out = []
    for a in atoms:
        if isinstance(a, DefAtom):
            out.append("def %s" % a.loc)
        else:
            out.append("call %s" % a.instance.instance_id)
    return out


def test_edge_local_to_local():
    table, prog = program(
        "```catala\ndeclaration scope S:\n  context a content integer\n"
        "  context b content integer\nscope S:\n  definition b equals a\n"
        "  definition a equals 1\n```\n"
    )
    sc = build_scope(table, prog, "S")
    assert ("v:a", "v:b") in {(a, b) for a, b, _ in sc.edges}
    assert names(sc.atoms) == ["def a", "def b"]


SUB_SRC = """```catala
declaration scope A:
  context k content integer
  context out content integer
declaration scope B:
  context x content integer
  context y content integer
  context s1 scope A
scope A:
  definition out equals k + 1
scope B:
  definition s1.k equals x
  definition y equals s1.out
  definition x equals 1
```
"""


def test_edges_for_subscope_cases():
    table, prog = program(SUB_SRC)
    sc = build_scope(table, prog, "B")
    edges = {(a, b) for a, b, _ in sc.edges}
    assert ("v:x", "s:s1") in edges  # y -> S_n: input def reads x
    assert ("s:s1", "v:y") in edges  # S_n -> x: def y reads s1[out]


def test_call_placed_between_inputs_and_uses():
    assert names(atoms_of(SUB_SRC, "B")) == [
        "def x",
        "def A_1[k]",
        "call A_1",
        "def y",
    ]


def test_call_emitted_even_when_outputs_unused():
    src = (
        "```catala\ndeclaration scope A:\n  context out content integer\n"
        "declaration scope B:\n  context z content integer\n  context s1 scope A\n"
        "scope A:\n  definition out equals 1\n"
        "scope B:\n  definition z equals 5\n```\n"
    )
    assert "call A_1" in names(atoms_of(src, "B"))


def test_two_node_cycle_reports_both_variables():
    src = (
        "```catala\ndeclaration scope C:\n  context a content integer\n"
        "  context b content integer\nscope C:\n  definition a equals b\n"
        "  definition b equals a\n```\n"
    )
    table, prog = program(src)
    with pytest.raises(CycleError) as exc:
        build_scope(table, prog, "C")
    msg = exc.value.message
    assert "a" in msg and "b" in msg
    assert len(exc.value.positions) >= 2  # one position per cycle edge


def test_self_reference_is_a_cycle():
    src = (
        "```catala\ndeclaration scope C:\n  context a content integer\n"
        "scope C:\n  definition a equals a + 1\n```\n"
    )
    table, prog = program(src)
    with pytest.raises(CycleError):
        build_scope(table, prog, "C")


def test_ties_broken_by_declaration_order():
    src = (
        "```catala\ndeclaration scope S:\n  context a content integer\n"
        "  context b content integer\n  context c content integer\n"
        "scope S:\n  definition c equals 3\n  definition b equals 2\n"
        "  definition a equals 1\n```\n"
    )
    assert names(atoms_of(src, "S")) == ["def a", "def b", "def c"]


def test_scope_order_callees_first():
    table, prog = program(SUB_SRC)
    order = [sc.name for sc in linearize_program(table, prog)]
    assert order == ["A", "B"]


def test_independent_scopes_keep_declaration_order():
    src = (
        "```catala\ndeclaration scope A:\n  context x content integer\n"
        "declaration scope B:\n  context y content integer\n"
        "scope A:\n  definition x equals 1\nscope B:\n  definition y equals 2\n```\n"
    )
    table, prog = program(src)
    assert [sc.name for sc in linearize_program(table, prog)] == ["A", "B"]


def test_self_recursive_scope_rejected():
    src = (
        "```catala\ndeclaration scope A:\n  context x content integer\n"
        "  context me scope A\nscope A:\n  definition x equals 1\n```\n"
    )
    table, prog = program(src)
    with pytest.raises(ScopeRecursionError):
        linearize_program(table, prog)


def test_mutually_recursive_scopes_rejected():
    src = (
        "```catala\ndeclaration scope A:\n  context x content integer\n"
        "  context b scope B\ndeclaration scope B:\n  context y content integer\n"
        "  context a scope A\n```\n"
    )
    table, prog = program(src)
    with pytest.raises(ScopeRecursionError) as exc:
        linearize_program(table, prog)
    assert "A" in exc.value.message and "B" in exc.value.message


def test_forward_scan_never_reads_before_definition():
    table, prog = program(SUB_SRC)
    sc = build_scope(table, prog, "B")
    from legalc.scopelang import Resolver, default_mentions

    res = Resolver(table, sc)
    defined: set[str] = set()
    called: set[str] = set()
    for atom in sc.atoms:
        if isinstance(atom, CallAtom):
            called.add(atom.instance.name)
            continue
        for loc, _ in default_mentions(res, atom.default):
            if isinstance(loc, ScopeVar):
                assert loc.name in defined or not _has_def(sc, loc), loc
            else:
                assert loc.instance in called, loc
        if isinstance(atom.loc, ScopeVar):
            defined.add(atom.loc.name)


def _has_def(sc, loc):
    return any(
        isinstance(a, DefAtom) and isinstance(a.loc, ScopeVar) and a.loc.name == loc.name
        for a in sc.atoms
    )

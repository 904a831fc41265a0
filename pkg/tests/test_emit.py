import json
import os
import py_compile
import subprocess
import sys

from legalc.emit_python import emit, transliterate
from legalc.pipeline import load_file, load_text
from legalc.scope_to_dcalc import typecheck_program

CORPUS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus", "section121.catala_en")


def build(src: str):
    pipe = load_text(src, "t")
    typecheck_program(pipe.compiled)
    return pipe


def test_one_callable_per_scope():
    pipe = build(
        "```catala\ndeclaration scope MyScope:\n  context x content integer\n"
        "scope MyScope:\n  definition x equals 1\n```\n"
    )
    unit = emit(pipe.compiled)
    assert "def my_scope(" in unit.text
    assert unit.scope_functions == {"MyScope": "my_scope"}


def test_emission_is_deterministic():
    pipe = load_file(CORPUS)
    a = emit(pipe.compiled).text
    b = emit(load_file(CORPUS).compiled).text
    assert a == b


def test_unicode_identifier_transliteration():
    assert transliterate("montant_versé") == "montant_verse"
    assert transliterate("durée") == "duree"
    assert transliterate("1bad") == "_1bad"
    pipe = build(
        "```catala\ndeclaration scope Règle:\n  context montant_versé content money\n"
        "scope Règle:\n  definition montant_versé equals $5\n```\n"
    )
    unit = emit(pipe.compiled)
    assert unit.scope_functions["Règle"] == "regle"
    assert "montant_verse" in unit.text
    again = emit(build(
        "```catala\ndeclaration scope Règle:\n  context montant_versé content money\n"
        "scope Règle:\n  definition montant_versé equals $5\n```\n"
    ).compiled)
    assert unit.text == again.text


def test_symbol_map_is_injective():
    pipe = load_file(CORPUS)
    unit = emit(pipe.compiled)
    values = list(unit.symbol_map.values())
    assert len(values) == len(set(values))
    json.loads(unit.symbol_map_json())


def test_emitted_module_is_valid_python(tmp_path):
    pipe = load_file(CORPUS)
    unit = emit(pipe.compiled)
    out = tmp_path / "gen.py"
    out.write_text(unit.text)
    py_compile.compile(str(out), doraise=True)


def test_header_carries_source_scopes_and_version(tmp_path):
    pipe = load_file(CORPUS)
    unit = emit(pipe.compiled)
    head = unit.text.splitlines()[:3]
    assert "legalc" in head[0] and "section121" in head[0]
    assert "Section121SinglePerson" in head[1]


def test_emitted_module_runs_scenarios(tmp_path):
    pipe = load_file(CORPUS)
    unit = emit(pipe.compiled)
    gen = tmp_path / "gen121.py"
    gen.write_text(unit.text)
    proc = subprocess.run(
        [sys.executable, str(gen), "TestScenarioA"], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == "TestScenarioA.exclusion = $250,000.00\n"

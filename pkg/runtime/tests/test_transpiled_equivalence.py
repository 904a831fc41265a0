"""Transpiled-code equivalence: for every golden-corpus program and
scenario, the emitted module run under this runtime produces output
identical to `legalc interpret`, and error outcomes map to the two
runtime exception kinds. The compiler is driven only through its command
line, never through its internals."""

import os
import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
CORPUS_DIR = REPO / "tests" / "corpus"

SUCCESS_SCENARIOS = [
    ("section121.catala_en", "TestScenarioA"),
    ("section121.catala_en", "TestScenarioB"),
    ("section121.catala_en", "TestScenarioC"),
    ("sugar_rules.catala_en", "SugarRules"),
]

ERROR_SCENARIOS = [
    ("error_cases.catala_en", "Conflicting", "Conflict"),
    ("error_cases.catala_en", "NeverDefined", "never defined"),
]


def legalc(*args):
    env = dict(os.environ, LEGALC_NO_COLOR="1")
    return subprocess.run(
        [sys.executable, "-m", "legalc", *args],
        capture_output=True, text=True, env=env, cwd=str(REPO),
    )


@pytest.fixture(scope="module")
def transpiled(tmp_path_factory):
    out = {}
    tmp = tmp_path_factory.mktemp("gen")
    for corpus in {c for c, *_ in SUCCESS_SCENARIOS + ERROR_SCENARIOS}:
        target = tmp / (corpus.replace(".catala_en", "") + ".py")
        proc = legalc("transpile", str(CORPUS_DIR / corpus), "--out", str(target))
        assert proc.returncode == 0, proc.stderr
        out[corpus] = target
    return out


@pytest.mark.parametrize("corpus,scope", SUCCESS_SCENARIOS)
def test_outputs_identical_to_interpreter(transpiled, corpus, scope):
    interp = legalc("interpret", str(CORPUS_DIR / corpus), "--scope", scope)
    assert interp.returncode == 0, interp.stderr
    gen = subprocess.run(
        [sys.executable, str(transpiled[corpus]), scope],
        capture_output=True, text=True,
    )
    assert gen.returncode == 0, gen.stderr
    assert gen.stdout == interp.stdout


@pytest.mark.parametrize("corpus,scope,marker", ERROR_SCENARIOS)
def test_error_outcomes_map_to_runtime_exceptions(transpiled, corpus, scope, marker):
    interp = legalc("interpret", str(CORPUS_DIR / corpus), "--scope", scope)
    assert interp.returncode == 1
    assert marker.lower() in interp.stderr.lower()
    gen = subprocess.run(
        [sys.executable, str(transpiled[corpus]), scope],
        capture_output=True, text=True,
    )
    assert gen.returncode == 1
    assert marker.lower() in gen.stderr.lower()


def test_emitted_module_imports_cleanly(transpiled):
    for corpus, path in transpiled.items():
        proc = subprocess.run(
            [sys.executable, "-c", "import importlib.util as u; "
             "s=u.spec_from_file_location('g', %r); m=u.module_from_spec(s); "
             "s.loader.exec_module(m)" % str(path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr

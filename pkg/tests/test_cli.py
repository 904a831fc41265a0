import io
import os
import subprocess
import sys

from legalc.cli import EXIT_OK, EXIT_SEMANTIC, EXIT_USAGE, config_from_args, run

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(REPO, "tests", "corpus", "section121.catala_en")
ERRORS = os.path.join(REPO, "tests", "corpus", "error_cases.catala_en")


def legalc(*args, cwd=None):
    env = dict(os.environ, LEGALC_NO_COLOR="1")
    return subprocess.run(
        [sys.executable, "-m", "legalc", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=cwd,
    )


def run_inproc(*args):
    out, err = io.StringIO(), io.StringIO()
    code = run(config_from_args(list(args)), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_typecheck_ok():
    code, out, err = run_inproc("typecheck", CORPUS)
    assert code == EXIT_OK and "ok" in out


def test_interpret_scenario_exact_output():
    code, out, err = run_inproc("interpret", CORPUS, "--scope", "TestScenarioA")
    assert code == EXIT_OK
    assert out == "TestScenarioA.exclusion = $250,000.00\n"


def test_interpret_unknown_scope_is_usage_error():
    code, out, err = run_inproc("interpret", CORPUS, "--scope", "Nope")
    assert code == EXIT_USAGE


def test_interpret_missing_file_is_usage_error():
    code, out, err = run_inproc("interpret", "no-such-file.catala_en", "--scope", "S")
    assert code == EXIT_USAGE


def test_semantic_error_exits_one(tmp_path):
    bad = tmp_path / "bad.catala_en"
    bad.write_text(
        "```catala\ndeclaration scope S:\n  context a content integer\n"
        "scope S:\n  definition a equals a\n```\n"
    )
    code, out, err = run_inproc("interpret", str(bad), "--scope", "S")
    assert code == EXIT_SEMANTIC
    assert "cycle" in err or "refers to" in err


def test_syntax_error_exits_one(tmp_path):
    bad = tmp_path / "bad.catala_en"
    bad.write_text("```catala\nscope S:\n  definition x equals 5 years\n```\n")
    code, out, err = run_inproc("typecheck", str(bad))
    assert code == EXIT_SEMANTIC
    assert 'Syntax error at token "years"' in err
    assert "Error token:" in err and "Last good token:" in err


def test_bind_scalar_values(tmp_path):
    f = tmp_path / "b.catala_en"
    f.write_text(
        "```catala\ndeclaration scope S:\n  context inp content money\n"
        "  context out content money\nscope S:\n"
        "  definition out equals inp +$ $0.50\n```\n"
    )
    code, out, err = run_inproc("interpret", str(f), "--scope", "S", "--bind", "inp=$10.00")
    assert code == EXIT_OK
    assert "S.out = $10.50" in out
    assert "S.inp = $10.00" in out


def test_bind_rejects_bad_literal(tmp_path):
    f = tmp_path / "b.catala_en"
    f.write_text(
        "```catala\ndeclaration scope S:\n  context inp content money\n```\n"
    )
    code, out, err = run_inproc("interpret", str(f), "--scope", "S", "--bind", "inp=wat")
    assert code == EXIT_USAGE


def test_bind_rejects_unknown_variable():
    code, out, err = run_inproc(
        "interpret", CORPUS, "--scope", "TestScenarioA", "--bind", "nope=1"
    )
    assert code == EXIT_USAGE


def test_bind_type_mismatch_is_usage_error(tmp_path):
    f = tmp_path / "b.catala_en"
    f.write_text(
        "```catala\ndeclaration scope S:\n  context inp content money\n```\n"
    )
    code, out, err = run_inproc("interpret", str(f), "--scope", "S", "--bind", "inp=3")
    assert code == EXIT_USAGE


def test_emit_stages_all_produce_output():
    for stage in ("desugared", "scopelang", "dcalc", "lcalc"):
        code, out, err = run_inproc("emit", CORPUS, "--stage", stage)
        assert code == EXIT_OK and out.strip(), stage


def test_trace_goes_to_stderr():
    code, out, err = run_inproc(
        "interpret", CORPUS, "--scope", "TestScenarioA", "--trace"
    )
    assert code == EXIT_OK
    assert out == "TestScenarioA.exclusion = $250,000.00\n"
    assert "[TRACE]" in err
    assert "Section121SinglePerson.gain_cap" in err


def test_trace_includes_breadcrumbs():
    code, out, err = run_inproc(
        "interpret", CORPUS, "--scope", "TestScenarioC", "--trace"
    )
    assert "(A) $500,000 limitation for certain joint returns" in err
    # the cap exception fires, referencing the exception's position
    assert any(
        "Section121Return.gain_cap: exception #1" in line for line in err.splitlines()
    )


def test_stdout_stderr_byte_stable():
    runs = {run_inproc("interpret", CORPUS, "--scope", "TestScenarioC") for _ in range(2)}
    assert len(runs) == 1


def test_cli_subprocess_end_to_end(tmp_path):
    proc = legalc("interpret", CORPUS, "--scope", "TestScenarioB", cwd=REPO)
    assert proc.returncode == 0
    assert proc.stdout == "TestScenarioB.exclusion = $0.00\n"


def test_transpile_writes_module_and_symbol_map(tmp_path):
    out = tmp_path / "gen.py"
    code, _, err = run_inproc(
        "transpile", CORPUS, "--out", str(out), "--emit", "symbol-map"
    )
    assert code == EXIT_OK, err
    assert out.exists() and (tmp_path / "gen.py.symbols.json").exists()


def test_conflict_error_lists_both_definitions():
    code, out, err = run_inproc("interpret", ERRORS, "--scope", "Conflicting")
    assert code == EXIT_SEMANTIC
    assert "Conflict error" in err
    assert err.count("This definition applies:") == 2
    assert err.count("-->") >= 2


def test_never_defined_error_names_variable_and_read_position():
    code, out, err = run_inproc("interpret", ERRORS, "--scope", "NeverDefined")
    assert code == EXIT_SEMANTIC
    assert "NeverDefined.missing was never defined" in err


def test_selftest_small_run_agrees():
    code, out, err = run_inproc("selftest", "--n", "100", "--seed", "42")
    assert code == EXIT_OK
    assert "100/100 agree" in out
    assert "100/100 preserve typing" in out


def test_no_color_env_respected(tmp_path):
    bad = tmp_path / "bad.catala_en"
    bad.write_text("```catala\nscope S:\n  definition x equals 5 years\n```\n")
    proc = legalc("typecheck", str(bad), cwd=REPO)
    assert "\x1b[" not in proc.stderr


def test_trace_prints_before_conflict_error():
    code, out, err = run_inproc(
        "interpret", ERRORS, "--scope", "Conflicting", "--trace"
    )
    assert code == EXIT_SEMANTIC
    assert "[TRACE]" in err  # the trace ends where the conflict arose
    assert err.index("[TRACE]") < err.index("Conflict error")
    assert err.count("This definition applies:") == 2


def test_bind_overrides_an_existing_definition(tmp_path):
    f = tmp_path / "o.catala_en"
    f.write_text(
        "```catala\ndeclaration scope S:\n  context x content integer\n"
        "scope S:\n  definition x equals 1\n```\n"
    )
    code, out, _ = run_inproc("interpret", str(f), "--scope", "S", "--bind", "x=42")
    assert code == EXIT_OK and "S.x = 42" in out

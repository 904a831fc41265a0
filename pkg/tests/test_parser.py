import pytest

from legalc import surface as S
from legalc.errors import ParseError, format_error
from legalc.parser import parse_text

RULES_LISTING = """```catala
declaration structure PersonalData:
  data property_ownership content collection Period
  data property_usage_as_principal_residence content collection Period

declaration structure Period:
  data start content date
  data end content date

declaration scope Section121SinglePerson:
  context gain_from_sale_or_exchange_of_property content money
  context personal content PersonalData
  context requirements_ownership_met condition
  context requirements_usage_met condition
  context requirements_met condition
  context amount_excluded_from_gross_income_uncapped content money
  context aggregate_periods_from_last_five_years content duration
    depends on collection Period

scope Section121SinglePerson:
  rule requirements_ownership_met under condition
    aggregate_periods_from_last_five_years of personal.property_ownership >=^
      730 day
  consequence fulfilled
  rule requirements_usage_met under condition
    aggregate_periods_from_last_five_years of
      personal.property_usage_as_principal_residence >=^ 730 day
  consequence fulfilled
  rule requirements_met under condition
    requirements_ownership_met and requirements_usage_met
  consequence fulfilled
  definition amount_excluded_from_gross_income_uncapped equals
    if requirements_met then gain_from_sale_or_exchange_of_property else $0
```
"""


def test_rules_listing_shape():
    prog = parse_text(RULES_LISTING, "s121.catala_en")
    (use,) = prog.scope_uses
    assert use.scope == "Section121SinglePerson"
    rules = [i for i in use.items if isinstance(i, S.Rule)]
    defs = [i for i in use.items if isinstance(i, S.Definition)]
    assert len(rules) == 3 and len(defs) == 1
    assert defs[0].var.parts == ("amount_excluded_from_gross_income_uncapped",)


def test_empty_code_blocks_parse_to_empty_program():
    prog = parse_text("no code here\n", "f")
    assert not prog.scope_decls and not prog.scope_uses


def test_keyword_constructs_roundtrip():
    prog = parse_text(
        """```catala
declaration enumeration ReturnType:
  -- SingleReturn content PersonalData
  -- JointReturn content CoupleData
declaration structure PersonalData:
  data x content integer
declaration structure CoupleData:
  data y content integer
declaration scope R:
  context return_data content ReturnType
  context person1 scope P
  context out content integer
declaration scope P:
  context q content integer
scope R:
  definition person1.q equals match return_data with
  -- SingleReturn of personal1 : personal1.x
  -- JointReturn of couple : couple.y
  definition out under condition person1.q > 0 consequence equals 1
```
""",
        "f",
    )
    assert set(prog.enum_decls) == {"ReturnType"}
    use = prog.scope_uses[0]
    match_def = use.items[0]
    assert isinstance(match_def.body, S.EMatch)
    assert [a.case for a in match_def.body.arms] == ["SingleReturn", "JointReturn"]
    assert prog.scope_decls["R"].var("person1").sub_scope == "P"


def test_money_and_date_and_duration_literals():
    prog = parse_text(
        """```catala
declaration scope S:
  context m content money
  context d content date
  context n content duration
scope S:
  definition m equals $1,234.56
  definition d equals |2021-03-01|
  definition n equals 730 day
```
""",
        "f",
    )
    m, d, n = prog.scope_uses[0].items
    assert m.body.value == 123456
    assert d.body.value == (2021, 3, 1)
    assert n.body.kind == "duration" and n.body.value == 730


def test_years_literal_suggests_day_and_operators():
    src = "```catala\nscope S:\n  definition x equals 5 years\n```\n"
    with pytest.raises(ParseError) as exc:
        parse_text(src, "err.catala_en")
    err = exc.value
    assert err.suggestions[0] == "day"
    ops = {s for s in err.suggestions}
    assert {"+", "-", "*", "/"} <= ops  # grammar follow-set: operators
    assert "year" not in ops  # no built-in yearly duration
    labels = [label for label, _ in err.positions]
    assert labels == ["Error token:", "Last good token:"]


def test_error_rendering_contains_both_token_sections():
    src = "```catala\nscope S:\n  definition x equals 5 years\n```\n"
    with pytest.raises(ParseError) as exc:
        parse_text(src, "err.catala_en")
    text = format_error(exc.value, {"err.catala_en": src})
    assert "Syntax error at token \"years\"" in text
    assert "Error token:" in text and "Last good token:" in text
    assert "Autosuggestion: did you mean \"day\"" in text


def test_error_rendering_is_deterministic():
    src = "```catala\nscope S:\n  definition x equals 5 years\n```\n"
    outs = set()
    for _ in range(3):
        try:
            parse_text(src, "err.catala_en")
        except ParseError as e:
            outs.add(format_error(e, {"err.catala_en": src}))
    assert len(outs) == 1


def test_parse_determinism_same_tree():
    a = parse_text(RULES_LISTING, "f")
    b = parse_text(RULES_LISTING, "f")
    assert repr(a.scope_uses[0].items) == repr(b.scope_uses[0].items)


def test_caret_at_line_one_column_one():
    with pytest.raises(ParseError) as exc:
        parse_text("```catala\n) weird\n```\n", "f")
    text = format_error(exc.value, {"f": "```catala\n) weird\n```\n"})
    caret_lines = [l for l in text.splitlines() if l.strip() == "| ^"]
    assert caret_lines, text


def test_subscope_of_subscope_is_rejected():
    src = "```catala\nscope S:\n  definition a.b.c equals 1\n```\n"
    with pytest.raises(ParseError) as exc:
        parse_text(src, "f")
    assert "sub-scopes" in exc.value.detail


def test_exception_and_label_wrappers():
    prog = parse_text(
        """```catala
scope S:
  label cap definition gain_cap equals $250,000
  exception cap definition gain_cap under condition joint consequence equals $500,000
  exception definition other equals 1
```
""",
        "f",
    )
    items = prog.scope_uses[0].items
    assert isinstance(items[0], S.LabelItem)
    assert isinstance(items[1], S.ExceptionItem) and items[1].target == "cap"
    assert isinstance(items[2], S.ExceptionItem) and items[2].target is None

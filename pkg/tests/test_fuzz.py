"""Robustness: random inputs must produce structured errors, never raw
Python exceptions, all the way through interpretation."""

import random

from legalc.errors import StructuredError
from legalc.parser import parse_text
from legalc.pipeline import interpret, load_text

_WORDS = [
    "declaration", "scope", "context", "content", "condition", "rule",
    "definition", "exception", "label", "under", "consequence", "fulfilled",
    "equals", "match", "with", "if", "then", "else", "of", "and", "or",
    "not", "sum", "for", "in", "is", "day", "--", "x", "y", "S", "(", ")",
    "[", "]", "{", "}", ":", ".", ";", "5", "$1.00", "|2020-01-01|", "+",
    "-", "*", ">=$", "true", "false", "structure", "enumeration", "data",
    "depends", "on",
]


def test_parser_never_crashes_on_token_soup():
    rng = random.Random(3)
    for _ in range(600):
        body = " ".join(rng.choice(_WORDS) for _ in range(rng.randint(0, 25)))
        src = "```catala\n%s\n```\n" % body
        try:
            parse_text(src, "fuzz")
        except StructuredError:
            pass


def _rand_expr(rng, depth, vars_):
    if depth <= 0 or rng.random() < 0.3:
        if vars_ and rng.random() < 0.5:
            return rng.choice(vars_)
        return rng.choice(["1", "2", "true", "false", "$1.00", "730 day", "|2020-01-01|"])
    if rng.random() < 0.2:
        return "if %s then %s else %s" % tuple(
            _rand_expr(rng, depth - 1, vars_) for _ in range(3)
        )
    op = rng.choice(["+", "-", "*", "+$", ">=", "and", "or", "=", "+@", "-@", ">=^"])
    return "(%s %s %s)" % (
        _rand_expr(rng, depth - 1, vars_), op, _rand_expr(rng, depth - 1, vars_)
    )


def test_pipeline_never_crashes_on_random_programs():
    rng = random.Random(11)
    types = ["integer", "money", "boolean", "date", "duration"]
    for _ in range(300):
        names = ["v%d" % k for k in range(rng.randint(1, 5))]
        decls = ["declaration scope S:"]
        for n in names:
            if rng.random() < 0.2:
                decls.append("  context %s condition" % n)
            else:
                decls.append("  context %s content %s" % (n, rng.choice(types)))
        uses = ["scope S:"]
        for n in names:
            r = rng.random()
            if r < 0.15:
                uses.append(
                    "  rule %s under condition %s consequence fulfilled"
                    % (n, _rand_expr(rng, 2, names))
                )
            elif r < 0.3:
                uses.append(
                    "  definition %s under condition %s consequence equals %s"
                    % (n, _rand_expr(rng, 2, names), _rand_expr(rng, 2, names))
                )
            elif r < 0.9:
                uses.append("  definition %s equals %s" % (n, _rand_expr(rng, 2, names)))
        src = "```catala\n%s\n```\n" % "\n".join(decls + uses)
        try:
            interpret(load_text(src, "fuzz"), "S", {})
        except StructuredError:
            pass

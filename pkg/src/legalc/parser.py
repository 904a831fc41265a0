"""Recursive-descent parser producing a SurfaceProgram.

Error reporting keeps the "farthest failure" bookkeeping: every token test
that fails records what would have been acceptable at that point, and the
error raised for a token carries the acceptable-token list collected at the
farthest position reached, plus the error-token and last-good-token spans.
"""

from __future__ import annotations

from .errors import ParseError, SourcePosition
from .lexer import T, Token, tokenize_blocks
from .literate import LiterateDocument
from . import surface as S

_CMP_OPS = ["<=$", ">=$", "<=@", ">=@", "<=^", ">=^", "<=", ">=",
            "<$", ">$", "<@", ">@", "<^", ">^", "<", ">", "="]
_ADD_OPS = ["+$", "-$", "+@", "-@", "+^", "-^", "+", "-"]
_MUL_OPS = ["*", "/", "/$"]

_BASE_TYPES = {"boolean", "integer", "money", "date", "duration"}


class _P:
    def __init__(self, tokens: list[Token], file: str):
        self.toks = tokens
        self.file = file
        self.i = 0
        self.far_i = -1
        self.far_expected: list[str] = []

    # ------------------------------------------------------------ cursor

    def cur(self) -> Token:
        return self.toks[self.i]

    def note(self, what: str) -> None:
        if self.i > self.far_i:
            self.far_i = self.i
            self.far_expected = [what]
        elif self.i == self.far_i and what not in self.far_expected:
            self.far_expected.append(what)

    def at_kw(self, word: str) -> bool:
        return self.cur().is_kw(word)

    def accept_kw(self, word: str) -> Token | None:
        if self.at_kw(word):
            return self.advance()
        self.note(word)
        return None

    def accept_punct(self, ch: str) -> Token | None:
        tok = self.cur()
        if tok.kind is T.PUNCT and tok.text == ch:
            return self.advance()
        self.note(ch)
        return None

    def accept_op(self, table: list[str]) -> Token | None:
        tok = self.cur()
        if tok.kind is T.OP and tok.text in table:
            return self.advance()
        for op in table:
            self.note(op)
        return None

    def advance(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_kw(self, word: str, why: str | None = None) -> Token:
        tok = self.accept_kw(word)
        if tok is None:
            self.fail(why or 'expected keyword "%s"' % word)
        return tok

    def expect_punct(self, ch: str, why: str | None = None) -> Token:
        tok = self.accept_punct(ch)
        if tok is None:
            self.fail(why or 'expected "%s"' % ch)
        return tok

    def expect_ident(self, why: str) -> Token:
        tok = self.cur()
        if tok.kind is T.IDENT:
            return self.advance()
        self.note("identifier")
        self.fail(why)

    def fail(self, detail: str):
        tok = self.cur()
        shown = tok.text if tok.kind is not T.EOF else "end of input"
        positions: list[tuple[str | None, SourcePosition]] = [("Error token:", tok.pos)]
        if self.i > 0:
            positions.append(("Last good token:", self.toks[self.i - 1].pos))
        suggestions = self.far_expected if self.far_i >= self.i else []
        raise ParseError(
            'at token "%s"' % shown,
            positions,
            suggestions=list(suggestions),
            detail=detail,
        )

    # ----------------------------------------------------------- program

    def program(self) -> S.SurfaceProgram:
        prog = S.SurfaceProgram(file=self.file)
        while True:
            if self.cur().kind is T.EOF:
                return prog
            if self.accept_kw("declaration"):
                self.declaration(prog)
            elif self.at_kw("scope"):
                use = self.scope_use()
                prog.scope_uses.append(use)
            else:
                self.fail(
                    "expected a declaration, a scope block or the next rule or "
                    "definition, or a valid token to complete the expression"
                )

    def declaration(self, prog: S.SurfaceProgram) -> None:
        if self.accept_kw("structure"):
            decl = self.struct_decl()
            self._declare(prog.struct_decls, decl.name, decl, "structure")
        elif self.accept_kw("enumeration"):
            decl = self.enum_decl()
            self._declare(prog.enum_decls, decl.name, decl, "enumeration")
        elif self.accept_kw("scope"):
            decl = self.scope_decl()
            self._declare(prog.scope_decls, decl.name, decl, "scope")
        else:
            self.fail("expected structure, enumeration or scope after declaration")

    def _declare(self, table: dict, name: str, decl, what: str) -> None:
        if name in table:
            raise ParseError(
                'at token "%s"' % name,
                [
                    ("Error token:", decl.pos),
                    ("First declaration:", table[name].pos),
                ],
                detail="%s %s is declared twice" % (what, name),
            )
        table[name] = decl

    def struct_decl(self) -> S.StructDecl:
        name = self.expect_ident("expected a structure name")
        self.expect_punct(":")
        fields = []
        while self.at_kw("data"):
            self.advance()
            fname = self.expect_ident("expected a field name after data")
            self.expect_kw("content")
            fields.append(S.StructField(fname.text, self.type_expr(), fname.pos))
        return S.StructDecl(name.text, fields, name.pos)

    def enum_decl(self) -> S.EnumDecl:
        name = self.expect_ident("expected an enumeration name")
        self.expect_punct(":")
        cases = []
        while self.cur().kind is T.ARM:
            self.advance()
            cname = self.expect_ident("expected a case name after --")
            payload = self.type_expr() if self.accept_kw("content") else None
            cases.append(S.EnumCase(cname.text, payload, cname.pos))
        if not cases:
            self.fail("an enumeration needs at least one -- case")
        return S.EnumDecl(name.text, cases, name.pos)

    def scope_decl(self) -> S.ScopeDecl:
        name = self.expect_ident("expected a scope name")
        self.expect_punct(":")
        ctx = []
        while self.at_kw("context"):
            self.advance()
            vname = self.expect_ident("expected a variable name after context")
            if self.accept_kw("scope"):
                sub = self.expect_ident("expected a scope name")
                ctx.append(S.ContextVar(vname.text, None, False, None, sub.text, vname.pos))
                continue
            condition = False
            vtype: S.TypeExpr | None = None
            if self.accept_kw("condition"):
                condition = True
            elif self.accept_kw("content"):
                vtype = self.type_expr()
            else:
                self.fail("expected scope, condition or content in a context declaration")
            param = None
            if self.accept_kw("depends"):
                self.expect_kw("on")
                param = self.type_expr()
            ctx.append(S.ContextVar(vname.text, vtype, condition, param, None, vname.pos))
        return S.ScopeDecl(name.text, ctx, name.pos)

    def type_expr(self) -> S.TypeExpr:
        tok = self.cur()
        if tok.kind is T.KEYWORD and tok.text in _BASE_TYPES:
            self.advance()
            return S.BaseType(tok.text)
        if self.accept_kw("collection"):
            return S.CollectionType(self.type_expr())
        if tok.kind is T.IDENT:
            self.advance()
            return S.NamedType(tok.text)
        for base in sorted(_BASE_TYPES):
            self.note(base)
        self.note("collection")
        self.note("identifier")
        self.fail("expected a type")

    # -------------------------------------------------------- scope uses

    def scope_use(self) -> S.ScopeUse:
        kw = self.expect_kw("scope")
        name = self.expect_ident("expected a scope name")
        self.expect_punct(":")
        items: list[S.Item] = []
        while True:
            item = self.maybe_item()
            if item is None:
                break
            items.append(item)
        return S.ScopeUse(name.text, items, SourcePosition.merge(kw.pos, name.pos))

    def maybe_item(self) -> S.Item | None:
        if lab := self.accept_kw("label"):
            name = self.expect_ident("expected a label name")
            inner = self.maybe_item()
            if inner is None or isinstance(inner, S.LabelItem):
                self.fail("expected a definition, rule or exception after the label")
            return S.LabelItem(name.text, inner, SourcePosition.merge(lab.pos, name.pos))
        if exc := self.accept_kw("exception"):
            target = None
            if self.cur().kind is T.IDENT:
                target = self.advance().text
            if self.at_kw("definition"):
                inner = self.definition_item()
            elif self.at_kw("rule"):
                inner = self.rule_item()
            else:
                self.fail("expected definition or rule after exception")
            return S.ExceptionItem(target, inner, exc.pos)
        if self.at_kw("definition"):
            return self.definition_item()
        if self.at_kw("rule"):
            return self.rule_item()
        self.note("definition")
        self.note("rule")
        self.note("exception")
        self.note("label")
        return None

    def var_ref(self) -> S.VarRef:
        head = self.expect_ident("expected a variable name")
        parts = [head.text]
        pos = head.pos
        while self.accept_punct("."):
            nxt = self.expect_ident("expected a variable name after .")
            parts.append(nxt.text)
            pos = SourcePosition.merge(pos, nxt.pos)
        if len(parts) > 2:
            raise ParseError(
                'at token "%s"' % parts[-1],
                [("Error token:", pos)],
                detail="references to sub-scopes of sub-scopes are not allowed",
            )
        return S.VarRef(tuple(parts), pos)

    def definition_item(self) -> S.Definition:
        kw = self.expect_kw("definition")
        var = self.var_ref()
        param = None
        if self.accept_kw("of"):
            param = self.expect_ident("expected a parameter name after of").text
        cond = None
        if self.accept_kw("under"):
            self.expect_kw("condition")
            cond = self.expr()
            self.expect_kw("consequence")
        self.expect_kw("equals", "expected equals to introduce the defined value")
        body = self.expr()
        return S.Definition(var, param, cond, body, SourcePosition.merge(kw.pos, var.pos))

    def rule_item(self) -> S.Rule:
        kw = self.expect_kw("rule")
        var = self.var_ref()
        cond = None
        if self.accept_kw("under"):
            self.expect_kw("condition")
            cond = self.expr()
            self.expect_kw("consequence")
        self.expect_kw("fulfilled", "a rule consequence must be fulfilled")
        return S.Rule(var, cond, SourcePosition.merge(kw.pos, var.pos))

    # ------------------------------------------------------- expressions

    def expr(self) -> S.Expr:
        return self.or_expr()

    def or_expr(self) -> S.Expr:
        left = self.and_expr()
        while self.accept_kw("or"):
            right = self.and_expr()
            left = S.EBinOp(SourcePosition.merge(left.pos, right.pos), "or", left, right)
        return left

    def and_expr(self) -> S.Expr:
        left = self.not_expr()
        while self.accept_kw("and"):
            right = self.not_expr()
            left = S.EBinOp(SourcePosition.merge(left.pos, right.pos), "and", left, right)
        return left

    def not_expr(self) -> S.Expr:
        if kw := self.accept_kw("not"):
            operand = self.not_expr()
            return S.ENot(SourcePosition.merge(kw.pos, operand.pos), operand)
        return self.cmp_expr()

    def cmp_expr(self) -> S.Expr:
        left = self.add_expr()
        if self.accept_kw("is"):
            case = self.expect_ident("expected an enumeration case after is")
            return S.EIs(SourcePosition.merge(left.pos, case.pos), left, case.text)
        if op := self.accept_op(_CMP_OPS):
            right = self.add_expr()
            return S.EBinOp(SourcePosition.merge(left.pos, right.pos), op.text, left, right)
        return left

    def add_expr(self) -> S.Expr:
        left = self.mul_expr()
        while op := self.accept_op(_ADD_OPS):
            right = self.mul_expr()
            left = S.EBinOp(SourcePosition.merge(left.pos, right.pos), op.text, left, right)
        return left

    def mul_expr(self) -> S.Expr:
        left = self.app_expr()
        while op := self.accept_op(_MUL_OPS):
            right = self.app_expr()
            left = S.EBinOp(SourcePosition.merge(left.pos, right.pos), op.text, left, right)
        return left

    def app_expr(self) -> S.Expr:
        fn = self.postfix_expr()
        if self.accept_kw("of"):
            arg = self.postfix_expr()
            return S.EApp(SourcePosition.merge(fn.pos, arg.pos), fn, arg)
        return fn

    def postfix_expr(self) -> S.Expr:
        e = self.atom()
        while self.accept_punct("."):
            fld = self.expect_ident("expected a field name after .")
            e = S.EField(SourcePosition.merge(e.pos, fld.pos), e, fld.text)
        return e

    def atom(self) -> S.Expr:
        tok = self.cur()
        if tok.kind is T.INT:
            self.advance()
            if day := self.accept_kw("day"):
                return S.ELit(SourcePosition.merge(tok.pos, day.pos), "duration", tok.value)
            return S.ELit(tok.pos, "integer", tok.value)
        if tok.kind is T.MONEY:
            self.advance()
            return S.ELit(tok.pos, "money", tok.value)
        if tok.kind is T.DATE:
            self.advance()
            return S.ELit(tok.pos, "date", tok.value)
        if self.accept_kw("true"):
            return S.ELit(tok.pos, "bool", True)
        if self.accept_kw("false"):
            return S.ELit(tok.pos, "bool", False)
        if self.accept_punct("("):
            e = self.expr()
            self.expect_punct(")")
            return e
        if self.accept_punct("["):
            items = []
            if not self.accept_punct("]"):
                items.append(self.expr())
                while self.accept_punct(";"):
                    items.append(self.expr())
                self.expect_punct("]")
            return S.ECollection(tok.pos, items)
        if self.accept_kw("if"):
            cond = self.expr()
            self.expect_kw("then")
            then = self.expr()
            self.expect_kw("else")
            orelse = self.expr()
            return S.EIf(SourcePosition.merge(tok.pos, orelse.pos), cond, then, orelse)
        if self.accept_kw("match"):
            return self.match_expr(tok)
        if self.accept_kw("sum"):
            self.expect_kw("for")
            binder = self.expect_ident("expected a binder after sum for")
            self.expect_kw("in")
            coll = self.postfix_expr()  # the application `of` would be eaten
            self.expect_kw("of")
            body = self.expr()
            return S.ESum(SourcePosition.merge(tok.pos, body.pos), binder.text, coll, body)
        if self.accept_kw("cardinal"):
            self.expect_kw("of")
            coll = self.postfix_expr()
            return S.ECardinal(SourcePosition.merge(tok.pos, coll.pos), coll)
        if tok.kind is T.IDENT:
            self.advance()
            if self.cur().kind is T.PUNCT and self.cur().text == "{":
                return self.struct_build(tok)
            if self.accept_kw("content"):
                payload = self.app_expr()
                return S.EInject(SourcePosition.merge(tok.pos, payload.pos), tok.text, payload)
            return S.EIdent(tok.pos, tok.text)
        self.note("identifier")
        self.note("literal")
        self.fail("expected an expression")

    def match_expr(self, kw: Token) -> S.Expr:
        scrutinee = self.expr()
        self.expect_kw("with")
        arms = []
        while self.cur().kind is T.ARM:
            self.advance()
            case = self.expect_ident("expected a case name after --")
            binder = None
            if self.accept_kw("of"):
                binder = self.expect_ident("expected a binder after of").text
            self.expect_punct(":")
            body = self.expr()
            arms.append(S.MatchArm(case.text, binder, body, case.pos))
        if not arms:
            self.fail("a match needs at least one -- arm")
        return S.EMatch(SourcePosition.merge(kw.pos, arms[-1].body.pos), scrutinee, arms)

    def struct_build(self, name: Token) -> S.Expr:
        self.expect_punct("{")
        fields = []
        while self.cur().kind is T.ARM:
            self.advance()
            fname = self.expect_ident("expected a field name after --")
            self.expect_punct(":")
            fields.append((fname.text, self.expr()))
        close = self.expect_punct("}", "expected -- field or } in structure literal")
        return S.EStructBuild(SourcePosition.merge(name.pos, close.pos), name.text, fields)


def parse(doc: LiterateDocument) -> S.SurfaceProgram:
    """Parse all code blocks of a literate document as one compilation unit."""
    tokens = tokenize_blocks(doc.code_blocks(), doc.file)
    return _P(tokens, doc.file).program()


def parse_text(text: str, file: str = "<input>") -> S.SurfaceProgram:
    from .literate import extract_blocks

    return parse(extract_blocks(text, file))

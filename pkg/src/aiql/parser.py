"""Recursive-descent parser producing a :class:`~aiql.ast.QueryAst`.

Grammar accepted (EBNF)::

    query        = 'MODEL' string ';' 'VERSION' version ';'
                   { 'LIST' template ';' } output { output } ;
    version      = 'FIRST' | 'LAST' | comparator intArith ;
    template     = name ident [ 'RESTRICTIONS' ':' disjunction ] ;
    disjunction  = '(' conjunction ')' { 'OR' '(' conjunction ')' } ;
    conjunction  = member { member } ;
    member       = [ 'NOT' ] ( reference | attribute ) ;
    reference    = [ quantifier ] name ident ;
    attribute    = name ( string | 'true' | 'false' | ENUM
                        | comparator ( date | arith ) ) ;
    quantifier   = 'EXISTS' | 'FOR_ALL' | 'COUNT' '(' int ')'
                 | 'RANGE' '(' int ',' int ')' ;
    output       = 'OUTPUT' ident [ 'ORDER_BY' key { ',' key } ]
                   [ 'ATTRIBUTE' name { ',' name } ] ';' ;
    key          = name ( 'ASC' | 'DESC' ) ;
    arith        = term { ( '+' | '-' ) term } ;
    term         = factor { ( '*' | '/' ) factor } ;
    factor       = [ '-' ] number | '(' arith ')' ;

An unquantified ``name IDENT`` pair is read as an enum comparison when the
second word is an unescaped all-uppercase identifier and as a template
reference otherwise; the validator reinterprets the enum reading when the
name turns out to be a relation.
"""

from __future__ import annotations

from aiql import ast
from aiql.errors import QuerySyntaxError
from aiql.lexer import Token, tokenize
from aiql.metamodel import ENUM_LITERAL_RE

QUANTIFIERS = frozenset({"EXISTS", "FOR_ALL", "COUNT", "RANGE"})


def describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "KW":
        return f"keyword {tok.value}"
    if tok.kind == "IDENT":
        return f"identifier {tok.value!r}"
    if tok.kind == "STRING":
        return f"string {tok.value!r}"
    if tok.kind == "DATE":
        return "date literal"
    return repr(str(tok.value))


def is_enum_word(tok: Token) -> bool:
    return tok.kind == "IDENT" and not tok.escaped and bool(ENUM_LITERAL_RE.match(tok.value))


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text, include_eof=True)
        self.i = 0
        self._tried: set[str] = set()
        self._tried_at = -1
        # what the parser was doing; read by the completer after a failure at end of input
        self.ctx: dict[str, object] = {}

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def note(self, *labels: str) -> None:
        if self._tried_at != self.i:
            self._tried_at = self.i
            self._tried = set()
        self._tried.update(labels)

    def at_kw(self, *words: str) -> bool:
        self.note(*words)
        return self.tok.kind == "KW" and self.tok.value in words

    def at(self, kind: str, label: str) -> bool:
        self.note(label)
        return self.tok.kind == kind

    def fail(self, expected=(), message: str | None = None):
        self.note(*expected)
        tok = self.tok
        raise QuerySyntaxError(message or f"unexpected {describe(tok)}", tok.pos, frozenset(self._tried))

    def take(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail()
        return self.take()

    def expect(self, kind: str, label: str) -> Token:
        if not self.at(kind, label):
            self.fail()
        return self.take()

    def ident(self, label: str) -> Token:
        self.ctx["slot"] = label
        return self.expect("IDENT", label)

    # -- grammar ------------------------------------------------------------

    def query(self) -> ast.QueryAst:
        start = self.tok.pos
        if not self.at_kw("MODEL"):
            self.fail(message="query must start with a MODEL header")
        self.take()
        path = self.expect("STRING", "model path string")
        if not path.value:
            raise QuerySyntaxError("model path must not be empty", path.pos)
        self.expect("SEMI", "';'")
        self.expect_kw("VERSION")
        version = self.version()
        self.expect("SEMI", "';'")

        templates = []
        while self.at_kw("LIST"):
            self.take()
            templates.append(self.template())
            self.expect("SEMI", "';'")
        outputs = []
        while self.at_kw("OUTPUT"):
            outputs.append(self.output())
        if not outputs:
            self.fail(message="query needs at least one OUTPUT directive"
                      if self.tok.kind == "EOF" else None)
        if not self.at("EOF", "end of input"):
            self.fail()
        return ast.QueryAst(path.value, version, tuple(templates), tuple(outputs), pos=start)

    def version(self) -> ast.VersionSelector:
        pos = self.tok.pos
        if self.at_kw("FIRST"):
            self.take()
            return ast.VersionSelector("first", pos=pos)
        if self.at_kw("LAST"):
            self.take()
            return ast.VersionSelector("last", pos=pos)
        if self.at("CMP", "comparator"):
            op = self.take().value
            rhs = self.arith()
            if ast.arith_is_float(rhs) is not False:
                raise QuerySyntaxError("VERSION expressions take integer literals only", rhs.pos)
            return ast.VersionSelector("filter", op, rhs, pos=pos)
        self.fail()

    def template(self) -> ast.TemplateAst:
        self.ctx.clear()
        type_tok = self.ident("type name")
        self.ctx["template_type"] = type_tok.value
        ident = self.ident("new template identifier")
        self.ctx["template_id"] = ident.value
        restrictions = None
        if self.at_kw("RESTRICTIONS"):
            self.take()
            self.expect("COLON", "':'")
            restrictions = self.disjunction()
        elif not self.at("SEMI", "';'"):
            self.fail({"RESTRICTIONS", "';'"})
        return ast.TemplateAst(type_tok.value, ident.value, restrictions, escaped=ident.escaped,
                               pos=ident.pos, type_pos=type_tok.pos)

    def disjunction(self) -> ast.Disjunction:
        pos = self.tok.pos
        groups = [self.group()]
        while self.at_kw("OR"):
            self.take()
            groups.append(self.group())
        return ast.Disjunction(tuple(groups), pos=pos)

    def group(self) -> ast.Conjunction:
        self.expect("LPAREN", "'('")
        pos = self.tok.pos
        members = [self.member()]
        while not self.at("RPAREN", "')'"):
            members.append(self.member())
        self.take()
        return ast.Conjunction(tuple(members), pos=pos)

    def member(self) -> ast.Member:
        pos = self.tok.pos
        negated = False
        if self.at_kw("NOT"):
            self.take()
            negated = True
        self.ctx.pop("member_name", None)
        self.ctx.pop("quantified", None)
        if self.at_kw(*QUANTIFIERS):
            quant = self.quantifier()
            self.ctx["quantified"] = True
            rel = self.ident("reference name")
            self.ctx["member_name"] = rel.value
            target = self.ident("template identifier")
            body = ast.RefRestriction(quant, rel.value, target.value, pos=rel.pos, template_pos=target.pos)
            return ast.Member(negated, body, pos=pos)
        self.ctx["slot"] = "member name"
        if not self.at("IDENT", "member name"):
            self.fail()
        name = self.take()
        self.ctx["member_name"] = name.value
        self.ctx["slot"] = "attribute value"
        nxt = self.tok
        if nxt.kind == "IDENT" and not is_enum_word(nxt):
            self.take()
            body = ast.RefRestriction(None, name.value, nxt.value, pos=name.pos, template_pos=nxt.pos)
        else:
            body = ast.AttrRestriction(name.value, self.attr_expr(), pos=name.pos)
        return ast.Member(negated, body, pos=pos)

    def quantifier(self) -> ast.Quantifier:
        tok = self.take()
        if tok.value in ("EXISTS", "FOR_ALL"):
            return ast.Quantifier(tok.value, pos=tok.pos)
        self.expect("LPAREN", "'('")
        low = self.expect("INT", "non-negative integer").value
        high = None
        if tok.value == "RANGE":
            self.expect("COMMA", "','")
            high = self.expect("INT", "non-negative integer").value
            if low > high:
                raise QuerySyntaxError(f"RANGE({low},{high}): lower bound exceeds upper bound", tok.pos)
        self.expect("RPAREN", "')'")
        return ast.Quantifier(tok.value, low, high, pos=tok.pos)

    def attr_expr(self) -> ast.AttrExpr:
        tok = self.tok
        if self.at("STRING", "string"):
            self.take()
            return ast.StringRegex(tok.value, pos=tok.pos)
        if self.at_kw("true", "false"):
            self.take()
            return ast.BoolLit(tok.value == "true", pos=tok.pos)
        self.note("enum literal", "template identifier")
        if is_enum_word(tok):
            self.take()
            return ast.EnumLit(tok.value, pos=tok.pos)
        if self.at("CMP", "comparator"):
            op = self.take().value
            self.ctx["slot"] = "number"
            if self.at("DATE", "date"):
                return ast.DateCompare(op, self.take().value, pos=tok.pos)
            rhs = self.arith()
            kind = ast.arith_is_float(rhs)
            if kind is None:
                raise QuerySyntaxError("arithmetic mixes int and float literals", rhs.pos)
            return (ast.FloatCompare if kind else ast.IntCompare)(op, rhs, pos=tok.pos)
        self.fail()

    def arith(self) -> ast.Arith:
        node = self.term()
        while self._at_op("+-"):
            op = self.take()
            node = ast.BinOp(op.value, node, self.term(), pos=op.pos)
        return node

    def term(self) -> ast.Arith:
        node = self.factor()
        while self._at_op("*/"):
            op = self.take()
            node = ast.BinOp(op.value, node, self.factor(), pos=op.pos)
        return node

    def factor(self) -> ast.Arith:
        tok = self.tok
        if self.at("LPAREN", "'('"):
            self.take()
            node = self.arith()
            self.expect("RPAREN", "')'")
            return node
        sign = 1
        if self._at_op("-"):
            self.take()
            sign = -1
        self.note("number")
        if self.tok.kind in ("INT", "FLOAT"):
            return ast.Num(sign * self.take().value, pos=tok.pos)
        self.fail()

    def _at_op(self, ops: str) -> bool:
        self.note(*(f"'{c}'" for c in ops))
        return self.tok.kind == "ARITH" and self.tok.value in ops

    def output(self) -> ast.OutputAst:
        self.expect_kw("OUTPUT")
        self.ctx.clear()
        ident = self.ident("template identifier")
        self.ctx["output_template"] = ident.value
        keys = []
        projection = None
        proj_pos = ()
        if self.at_kw("ORDER_BY"):
            self.take()
            self.ctx["listed"] = listed = []
            keys.append(self.order_key())
            listed.append(keys[-1].attribute)
            while self.at("COMMA", "','"):
                self.take()
                keys.append(self.order_key())
                listed.append(keys[-1].attribute)
            seen = set()
            for k in keys:
                if k.attribute in seen:
                    raise QuerySyntaxError(f"duplicate ORDER_BY key {k.attribute!r}", k.pos)
                seen.add(k.attribute)
        if self.at_kw("ATTRIBUTE"):
            self.take()
            self.ctx["listed"] = listed = []
            names = [self.ident("attribute name")]
            listed.append(names[-1].value)
            while self.at("COMMA", "','"):
                self.take()
                names.append(self.ident("attribute name"))
                listed.append(names[-1].value)
            seen = set()
            for n in names:
                if n.value in seen:
                    raise QuerySyntaxError(f"duplicate ATTRIBUTE name {n.value!r}", n.pos)
                seen.add(n.value)
            projection = tuple(n.value for n in names)
            proj_pos = tuple(n.pos for n in names)
        self.expect("SEMI", "';'")
        return ast.OutputAst(ident.value, tuple(keys), projection, pos=ident.pos, projection_pos=proj_pos)

    def order_key(self) -> ast.OrderKey:
        name = self.ident("attribute name")
        if not self.at_kw("ASC", "DESC"):
            self.fail()
        return ast.OrderKey(name.value, self.take().value == "DESC", pos=name.pos)


def parse_query(text: str) -> ast.QueryAst:
    return Parser(text).query()

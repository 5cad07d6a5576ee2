"""Parser and printer for group definition files.

Grammar (line comments start with ``#``)::

    document  := statement*
    statement := 'set' IDENT '=' INT
               | 'group' IDENT '=' block ('*' block)*
    block     := 'shift' '(' finite ')'
               | 'linear' '(' 'p' '=' INT ',' 'matrix' '=' matrix ')'
               | 'companion' '(' 'p' '=' INT ',' 'poly' '=' poly ')'
               | 'heisenberg' '(' 'p' '=' INT ',' 'a' '=' INT ',' 'b' '=' INT ')'
    finite    := C<n> | S<n> | A<n> | D<n> | 'table' '{' row (';' row)* '}'
    matrix    := '[' '[' rat (',' rat)* ']' (',' '[' ... ']')* ']'
    rat       := ['-'] INT ['/' INT]
    poly      := ['-'] term (('+'|'-') term)* with term = rat ['*' X['^'INT]] | X['^'INT]

Parse errors carry line and column; validation errors (non-contractive
matrix, bad weights, invalid table) are raised at the offending block's
position.  Printing is canonical and parse(print(parse(s))) returns a
document equal to parse(s).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DslSyntaxError, ValidationError
from .finitegroup import FiniteGroup, catalog_from_token
from .groupmodel import ContractionGroup, HeisenbergBlock, LinearBlock, ShiftBlock
from .linalg import companion_matrix
from .padic import DEFAULT_PRECISION, Poly, poly_to_str

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\]{},;=*/^+-])
    """,
    re.VERBOSE,
)

_CATALOG_TOKEN = re.compile(r"^[CSAD]\d+$")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'int' | 'ident' | punctuation literal | 'eof'
    text: str
    line: int
    column: int


def _tokenize(source: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(text)
        else:
            tok_kind = text if kind == "punct" else kind
            tokens.append(_Token(tok_kind, text, line, col))
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class Settings:
    precision: int = DEFAULT_PRECISION
    seed: int = 0


@dataclass(frozen=True)
class GroupSpecDocument:
    """Named group definitions plus optional settings."""

    groups: tuple  # ((name, ContractionGroup), ...) in definition order
    settings: Settings = field(default_factory=Settings)

    def group(self, name: str) -> ContractionGroup:
        for n, g in self.groups:
            if n == name:
                return g
        raise KeyError(name)


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise DslSyntaxError(
                f"unexpected {tok.text!r}", tok.line, tok.column, expected=[kind]
            )
        return self.next()

    def expect_keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            raise DslSyntaxError(
                f"unexpected {tok.text!r}", tok.line, tok.column, expected=[word]
            )
        return self.next()

    # -- grammar -------------------------------------------------------------

    def document(self) -> GroupSpecDocument:
        groups = []
        names = set()
        precision = DEFAULT_PRECISION
        seed = 0
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "ident" and tok.text == "set":
                key, value = self.set_statement()
                if key == "precision":
                    if value < 1:
                        raise ValidationError("precision must be >= 1", tok.line, tok.column)
                    precision = value
                elif key == "seed":
                    seed = value
                else:
                    raise ValidationError(f"unknown setting {key!r}", tok.line, tok.column)
            elif tok.kind == "ident" and tok.text == "group":
                name, group = self.group_statement()
                if name in names:
                    raise ValidationError(f"duplicate group name {name!r}", tok.line, tok.column)
                names.add(name)
                groups.append((name, group))
            else:
                raise DslSyntaxError(
                    f"unexpected {tok.text!r}", tok.line, tok.column, expected=["group", "set"]
                )
        return GroupSpecDocument(
            groups=tuple(groups), settings=Settings(precision=precision, seed=seed)
        )

    def set_statement(self):
        self.expect_keyword("set")
        key = self.expect("ident").text
        self.expect("=")
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        value = int(self.expect("int").text)
        return key, -value if neg else value

    def group_statement(self):
        self.expect_keyword("group")
        name = self.expect("ident").text
        self.expect("=")
        blocks = [self.block()]
        while self.peek().kind == "*":
            self.next()
            blocks.append(self.block())
        return name, ContractionGroup(blocks)

    def block(self):
        tok = self.peek()
        if tok.kind != "ident":
            raise DslSyntaxError(
                f"unexpected {tok.text!r}",
                tok.line,
                tok.column,
                expected=["shift", "linear", "companion", "heisenberg"],
            )
        try:
            if tok.text == "shift":
                return self.shift_block()
            if tok.text == "linear":
                return self.linear_block()
            if tok.text == "companion":
                return self.companion_block()
            if tok.text == "heisenberg":
                return self.heisenberg_block()
        except ValidationError as exc:
            if exc.line is None:
                raise ValidationError(str(exc), tok.line, tok.column) from exc
            raise
        raise DslSyntaxError(
            f"unknown block kind {tok.text!r}",
            tok.line,
            tok.column,
            expected=["shift", "linear", "companion", "heisenberg"],
        )

    def shift_block(self) -> ShiftBlock:
        self.expect_keyword("shift")
        self.expect("(")
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "table":
            group = self.table_literal()
        else:
            ident = self.expect("ident")
            if not _CATALOG_TOKEN.match(ident.text):
                raise DslSyntaxError(
                    f"unknown finite-group token {ident.text!r}",
                    ident.line,
                    ident.column,
                    expected=["C<n>", "S<n>", "A<n>", "D<n>", "table{...}"],
                )
            group = catalog_from_token(ident.text)
        self.expect(")")
        return ShiftBlock(group)

    def table_literal(self) -> FiniteGroup:
        start = self.expect_keyword("table")
        self.expect("{")
        rows = [self.int_row()]
        while self.peek().kind == ";":
            self.next()
            rows.append(self.int_row())
        self.expect("}")
        if any(len(r) != len(rows) for r in rows):
            raise ValidationError(
                f"table must be square, got {len(rows)} rows", start.line, start.column
            )
        return FiniteGroup(rows)

    def int_row(self):
        row = [int(self.expect("int").text)]
        while self.peek().kind == ",":
            self.next()
            row.append(int(self.expect("int").text))
        return row

    def keyed_int(self, key: str) -> int:
        self.expect_keyword(key)
        self.expect("=")
        return int(self.expect("int").text)

    def linear_block(self) -> LinearBlock:
        self.expect_keyword("linear")
        self.expect("(")
        p = self.keyed_int("p")
        self.expect(",")
        self.expect_keyword("matrix")
        self.expect("=")
        rows = self.matrix_literal()
        self.expect(")")
        return LinearBlock.create(p, rows)

    def matrix_literal(self):
        self.expect("[")
        rows = [self.vector_literal()]
        while self.peek().kind == ",":
            self.next()
            rows.append(self.vector_literal())
        self.expect("]")
        return rows

    def vector_literal(self):
        self.expect("[")
        out = [self.rational()]
        while self.peek().kind == ",":
            self.next()
            out.append(self.rational())
        self.expect("]")
        return out

    def rational(self) -> Fraction:
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        num = int(self.expect("int").text)
        den = 1
        if self.peek().kind == "/":
            self.next()
            den = int(self.expect("int").text)
            if den == 0:
                tok = self.tokens[self.i - 1]
                raise ValidationError("zero denominator", tok.line, tok.column)
        q = Fraction(num, den)
        return -q if neg else q

    def companion_block(self) -> LinearBlock:
        self.expect_keyword("companion")
        self.expect("(")
        p = self.keyed_int("p")
        self.expect(",")
        self.expect_keyword("poly")
        self.expect("=")
        f = self.poly_expr()
        self.expect(")")
        if not f.monic or f.degree < 1:
            raise ValidationError(f"companion needs a monic polynomial, got {poly_to_str(f)}")
        return LinearBlock.create(p, companion_matrix(f))

    def poly_expr(self) -> Poly:
        acc = Poly([])
        sign = 1
        if self.peek().kind in ("+", "-"):
            sign = -1 if self.next().kind == "-" else 1
        acc = acc + self.poly_term() * sign
        while self.peek().kind in ("+", "-"):
            sign = -1 if self.next().kind == "-" else 1
            acc = acc + self.poly_term() * sign
        return acc

    def poly_term(self) -> Poly:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.text != "X":
                raise DslSyntaxError(
                    f"unexpected {tok.text!r}", tok.line, tok.column, expected=["X", "number"]
                )
            return self.x_power()
        coeff = self.rational()
        if self.peek().kind == "*":
            self.next()
            return self.x_power() * coeff
        return Poly([coeff])

    def x_power(self) -> Poly:
        tok = self.expect("ident")
        if tok.text != "X":
            raise DslSyntaxError(
                f"unexpected {tok.text!r}", tok.line, tok.column, expected=["X"]
            )
        if self.peek().kind == "^":
            self.next()
            exp = int(self.expect("int").text)
            return Poly.x_power(exp)
        return Poly.x_power(1)

    def heisenberg_block(self) -> HeisenbergBlock:
        self.expect_keyword("heisenberg")
        self.expect("(")
        p = self.keyed_int("p")
        self.expect(",")
        a = self.keyed_int("a")
        self.expect(",")
        b = self.keyed_int("b")
        self.expect(")")
        return HeisenbergBlock(p, a, b)


def parse(source: str) -> GroupSpecDocument:
    return _Parser(_tokenize(source)).document()


# ---------------------------------------------------------------------------
# canonical printing
# ---------------------------------------------------------------------------


def _print_finite(F: FiniteGroup) -> str:
    if F.name and _CATALOG_TOKEN.match(F.name):
        try:
            if catalog_from_token(F.name) == F:
                return F.name
        except ValidationError:
            pass
    rows = ";".join(",".join(str(x) for x in row) for row in F.table)
    return "table{" + rows + "}"


def print_block(block) -> str:
    if isinstance(block, ShiftBlock):
        return f"shift({_print_finite(block.group)})"
    if isinstance(block, LinearBlock):
        rows = ", ".join(
            "[" + ", ".join(_print_rat(x) for x in row) + "]" for row in block.matrix
        )
        return f"linear(p={block.p}, matrix=[{rows}])"
    return f"heisenberg(p={block.p}, a={block.a}, b={block.b})"


def _print_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def print_document(doc: GroupSpecDocument) -> str:
    lines = [
        f"set precision = {doc.settings.precision}",
        f"set seed = {doc.settings.seed}",
    ]
    for name, group in doc.groups:
        blocks = " * ".join(print_block(b) for b in group.blocks)
        lines.append(f"group {name} = {blocks}")
    return "\n".join(lines) + "\n"

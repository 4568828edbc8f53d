# SPDX-License-Identifier: Apache-2.0

import csv
import io
import itertools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

from .common import (
    MAX_TABLE_VARIABLES,
    DomainError,
    ParseError,
    TooManyVariablesError,
    UnboundVariableError,
    offset_in_bytes,
)

log = logging.getLogger(__name__)

NOT_PRECEDENCE: int = 7

_IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_RESERVED_WORDS = frozenset({"T", "F"})
_KEYWORDS = frozenset({"xor", "nand"})


class Connective(Enum):
    AND = "&"
    NAND = "nand"
    OR = "|"
    XOR = "xor"
    IMPLIES = "->"
    IFF = "<->"

    @property
    def precedence(self) -> int:
        # Higher binds tighter; negation binds tightest of all (NOT_PRECEDENCE)
        match self:
            case Connective.AND:
                return 6
            case Connective.NAND:
                return 5
            case Connective.OR:
                return 4
            case Connective.XOR:
                return 3
            case Connective.IMPLIES:
                return 2
            case Connective.IFF:
                return 1

    @property
    def right_associative(self) -> bool:
        return self is Connective.IMPLIES

    def apply(self, p: bool, q: bool) -> bool:
        match self:
            case Connective.AND:
                return p and q
            case Connective.NAND:
                return not (p and q)
            case Connective.OR:
                return p or q
            case Connective.XOR:
                return p != q
            case Connective.IMPLIES:
                return (not p) or q
            case Connective.IFF:
                return p == q


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if _IDENTIFIER.fullmatch(self.name) is None:
            raise DomainError(f"Invalid variable name {self.name!r}")
        if self.name in _RESERVED_WORDS or self.name.lower() in _KEYWORDS:
            raise DomainError(f"Variable name {self.name!r} is reserved")


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class Binary:
    op: Connective
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Const, Not, Binary]


class FormulaClass(Enum):
    TAUTOLOGY = "tautology"
    CONTRADICTION = "contradiction"
    CONTINGENT = "contingent"


class ImplicationKind(Enum):
    CONVERSE = "converse"
    INVERSE = "inverse"
    CONTRAPOSITIVE = "contrapositive"


class Quantifier(Enum):
    FORALL = "forall"
    EXISTS = "exists"

    @property
    def flipped(self) -> "Quantifier":
        return Quantifier.EXISTS if self is Quantifier.FORALL else Quantifier.FORALL


# Tokenizer

_SYMBOLS: list[tuple[str, str]] = [
    ("<->", "IFF"),
    ("->", "IMPLIES"),
    ("↔", "IFF"),
    ("→", "IMPLIES"),
    ("!", "NOT"),
    ("~", "NOT"),
    ("¬", "NOT"),
    ("&", "AND"),
    ("∧", "AND"),
    ("|", "OR"),
    ("∨", "OR"),
    ("⊕", "XOR"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
]

_CONNECTIVE_TOKENS: dict[str, Connective] = {
    "AND": Connective.AND,
    "NAND": Connective.NAND,
    "OR": Connective.OR,
    "XOR": Connective.XOR,
    "IMPLIES": Connective.IMPLIES,
    "IFF": Connective.IFF,
}

_OPERAND_START = frozenset({"identifier", "T", "F", "!", "~", "("})
_AFTER_OPERAND = frozenset({"&", "|", "->", "<->", "xor", "nand", ")", "end of input"})


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    index: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        for symbol, kind in _SYMBOLS:
            if text.startswith(symbol, i):
                tokens.append(_Token(kind, symbol, i))
                i += len(symbol)
                break
        else:
            match = _IDENTIFIER.match(text, i)
            if match is None:
                raise ParseError(
                    f"Unexpected character {text[i]!r}",
                    offset_in_bytes(text, i),
                    _OPERAND_START | _AFTER_OPERAND,
                )
            word = match.group(0)
            if word.lower() in _KEYWORDS:
                kind = word.upper()
            elif word in _RESERVED_WORDS:
                kind = "CONST"
            else:
                kind = "IDENT"
            tokens.append(_Token(kind, word, i))
            i = match.end()
    tokens.append(_Token("END", "", len(text)))
    return tokens


class _FormulaParser:
    """
    Recursive-descent parser with precedence climbing.

    Precedence (tightest first): ! & nand | xor -> <->. `->` is right
    associative, every other connective is left associative.
    """

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _error(self, message: str, expected: frozenset[str]) -> ParseError:
        return ParseError(message, offset_in_bytes(self.text, self.current.index), expected)

    def parse(self) -> Formula:
        formula = self._binary(1)
        if self.current.kind != "END":
            raise self._error(f"Unexpected token {self.current.text!r}", _AFTER_OPERAND)
        return formula

    def _binary(self, min_precedence: int) -> Formula:
        left = self._unary()
        while True:
            op = _CONNECTIVE_TOKENS.get(self.current.kind)
            if op is None or op.precedence < min_precedence:
                return left
            self.pos += 1
            next_min = op.precedence if op.right_associative else op.precedence + 1
            right = self._binary(next_min)
            left = Binary(op, left, right)

    def _unary(self) -> Formula:
        token = self.current
        match token.kind:
            case "NOT":
                self.pos += 1
                return Not(self._unary())
            case "LPAREN":
                self.pos += 1
                inner = self._binary(1)
                if self.current.kind != "RPAREN":
                    raise self._error("Unbalanced parenthesis", _AFTER_OPERAND)
                self.pos += 1
                return inner
            case "IDENT":
                self.pos += 1
                return Var(token.text)
            case "CONST":
                self.pos += 1
                return Const(token.text == "T")
            case "END":
                raise self._error("Unexpected end of input", _OPERAND_START)
            case _:
                raise self._error(f"Unexpected token {token.text!r}", _OPERAND_START)


def parse_formula(text: str) -> Formula:
    if not text or text.isspace():
        raise ParseError("Empty formula", 0, _OPERAND_START)
    return _FormulaParser(text).parse()


def _format(f: Formula, min_precedence: int) -> str:
    match f:
        case Var(name):
            return name
        case Const(value):
            return "T" if value else "F"
        case Not(child):
            return "!" + _format(child, NOT_PRECEDENCE)
        case Binary(op, left, right):
            p = op.precedence
            left_min = p + 1 if op.right_associative else p
            right_min = p if op.right_associative else p + 1
            text = f"{_format(left, left_min)} {op.value} {_format(right, right_min)}"
            return f"({text})" if p < min_precedence else text
    raise DomainError(f"Not a formula: {f!r}")


def format_formula(f: Formula) -> str:
    """Renders `f` in ASCII syntax with the fewest parentheses that parse back to `f`."""
    return _format(f, 0)


def variables(f: Formula) -> tuple[str, ...]:
    """Variable names of `f` in order of first occurrence."""
    seen: dict[str, None] = {}

    def walk(node: Formula) -> None:
        match node:
            case Var(name):
                seen.setdefault(name, None)
            case Not(child):
                walk(child)
            case Binary(_, left, right):
                walk(left)
                walk(right)

    walk(f)
    return tuple(seen)


def evaluate(f: Formula, assignment: Mapping[str, bool]) -> bool:
    match f:
        case Var(name):
            if name not in assignment:
                raise UnboundVariableError(name)
            return bool(assignment[name])
        case Const(value):
            return value
        case Not(child):
            return not evaluate(child, assignment)
        case Binary(op, left, right):
            return op.apply(evaluate(left, assignment), evaluate(right, assignment))
    raise DomainError(f"Not a formula: {f!r}")


@dataclass(frozen=True)
class TruthRow:
    assignment: tuple[bool, ...]
    values: tuple[bool, ...]


@dataclass(frozen=True)
class TruthTable:
    variables: tuple[str, ...]
    formulas: tuple[Formula, ...]
    rows: tuple[TruthRow, ...]

    def column(self, index: int) -> tuple[bool, ...]:
        return tuple(row.values[index] for row in self.rows)

    @property
    def header(self) -> list[str]:
        return list(self.variables) + [format_formula(f) for f in self.formulas]

    def cells(self) -> list[list[str]]:
        return [
            ["T" if v else "F" for v in row.assignment + row.values] for row in self.rows
        ]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.cells())
        return out.getvalue()

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "formulas": [format_formula(f) for f in self.formulas],
            "rows": [
                {
                    "assignment": ["T" if v else "F" for v in row.assignment],
                    "values": ["T" if v else "F" for v in row.values],
                }
                for row in self.rows
            ],
        }


def truth_table(formulas: Sequence[Formula]) -> TruthTable:
    """
    Tabulates `formulas` over the union of their variables.

    Rows are enumerated with the first variable as the most significant
    position and T before F, i.e. TT, TF, FT, FF for two variables.
    """
    if not formulas:
        raise DomainError("A truth table needs at least one formula")

    names: dict[str, None] = {}
    for f in formulas:
        for name in variables(f):
            names.setdefault(name, None)
    header = tuple(names)

    if len(header) > MAX_TABLE_VARIABLES:
        raise TooManyVariablesError(
            f"{len(header)} variables exceed the limit of {MAX_TABLE_VARIABLES}"
        )

    log.debug(f"Truth table over {header} for {len(formulas)} formula(s)")
    rows = []
    for values in itertools.product((True, False), repeat=len(header)):
        assignment = dict(zip(header, values))
        rows.append(TruthRow(values, tuple(evaluate(f, assignment) for f in formulas)))
    return TruthTable(header, tuple(formulas), tuple(rows))


def classify(f: Formula) -> FormulaClass:
    column = truth_table([f]).column(0)
    if all(column):
        return FormulaClass.TAUTOLOGY
    if not any(column):
        return FormulaClass.CONTRADICTION
    return FormulaClass.CONTINGENT


def equivalent(f: Formula, g: Formula) -> bool:
    table = truth_table([f, g])
    return table.column(0) == table.column(1)


def implication_transform(f: Formula, kind: ImplicationKind) -> Formula:
    match f:
        case Binary(Connective.IMPLIES, p, q):
            pass
        case _:
            raise DomainError(f"`{format_formula(f)}` is not an implication")

    match kind:
        case ImplicationKind.CONVERSE:
            return Binary(Connective.IMPLIES, q, p)
        case ImplicationKind.INVERSE:
            return Binary(Connective.IMPLIES, Not(p), Not(q))
        case ImplicationKind.CONTRAPOSITIVE:
            return Binary(Connective.IMPLIES, Not(q), Not(p))


def xor_swap(p: bool, q: bool) -> tuple[bool, bool]:
    """
    Runs p := p xor q; q := p xor q; p := p xor q and returns the final (p, q).
    """
    step = parse_formula("p xor q")
    state = {"p": p, "q": q}
    for target in ("p", "q", "p"):
        state[target] = evaluate(step, state)
    return state["p"], state["q"]


@dataclass(frozen=True)
class QuantifierBinding:
    quantifier: Quantifier
    variable: str
    # Opaque description of the domain, never interpreted
    domain: str = ""


@dataclass(frozen=True)
class QuantifierStatement:
    prefix: tuple[QuantifierBinding, ...]
    matrix: Formula

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        names = [b.variable for b in self.prefix]
        if len(set(names)) != len(names):
            raise DomainError(f"Bound variables must be distinct, got {names}")


def negate_quantified(s: QuantifierStatement) -> QuantifierStatement:
    """Flips every quantifier of the prefix and negates the matrix."""
    prefix = tuple(
        QuantifierBinding(b.quantifier.flipped, b.variable, b.domain) for b in s.prefix
    )
    return QuantifierStatement(prefix, Not(s.matrix))


def format_quantified(s: QuantifierStatement, domain_separator: str = " in ") -> str:
    parts = []
    for b in s.prefix:
        domain = f"{domain_separator}{b.domain}" if b.domain else ""
        parts.append(f"({b.quantifier.value} {b.variable}{domain})")
    matrix = format_formula(s.matrix)
    return f"{''.join(parts)} {matrix}" if parts else matrix

# SPDX-License-Identifier: Apache-2.0

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator

from .common import BaseRangeError, DigitRangeError, DomainError, ParseError, offset_in_bytes
from .exact_number import Rational

log = logging.getLogger(__name__)

MIN_BASE: int = 2
MAX_BASE: int = 16
DIGITS: str = "0123456789ABCDEF"


class Sign(Enum):
    PLUS = "+"
    MINUS = "-"


def _check_base(base: int) -> None:
    if not MIN_BASE <= base <= MAX_BASE:
        raise BaseRangeError(f"Base must lie in [{MIN_BASE}, {MAX_BASE}], got {base}")


@dataclass(frozen=True)
class RadixExpansion:
    """
    sign * (integer_digits . pre_period period period period ...) in base `base`.

    A terminating expansion carries the period (0,). Expansions built by
    `expand_rational` are canonical: the period is minimal, never all (base - 1),
    and the pre-period is minimal. Non-canonical expansions (e.g. 0.4(9)) can be
    constructed and parsed; `to_rational` accepts them.
    """

    sign: Sign
    base: int
    integer_digits: tuple[int, ...]
    pre_period: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_base(self.base)
        for name in ("integer_digits", "pre_period", "period"):
            digits = tuple(getattr(self, name))
            object.__setattr__(self, name, digits)
            for d in digits:
                if not 0 <= d < self.base:
                    raise DomainError(f"Digit {d} is not valid in base {self.base}")
        if not self.period:
            raise DomainError("The period must be nonempty")
        if not self.integer_digits:
            raise DomainError("The integer part needs at least one digit")
        if len(self.integer_digits) > 1 and self.integer_digits[0] == 0:
            raise DomainError("The integer part has a leading zero")

    @property
    def terminating(self) -> bool:
        return self.period == (0,)


def _integer_digits(value: int, base: int) -> tuple[int, ...]:
    digits = []
    while True:
        value, d = divmod(value, base)
        digits.append(d)
        if value == 0:
            return tuple(reversed(digits))


def expand_rational(x: Rational, base: int) -> RadixExpansion:
    """
    Long division of |x| in base `base`.

    A fractional remainder determines the whole tail of digits that follows it,
    so the first remainder seen twice closes the period. The remainder 0 yields
    the period (0,).
    """
    _check_base(base)
    x = Fraction(x)
    sign = Sign.MINUS if x < 0 else Sign.PLUS
    magnitude = abs(x)

    whole, remainder = divmod(magnitude.numerator, magnitude.denominator)
    divisor = magnitude.denominator

    seen: dict[int, int] = {}
    digits: list[int] = []
    while remainder not in seen:
        seen[remainder] = len(digits)
        digit, remainder = divmod(remainder * base, divisor)
        digits.append(digit)

    start = seen[remainder]
    log.debug(f"Expansion of {x} in base {base}: period at {start}, length {len(digits) - start}")
    return RadixExpansion(
        sign=sign,
        base=base,
        integer_digits=_integer_digits(whole, base),
        pre_period=tuple(digits[:start]),
        period=tuple(digits[start:]),
    )


def _digits_value(digits: tuple[int, ...], base: int) -> int:
    value = 0
    for d in digits:
        value = value * base + d
    return value


def to_rational(e: RadixExpansion) -> Rational:
    """
    The value of an expansion: the repeating block contributes the geometric
    series  P * (b^-L + b^-2L + ...) = P / (b^L - 1), shifted past the pre-period.
    """
    b = e.base
    integer = _digits_value(e.integer_digits, b)
    shift = b ** len(e.pre_period)
    pre = Fraction(_digits_value(e.pre_period, b), shift)
    repeating = Fraction(_digits_value(e.period, b), (b ** len(e.period) - 1) * shift)
    value = integer + pre + repeating
    return -value if e.sign is Sign.MINUS else value


def fractional_digits(e: RadixExpansion) -> Iterator[int]:
    """Yields the fractional digits forever."""
    yield from e.pre_period
    yield from itertools.cycle(e.period)


def truncate(e: RadixExpansion, n: int) -> Rational:
    """Value of |e| cut after `n` fractional digits."""
    if n < 0:
        raise DomainError(f"Number of digits must be nonnegative, got {n}")
    b = e.base
    digits = tuple(itertools.islice(fractional_digits(e), n))
    return _digits_value(e.integer_digits, b) + Fraction(_digits_value(digits, b), b**n)


def format_expansion(e: RadixExpansion) -> str:
    """`[-]INT[.PRE][(PERIOD)]_BASE` with uppercase digits; period (0,) is omitted."""
    text = "-" if e.sign is Sign.MINUS else ""
    text += "".join(DIGITS[d] for d in e.integer_digits)
    if e.pre_period or not e.terminating:
        text += "." + "".join(DIGITS[d] for d in e.pre_period)
    if not e.terminating:
        text += "(" + "".join(DIGITS[d] for d in e.period) + ")"
    return f"{text}_{e.base}"


class _ExpansionParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def _error(self, message: str, expected: set[str]) -> ParseError:
        return ParseError(message, offset_in_bytes(self.text, self.pos), expected)

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _digits(self, allow_empty: bool) -> list[tuple[str, int]]:
        start = self.pos
        found = []
        while self._peek() and self._peek().upper() in DIGITS:
            found.append((self._peek(), self.pos))
            self.pos += 1
        if not found and not allow_empty:
            self.pos = start
            raise self._error("Expected a digit", {"0-9", "A-F"})
        return found

    def parse(self) -> RadixExpansion:
        negative = self._peek() == "-"
        if negative:
            self.pos += 1
        integer = self._digits(allow_empty=False)
        pre: list[tuple[str, int]] = []
        period: list[tuple[str, int]] = []
        if self._peek() == ".":
            self.pos += 1
            pre = self._digits(allow_empty=True)
        if self._peek() == "(":
            self.pos += 1
            period = self._digits(allow_empty=False)
            if self._peek() != ")":
                raise self._error("Unclosed period", {")"})
            self.pos += 1
        elif not pre and self.text[self.pos - 1 : self.pos] == ".":
            raise self._error("Expected digits or a period after '.'", {"0-9", "A-F", "("})
        if self._peek() != "_":
            raise self._error("Expected the base suffix", {"_", ".", "("})
        self.pos += 1
        base_start = self.pos
        base_text = self.text[base_start:]
        if not base_text.isdigit() or not base_text.isascii():
            raise self._error("Expected a decimal base", {"2-16"})
        base = int(base_text)
        if not MIN_BASE <= base <= MAX_BASE:
            raise BaseRangeError(f"Base must lie in [{MIN_BASE}, {MAX_BASE}], got {base}")

        def values(found: list[tuple[str, int]]) -> tuple[int, ...]:
            result = []
            for char, index in found:
                d = DIGITS.index(char.upper())
                if d >= base:
                    raise DigitRangeError(
                        f"Digit {char!r} exceeds base {base}",
                        offset_in_bytes(self.text, index),
                        {DIGITS[:base]},
                    )
                result.append(d)
            return tuple(result)

        integer_digits = values(integer)
        # Leading zeros carry no information
        while len(integer_digits) > 1 and integer_digits[0] == 0:
            integer_digits = integer_digits[1:]
        return RadixExpansion(
            sign=Sign.MINUS if negative else Sign.PLUS,
            base=base,
            integer_digits=integer_digits,
            pre_period=values(pre),
            period=values(period) or (0,),
        )


def parse_expansion(text: str) -> RadixExpansion:
    """Parses `[-]DIGITS[.DIGITS]["(" DIGITS ")"]"_"BASE`, digits 0-9A-F in any case."""
    return _ExpansionParser(text.strip()).parse()


def period_bound(x: Rational, base: int) -> int:
    """The denominator of x with every prime shared with `base` removed."""
    d = Fraction(x).denominator
    g = math.gcd(d, base)
    while g > 1:
        while d % g == 0:
            d //= g
        g = math.gcd(d, base)
    return d

# SPDX-License-Identifier: Apache-2.0

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

# Truth tables enumerate 2^n rows; beyond this the table is refused.
MAX_TABLE_VARIABLES: int = 20
# Upper bound on the modulus for exhaustive inverse search in Z/mZ.
MAX_ZMOD_SEARCH: int = 10**6

DEFAULT_TOLERANCE: Fraction = Fraction(1, 10**8)
DEFAULT_MAX_ITER: int = 12


class AnalysisError(RuntimeError):
    """
    A generic exception class for every error raised by this package
    """

    pass


class DomainError(AnalysisError):
    """
    An operation was called outside of its domain (precondition violation)
    """

    pass


class ParseError(AnalysisError):
    """
    Textual input does not match the expected grammar.

    `offset` is the byte offset into the UTF-8 encoded input at which the
    problem was detected, `expected` the set of tokens that would have been
    accepted there.
    """

    def __init__(self, message: str, offset: int = 0, expected: Iterable[str] = ()) -> None:
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class DivisionByZeroError(AnalysisError, ZeroDivisionError):
    pass


class UnboundVariableError(AnalysisError, KeyError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"Variable `{name}` has no assigned value")

    def __str__(self) -> str:
        return self.args[0]


class TooManyVariablesError(DomainError):
    pass


class BaseRangeError(DomainError):
    pass


class DigitRangeError(ParseError):
    pass


class IndexBelowStartError(DomainError, IndexError):
    pass


class IrrationalRootError(DomainError):
    pass


class AmbiguousRoundingError(AnalysisError):
    pass


def offset_in_bytes(text: str, index: int) -> int:
    """Converts a character index into `text` into a UTF-8 byte offset."""
    return len(text[:index].encode("utf-8"))


def exact_sum(values: Iterable[Fraction]) -> Fraction:
    """
    Sums rationals over a running common denominator and reduces once at the end.

    Long sums such as partial sums of 1/k^p keep a denominator of thousands of
    bits; reducing after every addition would run a big gcd per term.
    """
    numerator = 0
    denominator = 1
    for value in values:
        value = Fraction(value)
        d = value.denominator
        g = math.gcd(d, denominator % d)
        scale = d // g
        if scale != 1:
            numerator *= scale
            denominator *= scale
        numerator += value.numerator * (denominator // d)
    return Fraction(numerator, denominator)


def round_down(x: Fraction, denominator: int) -> Fraction:
    return Fraction(math.floor(x * denominator), denominator)


def round_up(x: Fraction, denominator: int) -> Fraction:
    return Fraction(math.ceil(x * denominator), denominator)


def dyadic_scale(x: Fraction, bits: int) -> int:
    """Returns a power of two so that `x` scaled by it has about `bits` significant bits."""
    if x == 0:
        return 1 << bits
    exponent = bits - (abs(x.numerator).bit_length() - x.denominator.bit_length())
    return 1 << max(exponent, 0)


@dataclass(frozen=True)
class CertifiedEnclosure:
    """
    A closed interval [lo, hi] with rational endpoints.

    Operations on enclosures are outward-correct: the result contains every
    value obtainable from points of the operands.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"Empty enclosure: lo={self.lo} > hi={self.hi}")

    @classmethod
    def point(cls, value: Fraction) -> "CertifiedEnclosure":
        return cls(value, value)

    @classmethod
    def around(cls, value: Fraction, radius: Fraction) -> "CertifiedEnclosure":
        return cls(value - radius, value + radius)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def overlaps(self, other: "CertifiedEnclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def distance_to(self, other: "CertifiedEnclosure") -> Fraction:
        """Largest distance between a point of `self` and a point of `other`."""
        return max(self.hi - other.lo, other.hi - self.lo)

    def __add__(self, other: "CertifiedEnclosure") -> "CertifiedEnclosure":
        return CertifiedEnclosure(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> "CertifiedEnclosure":
        return CertifiedEnclosure(-self.hi, -self.lo)

    def __sub__(self, other: "CertifiedEnclosure") -> "CertifiedEnclosure":
        return self + (-other)

    def __mul__(self, other: "CertifiedEnclosure") -> "CertifiedEnclosure":
        products = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return CertifiedEnclosure(min(products), max(products))

    def scale(self, factor: Fraction) -> "CertifiedEnclosure":
        a, b = self.lo * factor, self.hi * factor
        return CertifiedEnclosure(min(a, b), max(a, b))

    def shift(self, offset: Fraction) -> "CertifiedEnclosure":
        return CertifiedEnclosure(self.lo + offset, self.hi + offset)

    def reciprocal(self) -> "CertifiedEnclosure":
        if self.contains(Fraction(0)):
            raise DivisionByZeroError(f"Enclosure {self} contains zero")
        return CertifiedEnclosure(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: "CertifiedEnclosure") -> "CertifiedEnclosure":
        return self * other.reciprocal()

    def __pow__(self, k: int) -> "CertifiedEnclosure":
        if k < 0:
            return self.reciprocal() ** (-k)
        if self.lo >= 0:
            return CertifiedEnclosure(self.lo**k, self.hi**k)
        if self.hi <= 0:
            return (-self) ** k if k % 2 == 0 else -((-self) ** k)
        # Straddles zero
        if k % 2 == 1:
            return CertifiedEnclosure(self.lo**k, self.hi**k)
        return CertifiedEnclosure(Fraction(0), max(self.lo**k, self.hi**k))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _truncated_digits(value: Fraction, digits: int) -> int:
    return math.floor(value * 10**digits)


def _rounded_digits(value: Fraction, digits: int) -> int:
    return math.floor(value * 10**digits + Fraction(1, 2))


def _format_scaled(scaled: int, digits: int) -> str:
    sign = "-" if scaled < 0 else ""
    if digits == 0:
        return f"{sign}{abs(scaled)}"
    whole, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _plus_minus(enclosure: CertifiedEnclosure, digits: int) -> str:
    center = _rounded_digits(enclosure.midpoint, digits)
    radius = enclosure.width / 2 + abs(enclosure.midpoint - Fraction(center, 10**digits))
    bound = math.ceil(radius * 10**digits)
    return f"{_format_scaled(center, digits)} ± {_format_scaled(bound, digits)}"


def render_decimal(enclosure: CertifiedEnclosure, digits: int) -> str:
    """
    Renders the decimal digits shared by every point of `enclosure`.

    At most `digits` fractional digits are printed; fewer if the enclosure is
    too wide to guarantee them. Truncated digits are preferred. When no
    truncation is common to both endpoints, the longest common rounding
    (half up) is printed, and failing that the midpoint with a radius,
    e.g. ``0.50 ± 0.50``. Enclosures that straddle zero always use the
    latter form.
    """
    if digits < 0:
        raise DomainError(f"Number of digits must be nonnegative, got {digits}")

    if enclosure.hi <= 0 and enclosure.lo < 0:
        return "-" + render_decimal(-enclosure, digits)
    if enclosure.lo < 0:
        return _plus_minus(enclosure, digits)

    for digit_of in (_truncated_digits, _rounded_digits):
        for d in range(digits, -1, -1):
            if digit_of(enclosure.lo, d) == digit_of(enclosure.hi, d):
                return _format_scaled(digit_of(enclosure.lo, d), d)

    return _plus_minus(enclosure, digits)

# SPDX-License-Identifier: Apache-2.0

import itertools
import logging
import math
import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .common import MAX_ZMOD_SEARCH, DivisionByZeroError, DomainError, ParseError

log = logging.getLogger(__name__)

Rational = Fraction

_RATIONAL_TEXT = re.compile(r"(-?\d+)(?:/(\d+))?")


def parse_rational(text: str) -> Rational:
    """Parses the `p/q` interchange format (`/q` may be omitted)."""
    match = _RATIONAL_TEXT.fullmatch(text.strip())
    if match is None:
        raise ParseError(f"Not a rational number: {text!r}", 0, {"p", "p/q"})
    numerator, denominator = match.group(1), match.group(2)
    if denominator is not None and int(denominator) == 0:
        raise ParseError(f"Zero denominator in {text!r}", text.index("/") + 1, {"positive integer"})
    return Fraction(int(numerator), int(denominator or 1))


def format_rational(x: Rational) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# Rational arithmetic


class RatOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    NEG = "neg"
    INV = "inv"
    POW = "pow"

    @property
    def binary(self) -> bool:
        return self in (RatOp.ADD, RatOp.SUB, RatOp.MUL, RatOp.DIV)


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def rat_arith(
    op: RatOp, a: Rational, b: Optional[Rational] = None, k: Optional[int] = None
) -> Rational:
    """
    Exact arithmetic on rationals, results in lowest terms.

    Binary operations take `b`, `POW` takes the integer exponent `k`.
    """
    a = Fraction(a)
    if op.binary:
        if b is None:
            raise DomainError(f"Operation `{op.value}` needs two operands")
        b = Fraction(b)

    match op:
        case RatOp.ADD:
            return a + b
        case RatOp.SUB:
            return a - b
        case RatOp.MUL:
            return a * b
        case RatOp.DIV:
            if b == 0:
                raise DivisionByZeroError(f"Division of {a} by zero")
            return a / b
        case RatOp.NEG:
            return -a
        case RatOp.INV:
            if a == 0:
                raise DivisionByZeroError("0 has no multiplicative inverse")
            return 1 / a
        case RatOp.POW:
            if k is None:
                raise DomainError("Operation `pow` needs an integer exponent")
            if k < 0 and a == 0:
                raise DivisionByZeroError(f"0 raised to the negative power {k}")
            return a**k


def rat_compare(a: Rational, b: Rational) -> Ordering:
    if a < b:
        return Ordering.LESS
    if a > b:
        return Ordering.GREATER
    return Ordering.EQUAL


def rat_abs(a: Rational) -> Rational:
    return a if a >= 0 else -a


def rat_floor(a: Rational) -> int:
    return math.floor(Fraction(a))


def rat_max_min(a: Rational, b: Rational) -> tuple[Rational, Rational]:
    """max and min through (a + b ± |a - b|) / 2."""
    spread = rat_abs(a - b)
    return (a + b + spread) / 2, (a + b - spread) / 2


def finite_sup_inf(values: Sequence[Rational]) -> tuple[Rational, Rational]:
    """(inf, sup) of a nonempty finite set; both are attained."""
    if not values:
        raise DomainError("The empty set has no supremum in Q")
    lowest = highest = Fraction(values[0])
    for v in values[1:]:
        highest, _ = rat_max_min(highest, v)
        _, lowest = rat_max_min(lowest, v)
    return lowest, highest


# Q(sqrt 2)


@dataclass(frozen=True)
class QuadRational:
    """The element a + b*sqrt(2) of Q(sqrt 2)."""

    a: Rational
    b: Rational = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __add__(self, other: "QuadRational") -> "QuadRational":
        return QuadRational(self.a + other.a, self.b + other.b)

    def __neg__(self) -> "QuadRational":
        return QuadRational(-self.a, -self.b)

    def __sub__(self, other: "QuadRational") -> "QuadRational":
        return self + (-other)

    def __mul__(self, other: "QuadRational") -> "QuadRational":
        return QuadRational(
            self.a * other.a + 2 * self.b * other.b, self.a * other.b + self.b * other.a
        )

    @property
    def norm(self) -> Rational:
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "QuadRational":
        # The norm vanishes only at 0 since sqrt 2 is irrational
        if self.a == 0 and self.b == 0:
            raise DivisionByZeroError("0 has no inverse in Q(sqrt 2)")
        n = self.norm
        return QuadRational(self.a / n, -self.b / n)

    def __truediv__(self, other: "QuadRational") -> "QuadRational":
        return self * other.inverse()

    def __str__(self) -> str:
        return f"{format_rational(self.a)} + {format_rational(self.b)}*sqrt2"


class QuadOp(Enum):
    ADD = "add"
    MUL = "mul"
    NEG = "neg"
    INV = "inv"


def quad_arith(op: QuadOp, u: QuadRational, v: Optional[QuadRational] = None) -> QuadRational:
    match op:
        case QuadOp.ADD | QuadOp.MUL if v is None:
            raise DomainError(f"Operation `{op.value}` needs two operands")
        case QuadOp.ADD:
            return u + v
        case QuadOp.MUL:
            return u * v
        case QuadOp.NEG:
            return -u
        case QuadOp.INV:
            return u.inverse()


# Z/mZ and F2


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    return all(m % d != 0 for d in range(2, math.isqrt(m) + 1))


@dataclass(frozen=True)
class Residue:
    modulus: int
    value: int

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise DomainError(f"Modulus must be at least 2, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise DomainError(f"{self.value} is not reduced modulo {self.modulus}")

    def _check(self, other: "Residue") -> None:
        if other.modulus != self.modulus:
            raise DomainError(f"Mixed moduli {self.modulus} and {other.modulus}")

    def __add__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.modulus, (self.value + other.value) % self.modulus)

    def __sub__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.modulus, (self.value - other.value) % self.modulus)

    def __mul__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.modulus, (self.value * other.value) % self.modulus)

    def __neg__(self) -> "Residue":
        return Residue(self.modulus, -self.value % self.modulus)

    def __str__(self) -> str:
        return f"[{self.value}]_{self.modulus}"


class ZMod:
    """
    The ring Z/mZ of residue classes modulo m.

    Inverses are found by exhaustive search over the m residues, so the
    modulus is limited to MAX_ZMOD_SEARCH.
    """

    def __init__(self, m: int) -> None:
        if m < 2:
            raise DomainError(f"Modulus must be at least 2, got {m}")
        if m > MAX_ZMOD_SEARCH:
            raise DomainError(f"Modulus {m} exceeds the exhaustive search limit {MAX_ZMOD_SEARCH}")
        self.m = m

    def residue(self, value: int) -> Residue:
        return Residue(self.m, value % self.m)

    def elements(self) -> Iterator[Residue]:
        for v in range(self.m):
            yield Residue(self.m, v)

    def residue_arith(self, op: RatOp, a: Residue, b: Optional[Residue] = None) -> Residue:
        match op:
            case RatOp.ADD:
                return a + b
            case RatOp.SUB:
                return a - b
            case RatOp.MUL:
                return a * b
            case RatOp.NEG:
                return -a
            case RatOp.INV | RatOp.DIV:
                inverse = self.residue_inverse(b if op is RatOp.DIV else a)
                if inverse is None:
                    raise DivisionByZeroError(f"No inverse modulo {self.m}")
                return a * inverse if op is RatOp.DIV else inverse
            case _:
                raise DomainError(f"Operation `{op.value}` is not defined on residues")

    def residue_inverse(self, a: Residue) -> Optional[Residue]:
        for candidate in self.elements():
            if (a * candidate).value == 1:
                return candidate
        return None

    def is_field(self) -> bool:
        nonzero = itertools.islice(self.elements(), 1, None)
        field = all(self.residue_inverse(a) is not None for a in nonzero)
        log.debug(f"Z/{self.m}Z is_field={field}")
        return field

    def tables(self) -> tuple[list[list[int]], list[list[int]]]:
        add = [[(a + b).value for b in self.elements()] for a in self.elements()]
        mul = [[(a * b).value for b in self.elements()] for a in self.elements()]
        return add, mul


@dataclass(frozen=True)
class F2:
    bit: int

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise DomainError(f"F2 has only the elements 0 and 1, got {self.bit}")

    def __add__(self, other: "F2") -> "F2":
        # 1 + 1 := 0
        return F2(self.bit ^ other.bit)

    def __mul__(self, other: "F2") -> "F2":
        return F2(self.bit & other.bit)

    def __neg__(self) -> "F2":
        return self

    def inverse(self) -> "F2":
        if self.bit == 0:
            raise DivisionByZeroError("0 has no inverse in F2")
        return self


def f2_tables() -> tuple[list[list[int]], list[list[int]]]:
    elements = [F2(0), F2(1)]
    add = [[(a + b).bit for b in elements] for a in elements]
    mul = [[(a * b).bit for b in elements] for a in elements]
    return add, mul


# Combinatorics


def factorial(n: int) -> int:
    if n < 0:
        raise DomainError(f"Factorial of negative {n}")
    return math.prod(range(1, n + 1))


def pascal_row(n: int) -> tuple[int, ...]:
    """Row n of Pascal's triangle, each entry the sum of the two above it."""
    if n < 0:
        raise DomainError(f"Pascal row index must be nonnegative, got {n}")
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return tuple(row)


def binomial(n: int, k: int) -> int:
    """n choose k through the Pascal recurrence; 0 when k < 0 or k > n."""
    if n < 0:
        raise DomainError(f"Binomial coefficient needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    # Only the first k + 1 columns of each row are needed
    column = [1] + [0] * k
    for _ in range(n):
        for j in range(k, 0, -1):
            column[j] += column[j - 1]
    return column[k]


def count_subsets(n: int, k: int) -> int:
    """Counts the k-element subsets of {1, ..., n} one by one."""
    return sum(1 for _ in itertools.combinations(range(1, n + 1), k)) if k >= 0 else 0


def binomial_expand(x: Rational, y: Rational, n: int) -> Rational:
    return sum(
        (binomial(n, k) * Fraction(x) ** (n - k) * Fraction(y) ** k for k in range(n + 1)),
        Fraction(0),
    )


def bernoulli_holds(x: Rational, n: int) -> bool:
    if x < -1 or n < 0:
        raise DomainError(f"Bernoulli's inequality needs x >= -1 and n >= 0, got x={x}, n={n}")
    return (1 + Fraction(x)) ** n >= 1 + n * Fraction(x)


class SumKind(Enum):
    GAUSS = "gauss"
    SQUARES = "squares"
    CUBES = "cubes"
    ODDS = "odds"
    GEOMETRIC = "geometric"
    TELESCOPING = "telescoping"
    CHRISTMAS = "christmas"


def _check_sum_args(kind: SumKind, n: int, x: Optional[Rational]) -> None:
    if n < 0:
        raise DomainError(f"Number of summands must be nonnegative, got {n}")
    if kind is SumKind.GEOMETRIC:
        if x is None:
            raise DomainError("Geometric sum needs a ratio x")
        if x == 1:
            raise DomainError("Geometric closed form needs x != 1")


def closed_form_sum(kind: SumKind, n: int, x: Optional[Rational] = None) -> Rational:
    """
    Closed forms of the classical finite sums.

      GAUSS        1 + 2 + ... + n
      SQUARES      1^2 + ... + n^2
      CUBES        1^3 + ... + n^3
      ODDS         1 + 3 + ... + (2n - 1)
      GEOMETRIC    1 + x + ... + x^n
      TELESCOPING  1/(1*2) + ... + 1/(n(n+1))
      CHRISTMAS    1 + (1+2) + ... + (1+...+n)
    """
    _check_sum_args(kind, n, x)
    match kind:
        case SumKind.GAUSS:
            return Fraction(n * (n + 1), 2)
        case SumKind.SQUARES:
            return Fraction(n * (n + 1) * (2 * n + 1), 6)
        case SumKind.CUBES:
            return Fraction(n * (n + 1), 2) ** 2
        case SumKind.ODDS:
            return Fraction(n * n)
        case SumKind.GEOMETRIC:
            x = Fraction(x)
            return (1 - x ** (n + 1)) / (1 - x)
        case SumKind.TELESCOPING:
            return Fraction(n, n + 1)
        case SumKind.CHRISTMAS:
            return Fraction(n * (n + 1) * (n + 2), 6)


def brute_force_sum(kind: SumKind, n: int, x: Optional[Rational] = None) -> Rational:
    """The same sums as `closed_form_sum`, added term by term."""
    _check_sum_args(kind, n, x)
    match kind:
        case SumKind.GAUSS:
            terms = (Fraction(k) for k in range(1, n + 1))
        case SumKind.SQUARES:
            terms = (Fraction(k * k) for k in range(1, n + 1))
        case SumKind.CUBES:
            terms = (Fraction(k**3) for k in range(1, n + 1))
        case SumKind.ODDS:
            terms = (Fraction(2 * k - 1) for k in range(1, n + 1))
        case SumKind.GEOMETRIC:
            terms = (Fraction(x) ** k for k in range(n + 1))
        case SumKind.TELESCOPING:
            terms = (Fraction(1, k * (k + 1)) for k in range(1, n + 1))
        case SumKind.CHRISTMAS:
            terms = (Fraction(sum(range(1, k + 1))) for k in range(1, n + 1))
    total = Fraction(0)
    for term in terms:
        total += term
    return total


def divisibility_witness(p: int, q: int, d: int, n: int) -> int:
    """Returns k with p^n - q^n = d*k, given that d divides p - q."""
    if n < 0:
        raise DomainError(f"Exponent must be nonnegative, got {n}")
    if d == 0 or (p - q) % d != 0:
        raise DomainError(f"{d} does not divide {p} - {q}")
    k, remainder = divmod(p**n - q**n, d)
    assert remainder == 0, f"{d} does not divide {p}^{n} - {q}^{n}"
    return k


# Countability


def nat_to_int(n: int) -> int:
    """The bijection N -> Z: 0, 1, 2, 3, 4, ... -> 0, -1, 1, -2, 2, ..."""
    if n < 0:
        raise DomainError(f"{n} is not a natural number")
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def int_to_nat(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def diagonal_pair(n: int) -> tuple[int, int]:
    """
    The n-th pair of the zig-zag walk through N x N:
    (0,0), (0,1), (1,0), (2,0), (1,1), (0,2), (0,3), (1,2), ...

    Odd diagonals are walked with the first index increasing, even diagonals
    with the first index decreasing.
    """
    if n < 0:
        raise DomainError(f"{n} is not a natural number")
    d = (math.isqrt(8 * n + 1) - 1) // 2
    t = n - d * (d + 1) // 2
    return (t, d - t) if d % 2 == 1 else (d - t, t)


def pair_index(i: int, j: int) -> int:
    if i < 0 or j < 0:
        raise DomainError(f"({i}, {j}) is not a pair of natural numbers")
    d = i + j
    t = i if d % 2 == 1 else j
    return d * (d + 1) // 2 + t


def enumerate_rationals(count: int) -> list[Rational]:
    """
    The first `count` distinct rationals in diagonal order.

    Row i of the grid lists (1/(i+1))Z as nat_to_int(j)/(i+1), j = 0, 1, ...;
    the rows are walked with `diagonal_pair` and repeats are skipped.
    """
    if count < 0:
        raise DomainError(f"Count must be nonnegative, got {count}")
    seen: set[Rational] = set()
    result: list[Rational] = []
    for n in itertools.count():
        if len(result) >= count:
            break
        i, j = diagonal_pair(n)
        q = Fraction(nat_to_int(j), i + 1)
        if q not in seen:
            seen.add(q)
            result.append(q)
    return result

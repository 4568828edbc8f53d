from fractions import Fraction
from random import randint

import pytest

from exact_analysis.common import BaseRangeError, DigitRangeError, DomainError, ParseError
from exact_analysis.radix import (
    RadixExpansion,
    Sign,
    expand_rational,
    format_expansion,
    fractional_digits,
    parse_expansion,
    period_bound,
    to_rational,
    truncate,
)


def check_to_fraction(text: str, expected: Fraction):
    """Parses a radix expansion and compares its value with the expected fraction."""
    assert to_rational(parse_expansion(text)) == expected


def check_expansion(x: Fraction, base: int, expected: str):
    """Expands `x` and compares the canonical text, then reads the text back."""
    expansion = expand_rational(x, base)
    assert format_expansion(expansion) == expected
    assert parse_expansion(expected) == expansion
    assert to_rational(expansion) == x


def test_repeating_decimal():
    check_to_fraction("0.13(42)_10", Fraction(443, 3300))


def test_repeating_with_integer_part():
    check_to_fraction("1.234(5)_10", Fraction(11111, 9000))


def test_trailing_nines():
    check_to_fraction("0.4(9)_10", Fraction(1, 2))


def test_octal_integer_part():
    check_to_fraction("111.(1)_8", Fraction(512, 7))


def test_hexadecimal_period():
    check_to_fraction("0.(ABBA)_16", Fraction(862, 1285))
    check_to_fraction("0.(abba)_16", Fraction(862, 1285))


def test_negative_and_leading_zeros():
    check_to_fraction("-0.5_10", Fraction(-1, 2))
    check_to_fraction("007_10", Fraction(7))


def test_third_in_several_bases():
    check_expansion(Fraction(1, 3), 2, "0.(01)_2")
    check_expansion(Fraction(1, 3), 7, "0.(2)_7")
    check_expansion(Fraction(1, 3), 8, "0.(25)_8")


def test_two_thirds_hexadecimal():
    check_expansion(Fraction(2, 3), 16, "0.(A)_16")


def test_terminating_expansions():
    check_expansion(Fraction(3, 4), 10, "0.75_10")
    check_expansion(Fraction(5), 10, "5_10")
    check_expansion(Fraction(0), 2, "0_2")
    check_expansion(Fraction(-1, 6), 10, "-0.1(6)_10")
    check_expansion(Fraction(255, 16), 16, "F.F_16")
    assert expand_rational(Fraction(1, 2), 10).terminating


def check_canonical(e: RadixExpansion):
    """
    The period is never all (base - 1) and has no shorter repeating block; the
    pre-period cannot be shortened by rotating the period into it.
    """
    assert any(d != e.base - 1 for d in e.period)
    n = len(e.period)
    for length in range(1, n):
        if n % length == 0:
            assert e.period != e.period[:length] * (n // length), f"block of {length}"
    if e.pre_period:
        assert e.pre_period[-1] != e.period[-1]


def random_denominator(base: int) -> int:
    """A denominator below 10^6 whose part coprime to `base` stays below 2000."""
    denominator = randint(1, 1999)
    while denominator * base < 10**6 and randint(0, 1):
        denominator *= base
    return denominator


def test_canonical_expansions():
    cases = ((Fraction(1, 2), 10), (Fraction(1), 2), (Fraction(1, 7), 10), (Fraction(7, 12), 6))
    for x, base in cases:
        check_canonical(expand_rational(x, base))
    half = parse_expansion("0.5_10")
    assert expand_rational(Fraction(1, 2), 10) == half
    assert expand_rational(to_rational(parse_expansion("0.4(9)_10")), 10) == half
    assert expand_rational(Fraction(1, 3), 10).period == (3,)


def test_random_round_trip():
    for _ in range(500):
        base = randint(2, 16)
        x = Fraction(randint(-(10**6) + 1, 10**6 - 1), random_denominator(base))
        expansion = expand_rational(x, base)
        check_canonical(expansion)
        assert to_rational(expansion) == x
        assert parse_expansion(format_expansion(expansion)) == expansion
        assert len(expansion.period) <= period_bound(x, base)


def test_truncations_bracket_value():
    x = Fraction(443, 3300)
    expansion = expand_rational(x, 10)
    for n in range(21):
        lower = truncate(expansion, n)
        assert lower <= x < lower + Fraction(1, 10**n)
    digits = fractional_digits(expansion)
    assert [next(digits) for _ in range(8)] == [1, 3, 4, 2, 4, 2, 4, 2]


def test_period_bound():
    assert period_bound(Fraction(1, 3), 10) == 3
    assert period_bound(Fraction(1, 12), 10) == 3
    assert period_bound(Fraction(1, 40), 10) == 1
    assert period_bound(Fraction(5, 7), 2) == 7


def test_base_range():
    with pytest.raises(BaseRangeError):
        expand_rational(Fraction(1, 3), 17)
    with pytest.raises(BaseRangeError):
        expand_rational(Fraction(1, 3), 1)
    with pytest.raises(BaseRangeError):
        parse_expansion("0.1_17")


def test_digit_range():
    with pytest.raises(DigitRangeError) as error:
        parse_expansion("0.19_8")
    assert error.value.offset == 3
    assert isinstance(error.value, ParseError)


def test_syntax_errors():
    for text in ("0.1G_16", "0.(12_10", "1._10", "_10", "0.1", "0.1_x", "0.()_10"):
        with pytest.raises(ParseError):
            parse_expansion(text)


def test_expansion_validation():
    with pytest.raises(DomainError):
        RadixExpansion(Sign.PLUS, 10, (1,), (), ())
    with pytest.raises(DomainError):
        RadixExpansion(Sign.PLUS, 2, (2,), (), (0,))
    with pytest.raises(DomainError):
        RadixExpansion(Sign.PLUS, 10, (0, 1), (), (0,))

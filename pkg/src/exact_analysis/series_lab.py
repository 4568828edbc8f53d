# SPDX-License-Identifier: Apache-2.0

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from tokenize import TokenError
from typing import Callable, Iterator, Optional, Sequence, Union

from sympy import Poly, Rational as SymRational, Symbol, SympifyError, cancel
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)
from sympy.polys.polyerrors import CoercionFailed, PolynomialError

from .common import (
    AmbiguousRoundingError,
    CertifiedEnclosure,
    DomainError,
    IndexBelowStartError,
    ParseError,
    dyadic_scale,
    exact_sum,
    offset_in_bytes,
    render_decimal,
    round_down,
    round_up,
)
from .exact_number import Rational, finite_sup_inf, format_rational, parse_rational
from .roots import sqrt_enclosure

log = logging.getLogger(__name__)

INDEX = Symbol("n")

_POLY_TRANSFORMATIONS = standard_transformations + (
    implicit_multiplication_application,
    convert_xor,
)
_POLY_CHARS = re.compile(r"[0-9n+\-*^()\s]*")

# Extra rounds of tightening before `binet_round` and `euler_e` give up
BINET_RETRIES: int = 8
EULER_RETRIES: int = 20


class LimitKind(Enum):
    FINITE = "finite"
    ZERO = "zero"
    INFINITE = "infinite"


class Conclusion(Enum):
    CONVERGES_ABSOLUTELY = "ConvergesAbsolutely"
    CONVERGES_CONDITIONALLY = "ConvergesConditionally"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


class FiredTest(Enum):
    DIVERGENCE = "Divergence"
    RATIO = "Ratio"
    ROOT = "Root"
    PSERIES_COMPARISON = "PSeriesComparison"
    HARMONIC_COMPARISON = "HarmonicComparison"
    LEIBNIZ = "Leibniz"
    NONE = "None"


class TrigKind(Enum):
    SIN = "sin"
    COS = "cos"


def _poly_from_text(text: str, offset: int = 0, source: Optional[str] = None) -> Poly:
    source = text if source is None else source
    allowed = _POLY_CHARS.match(text)
    if allowed.end() != len(text):
        raise ParseError(
            f"Unexpected character {text[allowed.end()]!r} in polynomial",
            offset_in_bytes(source, offset + allowed.end()),
            {"n", "0-9", "+", "-", "*", "^", "(", ")"},
        )
    try:
        expr = parse_expr(text, local_dict={"n": INDEX}, transformations=_POLY_TRANSFORMATIONS)
        return Poly(expr, INDEX, domain="ZZ")
    except (SyntaxError, TokenError, SympifyError, TypeError) as e:
        raise ParseError(f"Malformed polynomial {text!r}", offset_in_bytes(source, offset)) from e
    except (PolynomialError, CoercionFailed) as e:
        raise ParseError(
            f"{text!r} is not a polynomial in n with integer coefficients",
            offset_in_bytes(source, offset),
        ) from e


def _to_poly(value) -> Poly:
    if isinstance(value, str):
        return _poly_from_text(value)
    try:
        expr = value.as_expr() if isinstance(value, Poly) else value
        return Poly(expr, INDEX, domain="ZZ")
    except (PolynomialError, CoercionFailed) as e:
        raise DomainError(f"{value} is not a polynomial in n with integer coefficients") from e


def _horner(coefficients: tuple[int, ...], n: int) -> int:
    value = 0
    for c in coefficients:
        value = value * n + c
    return value


def _sign(value: int) -> int:
    return (value > 0) - (value < 0)


def _past_real_roots(*polys: Poly) -> int:
    """Smallest nonnegative integer beyond every real root of the given polynomials."""
    bound = 0
    for poly in polys:
        if poly.is_zero or poly.degree() < 1:
            continue
        for (_, upper), _ in poly.intervals():
            bound = max(bound, math.floor(Fraction(int(upper.p), int(upper.q))) + 1)
    return bound


@dataclass(frozen=True)
class TermExpr:
    """
    The general term a_n = (-1)^(eps n) * c * r^n * P(n) / Q(n) * (n!)^m for n >= start.

    `numerator` and `denominator` accept sympy polynomials, integers or strings
    such as "n^2 - 3n + 1". The denominator may not vanish at any index the
    series uses.
    """

    alternating: bool = False
    coefficient: Rational = Fraction(1)
    base: Rational = Fraction(1)
    numerator: Poly = field(default_factory=lambda: Poly(1, INDEX, domain="ZZ"))
    denominator: Poly = field(default_factory=lambda: Poly(1, INDEX, domain="ZZ"))
    factorial_power: int = 0
    start: int = 0
    _num_coeffs: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _den_coeffs: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        object.__setattr__(self, "base", Fraction(self.base))
        object.__setattr__(self, "numerator", _to_poly(self.numerator))
        object.__setattr__(self, "denominator", _to_poly(self.denominator))

        if self.coefficient == 0:
            raise DomainError("The coefficient c must be nonzero")
        if self.base == 0:
            raise DomainError("The ratio base r must be nonzero")
        if self.numerator.is_zero:
            raise DomainError("The numerator polynomial must be nonzero")
        if self.denominator.is_zero:
            raise DomainError("The denominator polynomial must be nonzero")
        if self.factorial_power not in (-1, 0, 1):
            raise DomainError(f"The factorial power must be -1, 0 or 1, got {self.factorial_power}")
        if self.start < 0:
            raise DomainError(f"The start index must be nonnegative, got {self.start}")
        for root in self.denominator.ground_roots():
            if root.is_integer and int(root) >= self.start:
                raise DomainError(f"The denominator vanishes at n = {root}")

        object.__setattr__(
            self, "_num_coeffs", tuple(int(c) for c in self.numerator.all_coeffs())
        )
        object.__setattr__(
            self, "_den_coeffs", tuple(int(c) for c in self.denominator.all_coeffs())
        )

    @property
    def alternates(self) -> bool:
        """True when the sign of the terms eventually alternates."""
        return self.alternating != (self.base < 0)

    def rational_part(self, n: int) -> Fraction:
        return Fraction(_horner(self._num_coeffs, n), _horner(self._den_coeffs, n))


def term_eval(t: TermExpr, n: int) -> Rational:
    if n < t.start:
        raise IndexBelowStartError(f"Index {n} lies below the start index {t.start}")
    value = t.coefficient * t.base**n * t.rational_part(n)
    if t.factorial_power:
        value *= Fraction(math.factorial(n)) ** t.factorial_power
    return -value if t.alternating and n % 2 else value


def iter_terms(t: TermExpr, stop: int) -> Iterator[Rational]:
    """Yields a_start, ..., a_stop, updating r^n and n! incrementally."""
    power = t.base**t.start
    fact = math.factorial(t.start)
    for k in range(t.start, stop + 1):
        if k > t.start:
            power *= t.base
            fact *= k
        value = t.coefficient * power * t.rational_part(k)
        if t.factorial_power == 1:
            value *= fact
        elif t.factorial_power == -1:
            value /= fact
        yield -value if t.alternating and k % 2 else value


def partial_sum(t: TermExpr, n: int) -> Rational:
    """s_n = a_start + ... + a_n."""
    if n < t.start:
        raise IndexBelowStartError(f"Index {n} lies below the start index {t.start}")
    return exact_sum(iter_terms(t, n))


def partial_sums(t: TermExpr, n: int) -> list[Rational]:
    """[s_start, ..., s_n]"""
    if n < t.start:
        raise IndexBelowStartError(f"Index {n} lies below the start index {t.start}")
    sums = []
    total = Fraction(0)
    for value in iter_terms(t, n):
        total += value
        sums.append(total)
    return sums


@dataclass(frozen=True)
class RatioLimit:
    """
    Limit of |a_{n+1} / a_n|. `ratio` is the symbolic rational function
    |r| (n+1)^m P(n+1) Q(n) / (P(n) Q(n+1)), equal to |a_{n+1} / a_n| for large n.
    """

    kind: LimitKind
    q: Optional[Rational]
    ratio: object

    def __str__(self) -> str:
        if self.kind is LimitKind.INFINITE:
            return "infinity"
        return format_rational(self.q)


def exact_ratio(t: TermExpr) -> RatioLimit:
    u = abs(t.base)
    p, q = t.numerator, t.denominator
    ratio = cancel(
        SymRational(u.numerator, u.denominator)
        * (INDEX + 1) ** t.factorial_power
        * p.shift(1).as_expr()
        * q.as_expr()
        / (p.as_expr() * q.shift(1).as_expr())
    )
    match t.factorial_power:
        case 0:
            return RatioLimit(LimitKind.FINITE, u, ratio)
        case -1:
            return RatioLimit(LimitKind.ZERO, Fraction(0), ratio)
        case _:
            return RatioLimit(LimitKind.INFINITE, None, ratio)


def _ratio_holds(t: TermExpr, k: int, beta: Fraction) -> bool:
    return abs(term_eval(t, k + 1)) <= beta * abs(term_eval(t, k))


def ratio_onset(t: TermExpr, beta: Rational) -> Optional[int]:
    """
    Smallest N >= start with |a_{k+1}| <= beta |a_k| for every k >= N, or None.

    For k past the real roots of P and Q the condition is the sign of a single
    integer polynomial D(k); past the real roots of D that sign is the sign of
    its leading coefficient. Below that threshold the condition is checked
    exactly, walking down towards the start index.
    """
    beta = Fraction(beta)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    u = abs(t.base)
    p, q = t.numerator, t.denominator
    one = Poly(1, INDEX, domain="ZZ")
    step = Poly(INDEX + 1, INDEX, domain="ZZ")
    grows = step if t.factorial_power == 1 else one
    shrinks = step if t.factorial_power == -1 else one

    smaller = shrinks * p * q.shift(1) * (beta.numerator * u.denominator)
    larger = grows * p.shift(1) * q * (u.numerator * beta.denominator)
    difference = smaller - larger
    sign = _sign(int(p.LC())) * _sign(int(q.LC()))

    if not difference.is_zero and sign * _sign(int(difference.LC())) < 0:
        log.debug(f"ratio onset for beta={beta}: ratio eventually exceeds beta")
        return None

    onset = max(t.start, _past_real_roots(p, q, difference))
    while onset > t.start and _ratio_holds(t, onset - 1, beta):
        onset -= 1
    log.debug(f"ratio onset for beta={beta}: N={onset}")
    return onset


def _sign_onset(t: TermExpr) -> int:
    """From this index on P(n) and Q(n) keep their eventual signs."""
    return max(t.start, _past_real_roots(t.numerator, t.denominator))


def leibniz_onset(t: TermExpr) -> Optional[int]:
    """Index from which the terms alternate in sign and decrease in absolute value."""
    if not t.alternates:
        return None
    decreasing = ratio_onset(t, 1)
    if decreasing is None:
        return None
    return max(decreasing, _sign_onset(t))


Evidence = dict[str, Union[str, int]]


@dataclass(frozen=True)
class TestVerdict:
    conclusion: Conclusion
    fired_test: FiredTest
    evidence: Evidence = field(default_factory=dict)

    # Not a pytest test class
    __test__ = False

    def to_json(self) -> dict:
        return {
            "conclusion": self.conclusion.value,
            "fired_test": self.fired_test.value,
            "evidence": dict(self.evidence),
        }


def _divergence_test(t: TermExpr) -> Optional[TestVerdict]:
    """Decides whether a_n does not tend to 0."""
    u = abs(t.base)
    if t.factorial_power == 1 or (t.factorial_power == 0 and u > 1):
        return TestVerdict(Conclusion.DIVERGES, FiredTest.DIVERGENCE, {"term_limit": "infinite"})
    if t.factorial_power == -1 or u < 1:
        return None

    deg_p, deg_q = t.numerator.degree(), t.denominator.degree()
    if deg_p > deg_q:
        limit = "infinite"
    elif deg_p == deg_q:
        limit = format_rational(
            abs(t.coefficient * Fraction(int(t.numerator.LC()), int(t.denominator.LC())))
        )
    else:
        return None
    return TestVerdict(Conclusion.DIVERGES, FiredTest.DIVERGENCE, {"term_limit": limit})


def classify_series(t: TermExpr) -> TestVerdict:
    """
    Runs, in order: the divergence test, the ratio test, and for |r| = 1 a
    comparison of |a_n| with 1/n^k, k = deg Q - deg P. Alternating terms
    whose absolute series diverges fall back to the Leibniz test.
    """
    verdict = _divergence_test(t)
    if verdict is not None:
        log.debug(f"classify: divergence test fired, {verdict.evidence}")
        return verdict

    limit = exact_ratio(t)
    if limit.q < 1:
        log.debug(f"classify: ratio test fired, q={limit.q}")
        return TestVerdict(
            Conclusion.CONVERGES_ABSOLUTELY, FiredTest.RATIO, {"q": format_rational(limit.q)}
        )

    # Only |r| = 1, m = 0 and deg Q > deg P remain
    gap = t.denominator.degree() - t.numerator.degree()
    partner = "1/n" if gap == 1 else f"1/n^{gap}"
    if gap >= 2:
        return TestVerdict(
            Conclusion.CONVERGES_ABSOLUTELY,
            FiredTest.PSERIES_COMPARISON,
            {"q": "1", "partner": partner},
        )
    if not t.alternates:
        return TestVerdict(
            Conclusion.DIVERGES, FiredTest.HARMONIC_COMPARISON, {"q": "1", "partner": partner}
        )

    onset = leibniz_onset(t)
    if onset is None:
        return TestVerdict(Conclusion.INCONCLUSIVE, FiredTest.NONE, {"q": "1"})
    log.debug(f"classify: Leibniz test fired, terms decrease from n={onset}")
    return TestVerdict(
        Conclusion.CONVERGES_CONDITIONALLY,
        FiredTest.LEIBNIZ,
        {"q": "1", "onset": onset, "absolute": Conclusion.DIVERGES.value, "partner": partner},
    )


def root_test(t: TermExpr) -> TestVerdict:
    """
    The root test, decided only for terms c * r^n (P, Q constant, m = 0),
    where the n-th root of |a_n| tends to |r| exactly.
    """
    if t.factorial_power != 0 or t.numerator.degree() > 0 or t.denominator.degree() > 0:
        return TestVerdict(
            Conclusion.INCONCLUSIVE, FiredTest.NONE, {"reason": "n-th root limit not exact"}
        )
    u = abs(t.base)
    evidence = {"root_limit": format_rational(u)}
    if u < 1:
        return TestVerdict(Conclusion.CONVERGES_ABSOLUTELY, FiredTest.ROOT, evidence)
    if u > 1:
        return TestVerdict(Conclusion.DIVERGES, FiredTest.ROOT, evidence)
    return TestVerdict(Conclusion.INCONCLUSIVE, FiredTest.ROOT, evidence)


def ratio_tail_bound(t: TermExpr, n: int) -> tuple[Rational, Rational]:
    """
    (beta, bound) with beta = (1 + q) / 2 and |s_{n+k} - s_n| <= bound for all k.

    Needs q < 1 and n + 1 past the index from which |a_{j+1}| <= beta |a_j|;
    then |a_{n+k}| <= beta^(k-1) |a_{n+1}| and the geometric series gives
    bound = |a_{n+1}| / (1 - beta).
    """
    limit = exact_ratio(t)
    if limit.kind is LimitKind.INFINITE or limit.q >= 1:
        raise DomainError(f"Ratio limit {limit} is not below 1")
    beta = (1 + limit.q) / 2
    onset = ratio_onset(t, beta)
    if onset is None or n + 1 < onset:
        raise DomainError(f"Index {n} lies before the ratio bound takes hold (onset {onset})")
    return beta, abs(term_eval(t, n + 1)) / (1 - beta)


def alternating_enclosure(t: TermExpr, n: int) -> CertifiedEnclosure:
    """
    [min(s_2n, s_2n+1), max(s_2n, s_2n+1)] with s_j = a_start + ... + a_{start+j}.

    The width is |a_{start+2n+1}|.
    """
    verdict = classify_series(t)
    if verdict.fired_test is not FiredTest.LEIBNIZ:
        raise DomainError(f"The Leibniz test does not apply, {verdict.fired_test.value} fired")
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if t.start + 2 * n + 1 < verdict.evidence["onset"]:
        raise DomainError(
            f"Terms only decrease from n={verdict.evidence['onset']}, "
            f"need start + 2n + 1 past it"
        )
    sums = partial_sums(t, t.start + 2 * n + 1)
    even, odd = sums[2 * n], sums[2 * n + 1]
    return CertifiedEnclosure(min(even, odd), max(even, odd))


@dataclass(frozen=True)
class CertifiedValue:
    """`value` within `error_bound` of the represented quantity, from `terms_used` terms."""

    value: Rational
    error_bound: Rational
    terms_used: int

    def __post_init__(self) -> None:
        if self.error_bound < 0:
            raise DomainError(f"Negative error bound {self.error_bound}")

    def enclosure(self) -> CertifiedEnclosure:
        return CertifiedEnclosure.around(self.value, self.error_bound)


def exp_partial_sum(x: Rational, n: int) -> Rational:
    """1 + x + x^2/2! + ... + x^n/n!"""
    x = Fraction(x)
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")

    def terms() -> Iterator[Fraction]:
        term = Fraction(1)
        yield term
        for k in range(1, n + 1):
            term = term * x / k
            yield term

    return exact_sum(terms())


def exp_remainder_bound(x: Rational, n: int) -> Rational:
    """2|x|^(n+1)/(n+1)!, a bound on |exp(x) - S_n| valid for n >= 2|x| - 2."""
    x = Fraction(x)
    if n < 2 * abs(x) - 2:
        raise DomainError(f"The remainder bound needs n >= 2|x| - 2, got n={n} for x={x}")
    return 2 * abs(x) ** (n + 1) / math.factorial(n + 1)


def exp_eval(x: Rational, eps: Rational) -> CertifiedValue:
    x, eps = Fraction(x), Fraction(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    n = max(0, math.ceil(2 * abs(x) - 2))
    while exp_remainder_bound(x, n) > eps:
        n += 1
    log.debug(f"exp({x}): {n + 1} terms for eps={eps}")
    return CertifiedValue(exp_partial_sum(x, n), exp_remainder_bound(x, n), n)


def _fraction_digit_count(text: str) -> int:
    return len(text.partition(".")[2])


def euler_e(digits: int) -> str:
    """The first `digits` decimals of e, all of them guaranteed by the remainder bound."""
    if digits < 0:
        raise DomainError(f"Number of digits must be nonnegative, got {digits}")
    eps = Fraction(1, 10 ** (digits + 1))
    text = ""
    for _ in range(EULER_RETRIES):
        text = render_decimal(exp_eval(1, eps).enclosure(), digits)
        if _fraction_digit_count(text) == digits:
            return text
        eps /= 10
    return text


def trig_eval(kind: TrigKind, x: Rational, eps: Rational) -> CertifiedValue:
    """
    sin(x) or cos(x) for |x| <= 2 as an alternating series.

    Past the first j with (2j + d + 1)(2j + d + 2) >= x^2 (d = 1 for sin,
    d = 0 for cos) the terms decrease, so the first omitted term bounds the error.
    """
    x, eps = Fraction(x), Fraction(eps)
    if abs(x) > 2:
        raise DomainError(f"|x| must not exceed 2, got {x}")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    shift = 1 if kind is TrigKind.SIN else 0
    square = x * x

    onset = 0
    while (2 * onset + shift + 1) * (2 * onset + shift + 2) < square:
        onset += 1

    terms = [x if shift else Fraction(1)]
    j = 0
    while True:
        following = -terms[-1] * square / ((2 * j + shift + 1) * (2 * j + shift + 2))
        if j >= onset and abs(following) <= eps:
            break
        terms.append(following)
        j += 1
    return CertifiedValue(exact_sum(terms), abs(following), len(terms))


Coefficients = Union[TermExpr, Sequence[Rational], Callable[[int], Rational]]


def _coefficient(seq: Coefficients, k: int) -> Fraction:
    if isinstance(seq, TermExpr):
        return term_eval(seq, k)
    if callable(seq):
        return Fraction(seq(k))
    # Finite support, zero beyond the listed values
    return Fraction(seq[k]) if k < len(seq) else Fraction(0)


def cauchy_product_term(a: Coefficients, b: Coefficients, n: int) -> Rational:
    """c_n = a_n b_0 + a_{n-1} b_1 + ... + a_0 b_n"""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return exact_sum(_coefficient(a, n - k) * _coefficient(b, k) for k in range(n + 1))


def inverse_sqrt_cauchy_bound(n: int) -> Rational:
    """
    A lower bound for |c_n| in the Cauchy square of sum (-1)^n / sqrt(n + 1).

    |c_n| = sum_k 1 / sqrt((n - k + 1)(k + 1)) and each product is at most
    (n + 1)^2, so every summand is at least 1 / ceil(sqrt(product)) >= 1 / (n + 1).
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    bounds = []
    for k in range(n + 1):
        product = (n - k + 1) * (k + 1)
        if product > (n + 1) ** 2:
            raise DomainError(f"Product bound fails at n={n}, k={k}")
        root = math.isqrt(product)
        if root * root < product:
            root += 1
        bounds.append(Fraction(1, root))
    return exact_sum(bounds)


@dataclass(frozen=True)
class EventuallyPeriodicSeq:
    """x_0, x_1, ... given by the values in `head` followed by `cycle` repeated forever."""

    head: tuple[Rational, ...]
    cycle: tuple[Rational, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", tuple(Fraction(v) for v in self.head))
        object.__setattr__(self, "cycle", tuple(Fraction(v) for v in self.cycle))
        if not self.cycle:
            raise DomainError("The cycle of an eventually periodic sequence must be nonempty")

    def __getitem__(self, index: int) -> Rational:
        if index < 0:
            raise IndexBelowStartError(f"Index {index} lies below 0")
        if index < len(self.head):
            return self.head[index]
        return self.cycle[(index - len(self.head)) % len(self.cycle)]

    def take(self, count: int) -> list[Rational]:
        return [self[i] for i in range(count)]


def cesaro_mean(seq: Union[EventuallyPeriodicSeq, TermExpr], n: int) -> Rational:
    """Mean of the first `n` terms of the sequence."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if isinstance(seq, TermExpr):
        values = list(iter_terms(seq, seq.start + n - 1))
    else:
        values = seq.take(n)
    return exact_sum(values) / n


def limsup_liminf(seq: EventuallyPeriodicSeq) -> tuple[Rational, Rational]:
    """(liminf, limsup)"""
    return min(seq.cycle), max(seq.cycle)


def suffix_sup_inf(seq: EventuallyPeriodicSeq, n: int) -> tuple[Rational, Rational]:
    """(inf, sup) of the suffix set {x_n, x_{n+1}, ...}."""
    if n < 0:
        raise IndexBelowStartError(f"Index {n} lies below 0")
    return finite_sup_inf(seq.head[n:] + seq.cycle)


def fib(n: int) -> int:
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def golden_ratio_enclosure(sqrt5: Optional[CertifiedEnclosure] = None) -> CertifiedEnclosure:
    """(1 + sqrt(5)) / 2 from an enclosure of sqrt(5)."""
    if sqrt5 is None:
        sqrt5 = sqrt_enclosure(5, Fraction(1, 10**12))
    return sqrt5.shift(1).scale(Fraction(1, 2))


def fib_ratio(n: int) -> Rational:
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return Fraction(fib(n + 1), fib(n))


def binet_round(n: int, sqrt5: Optional[CertifiedEnclosure] = None) -> int:
    """
    The integer nearest to phi^n / sqrt(5), evaluated over an enclosure of sqrt(5).

    When the enclosure leaves the rounding undecided it is tightened and the
    evaluation retried.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    tol = Fraction(1, 2 ** (n + 8))
    if sqrt5 is None:
        sqrt5 = sqrt_enclosure(5, tol)
    elif sqrt5.lo < 0 or not sqrt5.lo**2 <= 5 <= sqrt5.hi**2:
        raise DomainError(f"Enclosure {sqrt5} does not contain sqrt(5)")

    for attempt in range(BINET_RETRIES + 1):
        value = golden_ratio_enclosure(sqrt5) ** n / sqrt5
        lo, hi = math.floor(value.lo + Fraction(1, 2)), math.floor(value.hi + Fraction(1, 2))
        if lo == hi:
            return lo
        log.debug(f"binet n={n}: attempt {attempt} undecided between {lo} and {hi}")
        tol = min(tol, sqrt5.width) / 2**16
        sqrt5 = sqrt_enclosure(5, tol)

    raise AmbiguousRoundingError(f"Rounding phi^{n}/sqrt(5) stays ambiguous")


def _check_logistic(r: Fraction, x0: Fraction) -> None:
    if not 0 <= r <= 1:
        raise DomainError(f"r must lie in [0, 1], got {r}")
    if not 0 <= x0 <= 1:
        raise DomainError(f"x0 must lie in [0, 1], got {x0}")


def logistic_trace(r: Rational, x0: Rational, n: int) -> list[Rational]:
    """Exact iterates x_0, ..., x_n of x_{k+1} = r (1 - x_k) x_k."""
    r, x0 = Fraction(r), Fraction(x0)
    _check_logistic(r, x0)
    trace = [x0]
    for _ in range(n):
        x = trace[-1]
        trace.append(r * (1 - x) * x)
    return trace


def logistic_bound(r: Rational, x0: Rational, n: int) -> Rational:
    """x0 / (n x0 + r^-n), an upper bound for x_n when r > 0 and x0 > 0."""
    r, x0 = Fraction(r), Fraction(x0)
    if r <= 0 or x0 <= 0:
        raise DomainError("The logistic bound needs r > 0 and x0 > 0")
    return x0 / (n * x0 + r**-n)


def logistic_enclosures(
    r: Rational, x0: Rational, n: int, bits: int = 64
) -> list[CertifiedEnclosure]:
    """
    Enclosures of x_0, ..., x_n with endpoints rounded outward to about `bits`
    significant bits.

    x_1 lies in [0, 1/4] whatever x_0 is, and f(x) = r (1 - x) x is increasing
    on [0, 1/2], so from x_1 on the endpoints are mapped separately.
    """
    r, x0 = Fraction(r), Fraction(x0)
    _check_logistic(r, x0)
    result = [CertifiedEnclosure.point(x0)]
    if n == 0:
        return result
    current = CertifiedEnclosure.point(r * (1 - x0) * x0)
    result.append(current)
    for _ in range(2, n + 1):
        lo = r * (1 - current.lo) * current.lo
        hi = r * (1 - current.hi) * current.hi
        current = CertifiedEnclosure(
            round_down(lo, dyadic_scale(lo, bits)), round_up(hi, dyadic_scale(hi, bits))
        )
        result.append(current)
    return result


def harmonic_number(n: int) -> Rational:
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return exact_sum(Fraction(1, k) for k in range(1, n + 1))


def harmonic_identity_check(n: int) -> bool:
    """sum_{k=2}^{n} h_k / (k (k - 1)) == 2 - 1/(n + 1) - h_{n+1} / n"""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    h = Fraction(1)
    lhs = Fraction(0)
    for k in range(2, n + 1):
        h += Fraction(1, k)
        lhs += h / (k * (k - 1))
    h_next = h + Fraction(1, n + 1)
    return lhs == 2 - Fraction(1, n + 1) - h_next / n


def pseries_partial_sum(p: int, n: int) -> Rational:
    if p < 1 or n < 0:
        raise DomainError(f"Need p >= 1 and n >= 0, got p={p}, n={n}")
    return exact_sum(Fraction(1, k**p) for k in range(1, n + 1))


def pseries_bound(p: int) -> Rational:
    """1 / (1 - 2^(1-p)), an upper bound for every partial sum of 1/k^p."""
    if p < 2:
        raise DomainError(f"The p-series bound needs p >= 2, got {p}")
    return 1 / (1 - Fraction(1, 2 ** (p - 1)))


class _TermParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def _error(self, message: str, expected: set[str]) -> ParseError:
        return ParseError(message, offset_in_bytes(self.text, self.pos), expected)

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _accept(self, literal: str) -> bool:
        self._skip()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def _expect(self, literal: str) -> None:
        if not self._accept(literal):
            raise self._error(f"Expected {literal!r}", {literal})

    def _match(self, pattern: str, what: str) -> str:
        self._skip()
        found = re.compile(pattern).match(self.text, self.pos)
        if found is None:
            raise self._error(f"Expected {what}", {what})
        self.pos = found.end()
        return found.group()

    def _rational(self) -> Fraction:
        return parse_rational(self._match(r"-?\d+(?:/\d+)?", "rational"))

    def _group(self) -> Poly:
        self._expect("(")
        begin = self.pos
        depth = 1
        while depth:
            if self.pos >= len(self.text):
                raise self._error("Unbalanced parentheses", {")"})
            depth += {"(": 1, ")": -1}.get(self.text[self.pos], 0)
            self.pos += 1
        return _poly_from_text(self.text[begin : self.pos - 1], begin, self.text)

    def parse(self) -> TermExpr:
        self._skip()
        alternating = bool(re.compile(r"alt\b").match(self.text, self.pos))
        if alternating:
            self.pos += 3
        coefficient = self._rational()
        self._expect("*")
        if self._accept("("):
            base = self._rational()
            self._expect(")")
        else:
            base = self._rational()
        self._expect("^")
        self._expect("n")
        self._expect("*")
        numerator = self._group()
        self._expect("/")
        denominator = self._group()
        self._expect("*")
        self._expect("fact")
        self._expect("^")
        power = int(self._match(r"[+-]?\d+", "factorial power"))
        if power not in (-1, 0, 1):
            raise self._error(f"Factorial power {power} is not -1, 0 or 1", {"-1", "0", "1"})
        self._expect("from")
        start = int(self._match(r"\d+", "start index"))
        self._skip()
        if self.pos != len(self.text):
            raise self._error("Unexpected trailing input", {"end of input"})
        return TermExpr(alternating, coefficient, base, numerator, denominator, power, start)


def parse_term(text: str) -> TermExpr:
    """Parses `[alt] c * r^n * (P)/(Q) * fact^m from n0`."""
    return _TermParser(text).parse()


def _poly_text(poly: Poly) -> str:
    return str(poly.as_expr()).replace("**", "^")


def format_term(t: TermExpr) -> str:
    base = format_rational(t.base)
    if t.base < 0 or t.base.denominator != 1:
        base = f"({base})"
    return (
        f"{'alt ' if t.alternating else ''}{format_rational(t.coefficient)} * {base}^n"
        f" * ({_poly_text(t.numerator)})/({_poly_text(t.denominator)})"
        f" * fact^{t.factorial_power} from {t.start}"
    )

import json
from fractions import Fraction

import pytest
import sympy

from exact_analysis.common import DomainError, IndexBelowStartError, ParseError
from exact_analysis.series_lab import (
    INDEX,
    Conclusion,
    FiredTest,
    LimitKind,
    TermExpr,
    classify_series,
    exact_ratio,
    format_term,
    leibniz_onset,
    parse_term,
    partial_sums,
    ratio_onset,
    ratio_tail_bound,
    root_test,
    term_eval,
)


def check_verdict(t: TermExpr, conclusion: Conclusion, fired_test: FiredTest):
    """Classifies the series and compares the conclusion and the deciding test."""
    verdict = classify_series(t)
    assert verdict.conclusion is conclusion, format_term(t)
    assert verdict.fired_test is fired_test, format_term(t)
    return verdict


def test_harmonic_diverges():
    verdict = check_verdict(
        TermExpr(denominator="n", start=1), Conclusion.DIVERGES, FiredTest.HARMONIC_COMPARISON
    )
    assert verdict.evidence["partner"] == "1/n"


def test_inverse_squares_converge():
    verdict = check_verdict(
        TermExpr(denominator="n^2", start=1),
        Conclusion.CONVERGES_ABSOLUTELY,
        FiredTest.PSERIES_COMPARISON,
    )
    assert verdict.evidence["partner"] == "1/n^2"


def test_alternating_harmonic_converges_conditionally():
    verdict = check_verdict(
        TermExpr(alternating=True, coefficient=-1, denominator="n", start=1),
        Conclusion.CONVERGES_CONDITIONALLY,
        FiredTest.LEIBNIZ,
    )
    assert verdict.evidence["onset"] == 1
    assert verdict.evidence["absolute"] == "Diverges"


def test_negative_base_alternates():
    check_verdict(
        TermExpr(base=-1, denominator="n", start=1),
        Conclusion.CONVERGES_CONDITIONALLY,
        FiredTest.LEIBNIZ,
    )


def test_ratio_test_fires():
    verdict = check_verdict(
        TermExpr(base=Fraction(1, 3), numerator="n^2"),
        Conclusion.CONVERGES_ABSOLUTELY,
        FiredTest.RATIO,
    )
    assert verdict.evidence["q"] == "1/3"
    verdict = check_verdict(
        TermExpr(base=Fraction(1, 4), numerator="n^5"),
        Conclusion.CONVERGES_ABSOLUTELY,
        FiredTest.RATIO,
    )
    assert verdict.evidence["q"] == "1/4"
    verdict = check_verdict(
        TermExpr(base=-3, factorial_power=-1),
        Conclusion.CONVERGES_ABSOLUTELY,
        FiredTest.RATIO,
    )
    assert verdict.evidence["q"] == "0"


def test_divergence_test_fires():
    check_verdict(TermExpr(alternating=True), Conclusion.DIVERGES, FiredTest.DIVERGENCE)
    check_verdict(TermExpr(factorial_power=1), Conclusion.DIVERGES, FiredTest.DIVERGENCE)
    check_verdict(TermExpr(base=2), Conclusion.DIVERGES, FiredTest.DIVERGENCE)
    verdict = check_verdict(
        TermExpr(coefficient=-2, numerator="3n + 1", denominator="n + 5"),
        Conclusion.DIVERGES,
        FiredTest.DIVERGENCE,
    )
    assert verdict.evidence["term_limit"] == "6"


def test_rational_term_with_quadratic_denominator():
    check_verdict(
        TermExpr(numerator="n + 10", denominator="n^2 - 3n + 1"),
        Conclusion.DIVERGES,
        FiredTest.HARMONIC_COMPARISON,
    )
    check_verdict(
        TermExpr(alternating=True, numerator="n + 10", denominator="n^2 - 3n + 1", start=1),
        Conclusion.CONVERGES_CONDITIONALLY,
        FiredTest.LEIBNIZ,
    )


def test_alternating_with_summable_absolute_values():
    check_verdict(
        TermExpr(alternating=True, denominator="n^2", start=1),
        Conclusion.CONVERGES_ABSOLUTELY,
        FiredTest.PSERIES_COMPARISON,
    )


def test_verdict_json():
    verdict = classify_series(TermExpr(alternating=True, coefficient=-1, denominator="n", start=1))
    decoded = json.loads(json.dumps(verdict.to_json()))
    assert decoded == {
        "conclusion": "ConvergesConditionally",
        "fired_test": "Leibniz",
        "evidence": {"q": "1", "onset": 1, "absolute": "Diverges", "partner": "1/n"},
    }


def test_exact_ratio():
    limit = exact_ratio(TermExpr(denominator="n", start=1))
    assert limit.kind is LimitKind.FINITE
    assert limit.q == 1
    assert sympy.simplify(limit.ratio - INDEX / (INDEX + 1)) == 0

    limit = exact_ratio(TermExpr(base=Fraction(-1, 3), numerator="n^2"))
    assert limit.q == Fraction(1, 3)
    assert str(limit) == "1/3"

    limit = exact_ratio(TermExpr(base=5, factorial_power=-1))
    assert limit.kind is LimitKind.ZERO
    assert sympy.simplify(limit.ratio - 5 / (INDEX + 1)) == 0

    limit = exact_ratio(TermExpr(factorial_power=1))
    assert limit.kind is LimitKind.INFINITE
    assert str(limit) == "infinity"


def test_root_test():
    assert root_test(TermExpr(base=Fraction(1, 2))).conclusion is Conclusion.CONVERGES_ABSOLUTELY
    assert root_test(TermExpr(base=3)).conclusion is Conclusion.DIVERGES
    verdict = root_test(TermExpr(base=-1))
    assert verdict.conclusion is Conclusion.INCONCLUSIVE
    assert verdict.fired_test is FiredTest.ROOT
    verdict = root_test(TermExpr(denominator="n", start=1))
    assert verdict.conclusion is Conclusion.INCONCLUSIVE
    assert verdict.fired_test is FiredTest.NONE


def test_ratio_onset():
    assert ratio_onset(TermExpr(base=Fraction(1, 2)), Fraction(1, 2)) == 0
    # (n+1)^2 / (3 n^2) <= 2/3 from n = 3 on
    assert ratio_onset(TermExpr(base=Fraction(1, 3), numerator="n^2"), Fraction(2, 3)) == 3
    assert ratio_onset(TermExpr(base=-3, factorial_power=-1), Fraction(1, 2)) == 5
    assert ratio_onset(TermExpr(base=2), Fraction(1, 2)) is None
    with pytest.raises(DomainError):
        ratio_onset(TermExpr(), 0)


def test_ratio_onset_holds_past_threshold():
    t = TermExpr(base=Fraction(2, 3), numerator="n^3 + 1", denominator="n + 2")
    beta = Fraction(5, 6)
    onset = ratio_onset(t, beta)
    assert onset is not None
    for k in range(onset, onset + 200):
        assert abs(term_eval(t, k + 1)) <= beta * abs(term_eval(t, k))
    if onset > t.start:
        k = onset - 1
        assert abs(term_eval(t, k + 1)) > beta * abs(term_eval(t, k))


def check_tail_bound(t: TermExpr, first: int, last: int, window: int = 30):
    """
    Compares |s_{n+m} - s_n| against the ratio tail bound for every n in
    [first, last] and every m up to `window`.
    """
    sums = partial_sums(t, last + window)
    for n in range(first, last + 1):
        _, bound = ratio_tail_bound(t, n)
        s_n = sums[n - t.start]
        for m in range(1, window + 1):
            assert abs(sums[n + m - t.start] - s_n) <= bound, f"n={n}, m={m}"


def test_ratio_tail_bound():
    t = TermExpr(base=Fraction(1, 3), numerator="n^2")
    beta, _ = ratio_tail_bound(t, 2)
    assert beta == Fraction(2, 3)
    check_tail_bound(t, 2, 200)
    check_tail_bound(TermExpr(base=-3, factorial_power=-1), 4, 60)


def test_ratio_tail_bound_errors():
    with pytest.raises(DomainError):
        ratio_tail_bound(TermExpr(denominator="n", start=1), 5)
    with pytest.raises(DomainError):
        ratio_tail_bound(TermExpr(base=Fraction(1, 3), numerator="n^2"), 1)


def test_leibniz_onset():
    assert leibniz_onset(TermExpr(alternating=True, denominator="n", start=1)) == 1
    assert leibniz_onset(TermExpr(denominator="n", start=1)) is None


def test_term_validation():
    with pytest.raises(DomainError):
        TermExpr(coefficient=0)
    with pytest.raises(DomainError):
        TermExpr(base=0)
    with pytest.raises(DomainError):
        TermExpr(numerator=0)
    with pytest.raises(DomainError):
        TermExpr(denominator="n - 3")
    with pytest.raises(DomainError):
        TermExpr(factorial_power=2)
    with pytest.raises(DomainError):
        TermExpr(start=-1)
    with pytest.raises(ParseError):
        TermExpr(numerator="n/2")
    assert TermExpr(denominator="n - 3", start=4).start == 4
    assert TermExpr(denominator="2n - 3").start == 0


def test_term_eval():
    t = TermExpr(alternating=True, coefficient=-1, denominator="n", start=1)
    values = [term_eval(t, n) for n in range(1, 5)]
    assert values == [1, Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 4)]
    with pytest.raises(IndexBelowStartError):
        term_eval(t, 0)
    assert term_eval(TermExpr(base=2, factorial_power=-1), 4) == Fraction(16, 24)


def test_parse_term():
    t = parse_term("alt -1 * 1^n * (1)/(n) * fact^0 from 1")
    assert t == TermExpr(alternating=True, coefficient=-1, denominator="n", start=1)
    t = parse_term("2 * (1/3)^n * (n^2 - 3n + 1)/(n + 1) * fact^-1 from 0")
    assert t == TermExpr(
        coefficient=2,
        base=Fraction(1, 3),
        numerator="n^2 - 3n + 1",
        denominator="n + 1",
        factorial_power=-1,
    )
    assert parse_term("1 * (-3)^n * (1)/(1) * fact^-1 from 0").base == -3


def test_format_term():
    assert format_term(TermExpr()) == "1 * 1^n * (1)/(1) * fact^0 from 0"
    assert (
        format_term(TermExpr(alternating=True, base=Fraction(-1, 2), numerator="n^2 - 3n + 1"))
        == "alt 1 * (-1/2)^n * (n^2 - 3*n + 1)/(1) * fact^0 from 0"
    )
    for t in (
        TermExpr(base=Fraction(1, 3), numerator="n^2"),
        TermExpr(alternating=True, coefficient=Fraction(-5, 7), denominator="2n + 1", start=2),
        TermExpr(base=-3, factorial_power=-1),
    ):
        assert parse_term(format_term(t)) == t


def test_parse_term_errors():
    for text in (
        "1 * 1^n * (1)/(n) * fact^2 from 1",
        "1 * 1^n * (1)/(n) * fact^0",
        "1 * 1^n * (1)/(n$) * fact^0 from 1",
        "1 * 1^n * (1/(n) * fact^0 from 1",
        "1 * 1^n * (1)/(n) * fact^0 from 1 extra",
        "one * 1^n * (1)/(n) * fact^0 from 1",
    ):
        with pytest.raises(ParseError):
            parse_term(text)


def test_parse_term_error_offset():
    with pytest.raises(ParseError) as error:
        parse_term("1 * 1^n * (1)/(n$) * fact^0 from 1")
    assert error.value.offset == 16

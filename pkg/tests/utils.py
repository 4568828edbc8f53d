#!/usr/bin/env python

import logging
from fractions import Fraction
from itertools import product
from random import randint

from hypothesis import strategies as st

from exact_analysis.logic_kit import Binary, Connective, Const, Formula, Not, Var, evaluate

log = logging.getLogger("exact_analysis.tests")


class ExactCheckError(Exception):
    pass


def random_rational(bound: int = 1000, max_denominator: int = 1000) -> Fraction:
    return Fraction(randint(-bound, bound), randint(1, max_denominator))


def rationals(bound: int = 10**6, max_denominator: int = 10**6) -> st.SearchStrategy:
    return st.builds(
        Fraction,
        st.integers(min_value=-bound, max_value=bound),
        st.integers(min_value=1, max_value=max_denominator),
    )


def nonnegative_rationals(bound: int = 10**6) -> st.SearchStrategy:
    return st.builds(
        Fraction,
        st.integers(min_value=0, max_value=bound),
        st.integers(min_value=1, max_value=bound),
    )


NAMES = ("p", "q", "r")


def formulas(max_leaves: int = 12) -> st.SearchStrategy:
    leaves = st.one_of(
        st.sampled_from(NAMES).map(Var),
        st.booleans().map(Const),
    )
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            children.map(Not),
            st.builds(Binary, st.sampled_from(list(Connective)), children, children),
        ),
        max_leaves=max_leaves,
    )


def table_oracle(f: Formula, names=NAMES) -> tuple[bool, ...]:
    """Truth column of `f` over `names` in TT..., FF... order, evaluated directly."""
    rows = product((True, False), repeat=len(names))
    return tuple(evaluate(f, dict(zip(names, values))) for values in rows)


def check(condition: bool, message: str) -> None:
    if not condition:
        log.info(message)
        raise ExactCheckError(message)

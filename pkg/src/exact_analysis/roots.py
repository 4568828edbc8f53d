# SPDX-License-Identifier: Apache-2.0

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sympy import integer_nthroot

from .common import (
    DEFAULT_MAX_ITER,
    CertifiedEnclosure,
    DomainError,
    IrrationalRootError,
    round_down,
    round_up,
)
from .exact_number import Rational, format_rational

log = logging.getLogger(__name__)

# Bound on refinement steps of the rounded iteration in `sqrt_enclosure`
SQRT_STEP_BUDGET: int = 200


@dataclass(frozen=True)
class IterationTrace:
    """
    Iterates x_0, x_1, ... of the k-th root iteration for the target `a`.

    `enclosures[n]` is [min(y_n, x_n), max(y_n, x_n)] with y_n = a / x_n^(k-1);
    from n = 1 on this is exactly [y_n, x_n]. `converged` is False when the
    iteration budget ran out before the width dropped below the tolerance.
    """

    a: Rational
    k: int
    iterates: tuple[Rational, ...]
    enclosures: tuple[CertifiedEnclosure, ...]
    converged: bool
    tolerance: Rational = field(default=Fraction(0))

    @property
    def widths(self) -> tuple[Rational, ...]:
        return tuple(e.width for e in self.enclosures)

    @property
    def final(self) -> CertifiedEnclosure:
        return self.enclosures[-1]

    def to_json(self) -> dict:
        return {
            "a": format_rational(self.a),
            "k": self.k,
            "iterates": [format_rational(x) for x in self.iterates],
            "enclosures": [[format_rational(e.lo), format_rational(e.hi)] for e in self.enclosures],
            "converged": self.converged,
            "tolerance": format_rational(self.tolerance),
        }


def trace_to_json(trace: IterationTrace) -> dict:
    return trace.to_json()


def _check_positive(**values: Rational) -> None:
    for name, value in values.items():
        if value <= 0:
            raise DomainError(f"`{name}` must be positive, got {value}")


def _bracket(a: Fraction, k: int, x: Fraction) -> CertifiedEnclosure:
    # x^k <= a exactly when (a / x^(k-1))^k >= a, so the sorted pair brackets the root
    y = a / x ** (k - 1)
    return CertifiedEnclosure(min(x, y), max(x, y))


def kth_root(
    a: Rational,
    k: int,
    x0: Optional[Rational] = None,
    tol: Rational = Fraction(1, 10**8),
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """
    Runs x_{n+1} = ((k - 1) x_n + a / x_n^(k-1)) / k in exact arithmetic.

    Stops once the bracket [a / x_n^(k-1), x_n] is narrower than `tol` or after
    `max_iter` steps. A missing start value defaults to max(1, a).
    """
    a = Fraction(a)
    if k < 2:
        raise DomainError(f"Root degree must be at least 2, got {k}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter}")
    x = Fraction(x0) if x0 is not None else max(Fraction(1), a)
    tol = Fraction(tol)
    _check_positive(a=a, x0=x, tol=tol)

    iterates = [x]
    enclosures = [_bracket(a, k, x)]
    converged = False
    for n in range(1, max_iter + 1):
        x = ((k - 1) * x + a / x ** (k - 1)) / k
        enclosure = _bracket(a, k, x)
        iterates.append(x)
        enclosures.append(enclosure)
        log.debug(f"root k={k} a={a}: step {n} width={float(enclosure.width):.3e}")
        if enclosure.width < tol:
            converged = True
            break

    return IterationTrace(a, k, tuple(iterates), tuple(enclosures), converged, tol)


def babylonian_sqrt(
    a: Rational,
    x0: Optional[Rational] = None,
    tol: Rational = Fraction(1, 10**8),
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """x_{n+1} = (x_n + a / x_n) / 2, the k = 2 case of `kth_root`."""
    return kth_root(a, 2, x0, tol, max_iter)


def rational_root(a: Rational, k: int) -> Optional[Rational]:
    """The exact k-th root of a >= 0 when it is rational, otherwise None."""
    a = Fraction(a)
    if a < 0:
        raise DomainError(f"No real {k}-th root taken of negative {a}")
    num, num_exact = integer_nthroot(a.numerator, k)
    den, den_exact = integer_nthroot(a.denominator, k)
    if num_exact and den_exact:
        return Fraction(int(num), int(den))
    return None


def error_step_identity(eps: Rational) -> Rational:
    """eps_{n+1} = eps_n^2 / (2 (1 + eps_n)), the relative error after one step."""
    eps = Fraction(eps)
    if eps <= -1:
        raise DomainError(f"Relative error must exceed -1, got {eps}")
    return eps * eps / (2 * (1 + eps))


def relative_error(trace: IterationTrace, n: int) -> Rational:
    """
    eps_n = x_n / a^(1/k) - 1 for a target whose root is rational.

    Raises IrrationalRootError otherwise; use `relative_error_bounds` then.
    """
    root = rational_root(trace.a, trace.k)
    if root is None:
        raise IrrationalRootError(f"The {trace.k}-th root of {trace.a} is not rational")
    return trace.iterates[n] / root - 1


def relative_error_bounds(trace: IterationTrace, n: int) -> CertifiedEnclosure:
    """Encloses eps_n using the final bracket of the trace in place of the root."""
    final = trace.final
    x = trace.iterates[n]
    return CertifiedEnclosure(x / final.hi - 1, x / final.lo - 1)


def sqrt_enclosure(a: Rational, tol: Rational = Fraction(1, 10**8)) -> CertifiedEnclosure:
    """
    [lo, hi] with lo^2 <= a <= hi^2 and hi - lo < tol.

    The upper iterate is rounded up to a grid of spacing about tol/8 after each
    step. Rounding up keeps hi^2 >= a, hence lo = a / hi keeps lo^2 <= a, and the
    grid stops the exact iterates from doubling in size every step.
    """
    a = Fraction(a)
    tol = Fraction(tol)
    if a < 0:
        raise DomainError(f"{a} has no real square root")
    _check_positive(tol=tol)
    if a == 0:
        return CertifiedEnclosure(Fraction(0), Fraction(0))

    root = rational_root(a, 2)
    if root is not None:
        return CertifiedEnclosure.point(root)

    grid = math.ceil(8 / tol)
    hi = round_up(max(Fraction(1), a), grid)
    for _ in range(SQRT_STEP_BUDGET):
        lo = a / hi
        if hi - lo < tol:
            return CertifiedEnclosure(lo, hi)
        hi = round_up((hi + lo) / 2, grid)

    raise DomainError(f"sqrt({a}) enclosure did not reach width {tol}")


def nested_radical_trace(n: int, tol: Rational = Fraction(1, 10**10)) -> list[CertifiedEnclosure]:
    """
    Enclosures of a_1, ..., a_n for a_0 = 1, a_{m+1} = sqrt(1 + a_m).

    The tolerance shrinks by a factor 4 per level and every enclosure is widened
    outward to a grid so the endpoints keep a bounded size.
    """
    if n < 1:
        raise DomainError(f"Number of levels must be at least 1, got {n}")
    current = CertifiedEnclosure.point(Fraction(1))
    result = []
    for m in range(n):
        level_tol = Fraction(tol) / 4**m
        grid = math.ceil(4 / level_tol)
        lo = sqrt_enclosure(1 + current.lo, level_tol / 4).lo
        hi = sqrt_enclosure(1 + current.hi, level_tol / 4).hi
        current = CertifiedEnclosure(round_down(lo, grid), round_up(hi, grid))
        result.append(current)
    return result


def am_gm_holds(alpha: Rational, beta: Rational) -> bool:
    """sqrt(alpha * beta) <= (alpha + beta) / 2, decided in the squared form."""
    if alpha < 0 or beta < 0:
        raise DomainError("The arithmetic-geometric mean inequality needs nonnegative inputs")
    return 4 * alpha * beta <= (alpha + beta) ** 2


def am_gm_equality(alpha: Rational, beta: Rational) -> bool:
    return am_gm_holds(alpha, beta) and 4 * alpha * beta == (alpha + beta) ** 2

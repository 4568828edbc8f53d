# SPDX-License-Identifier: Apache-2.0

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .__about__ import __version__
from .common import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    AnalysisError,
    CertifiedEnclosure,
    DomainError,
    ParseError,
    render_decimal,
)
from .exact_number import (
    RatOp,
    SumKind,
    binomial,
    closed_form_sum,
    enumerate_rationals,
    format_rational,
    parse_rational,
    rat_arith,
)
from .logic_kit import (
    ImplicationKind,
    classify,
    equivalent,
    format_formula,
    implication_transform,
    parse_formula,
    truth_table,
)
from .radix import (
    MAX_BASE,
    MIN_BASE,
    expand_rational,
    format_expansion,
    parse_expansion,
    to_rational,
)
from .roots import kth_root, sqrt_enclosure, trace_to_json
from .series_lab import (
    EventuallyPeriodicSeq,
    alternating_enclosure,
    binet_round,
    cauchy_product_term,
    classify_series,
    euler_e,
    exp_eval,
    fib,
    format_term,
    limsup_liminf,
    parse_term,
    partial_sum,
)

log = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_DOMAIN: int = 2


class OutputFormat(Enum):
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


@dataclass
class CliConfig:
    output_format: OutputFormat = OutputFormat.TABLE
    tolerance: Fraction = DEFAULT_TOLERANCE
    max_iter: int = DEFAULT_MAX_ITER
    base: int = 10

    def __post_init__(self) -> None:
        self.output_format = OutputFormat(self.output_format)
        self.tolerance = Fraction(self.tolerance)
        if self.tolerance <= 0:
            raise DomainError(f"Tolerance must be positive, got {self.tolerance}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be at least 1, got {self.max_iter}")


def report_config(config: CliConfig, log_method: Callable[[str], None]) -> None:
    log_method("exact-analysis configuration:")
    log_method(f"  Output format: {config.output_format.value}")
    log_method(f"  Tolerance: {format_rational(config.tolerance)}")
    log_method(f"  Iteration budget: {config.max_iter}")
    log_method(f"  Radix base: {config.base}")


@dataclass
class Report:
    """
    The result of one subcommand. `payload` is written for --format json, the
    rows (under `header`, if any) for table and csv.
    """

    payload: object
    rows: list[list[str]]
    header: Optional[list[str]] = field(default=None)


class CliUsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise CliUsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


def _scalar(value: str, payload: object = None) -> Report:
    return Report(value if payload is None else payload, [[value]])


def _enclosure_report(enclosure: CertifiedEnclosure, digits: int) -> Report:
    lo, hi = format_rational(enclosure.lo), format_rational(enclosure.hi)
    decimal = render_decimal(enclosure, digits)
    payload = {"lo": lo, "hi": hi, "decimal": decimal}
    return Report(payload, [[lo, hi, decimal]], list(payload))


def _digits_for(tol: Fraction) -> int:
    """Decimal places resolved by an enclosure of width below `tol`."""
    return max(0, len(str(math.floor(1 / tol))) - 1)


def _rationals(text: str) -> list[Fraction]:
    return [parse_rational(item) for item in text.split(",") if item.strip()]


# logic


def _logic_table(args, config: CliConfig) -> Report:
    table = truth_table([parse_formula(text) for text in args.formulas])
    return Report(table.to_json(), table.cells(), table.header)


def _logic_equiv(args, config: CliConfig) -> Report:
    result = equivalent(parse_formula(args.left), parse_formula(args.right))
    return _scalar("true" if result else "false", {"equivalent": result})


def _logic_classify(args, config: CliConfig) -> Report:
    result = classify(parse_formula(args.formula)).value
    return _scalar(result, {"class": result})


def _logic_transform(args, config: CliConfig) -> Report:
    formula = parse_formula(args.formula)
    kinds = [ImplicationKind(args.kind)] if args.kind else list(ImplicationKind)
    rows = [[k.value, format_formula(implication_transform(formula, k))] for k in kinds]
    return Report(dict(rows), rows, ["kind", "formula"])


# num


def _num_arith(args, config: CliConfig) -> Report:
    op = RatOp(args.op)
    operand = parse_rational(args.b) if args.b is not None else None
    k = None
    if op is RatOp.POW and operand is not None:
        if operand.denominator != 1:
            raise DomainError(f"The exponent of pow must be an integer, got {args.b}")
        k, operand = int(operand), None
    result = format_rational(rat_arith(op, parse_rational(args.a), operand, k))
    return _scalar(result, {"result": result})


def _num_binom(args, config: CliConfig) -> Report:
    result = binomial(args.n, args.k)
    return _scalar(str(result), {"binomial": result})


def _num_sum(args, config: CliConfig) -> Report:
    x = parse_rational(args.x) if args.x is not None else None
    result = format_rational(closed_form_sum(SumKind(args.kind), args.n, x))
    return _scalar(result, {"sum": result})


def _num_enum(args, config: CliConfig) -> Report:
    values = [format_rational(x) for x in enumerate_rationals(args.count)]
    return Report(values, [[str(i), v] for i, v in enumerate(values)], ["index", "rational"])


# radix


def _radix_expand(args, config: CliConfig) -> Report:
    result = format_expansion(expand_rational(parse_rational(args.value), config.base))
    return _scalar(result, {"expansion": result})


def _radix_to_frac(args, config: CliConfig) -> Report:
    result = format_rational(to_rational(parse_expansion(args.expansion)))
    return _scalar(result, {"rational": result})


# root


def _root_sqrt(args, config: CliConfig) -> Report:
    enclosure = sqrt_enclosure(parse_rational(args.a), config.tolerance)
    return _enclosure_report(enclosure, _digits_for(config.tolerance))


def _root_kth(args, config: CliConfig) -> Report:
    trace = kth_root(parse_rational(args.a), args.k, None, config.tolerance, config.max_iter)
    report = _enclosure_report(trace.final, _digits_for(config.tolerance))
    report.payload["converged"] = trace.converged
    return report


def _root_trace(args, config: CliConfig) -> Report:
    x0 = parse_rational(args.x0) if args.x0 is not None else None
    trace = kth_root(parse_rational(args.a), args.k, x0, config.tolerance, config.max_iter)
    rows = [
        [str(n), format_rational(x), format_rational(e.lo), format_rational(e.hi)]
        for n, (x, e) in enumerate(zip(trace.iterates, trace.enclosures))
    ]
    return Report(trace_to_json(trace), rows, ["n", "x", "lo", "hi"])


# series


def _series_test(args, config: CliConfig) -> Report:
    verdict = classify_series(parse_term(args.term))
    evidence = " ".join(f"{k}={v}" for k, v in verdict.evidence.items())
    return Report(
        verdict.to_json(),
        [[verdict.conclusion.value, verdict.fired_test.value, evidence]],
        ["conclusion", "test", "evidence"],
    )


def _series_sum(args, config: CliConfig) -> Report:
    term = parse_term(args.term)
    result = format_rational(partial_sum(term, args.n))
    return _scalar(result, {"term": format_term(term), "n": args.n, "sum": result})


def _series_enclose(args, config: CliConfig) -> Report:
    enclosure = alternating_enclosure(parse_term(args.term), args.n)
    return _enclosure_report(enclosure, _digits_for(config.tolerance))


def _series_exp(args, config: CliConfig) -> Report:
    value = exp_eval(parse_rational(args.x), config.tolerance)
    decimal = render_decimal(value.enclosure(), _digits_for(config.tolerance))
    payload = {
        "value": format_rational(value.value),
        "error_bound": format_rational(value.error_bound),
        "terms_used": value.terms_used,
        "decimal": decimal,
    }
    return Report(payload, [list(map(str, payload.values()))], list(payload))


def _series_e(args, config: CliConfig) -> Report:
    result = euler_e(args.digits)
    return _scalar(result, {"e": result})


def _sequence(text: str):
    return parse_term(text) if "from" in text else _rationals(text)


def _series_cauchy(args, config: CliConfig) -> Report:
    a, b = _sequence(args.a), _sequence(args.b)
    values = [format_rational(cauchy_product_term(a, b, n)) for n in range(args.n + 1)]
    return Report(values, [[str(n), v] for n, v in enumerate(values)], ["n", "c_n"])


def _series_fib(args, config: CliConfig) -> Report:
    rows = [[str(n), str(fib(n)), str(binet_round(n))] for n in range(args.n + 1)]
    payload = [{"n": int(n), "fib": int(f), "binet": int(b)} for n, f, b in rows]
    return Report(payload, rows, ["n", "fib", "binet"])


def _series_limsup(args, config: CliConfig) -> Report:
    seq = EventuallyPeriodicSeq(tuple(_rationals(args.head)), tuple(_rationals(args.cycle)))
    liminf, limsup = (format_rational(v) for v in limsup_liminf(seq))
    return Report({"liminf": liminf, "limsup": limsup}, [[liminf, limsup]], ["liminf", "limsup"])


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="exact-analysis",
        description="Exact rational analysis: logic, numbers, radix, roots and series",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TABLE.value
    )
    parser.add_argument("--tol", type=parse_rational, default=DEFAULT_TOLERANCE, help="p/q")
    parser.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    parser.add_argument("--base", type=int, default=10, help=f"{MIN_BASE}..{MAX_BASE}")
    parser.add_argument("-v", "--verbose", action="store_true")

    modules = parser.add_subparsers(dest="module", required=True)

    def command(group, name: str, handler, **kwargs) -> argparse.ArgumentParser:
        sub = group.add_parser(name, **kwargs)
        sub.set_defaults(handler=handler)
        return sub

    logic = modules.add_parser("logic").add_subparsers(dest="command", required=True)
    command(logic, "table", _logic_table).add_argument("formulas", nargs="+")
    sub = command(logic, "equiv", _logic_equiv)
    sub.add_argument("left")
    sub.add_argument("right")
    command(logic, "classify", _logic_classify).add_argument("formula")
    sub = command(logic, "transform", _logic_transform)
    sub.add_argument("formula")
    sub.add_argument("kind", nargs="?", choices=[k.value for k in ImplicationKind])

    num = modules.add_parser("num").add_subparsers(dest="command", required=True)
    sub = command(num, "arith", _num_arith)
    sub.add_argument("op", choices=[op.value for op in RatOp])
    sub.add_argument("a")
    sub.add_argument("b", nargs="?", help="second operand, or the exponent of pow")
    sub = command(num, "binom", _num_binom)
    sub.add_argument("n", type=int)
    sub.add_argument("k", type=int)
    sub = command(num, "sum", _num_sum)
    sub.add_argument("kind", choices=[k.value for k in SumKind])
    sub.add_argument("n", type=int)
    sub.add_argument("--x", help="ratio of the geometric sum")
    command(num, "enum", _num_enum).add_argument("count", type=int)

    radix = modules.add_parser("radix").add_subparsers(dest="command", required=True)
    command(radix, "expand", _radix_expand).add_argument("value")
    command(radix, "to-frac", _radix_to_frac).add_argument("expansion")

    root = modules.add_parser("root").add_subparsers(dest="command", required=True)
    command(root, "sqrt", _root_sqrt).add_argument("a")
    sub = command(root, "kth", _root_kth)
    sub.add_argument("a")
    sub.add_argument("k", type=int)
    sub = command(root, "trace", _root_trace)
    sub.add_argument("a")
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--x0")

    series = modules.add_parser("series").add_subparsers(dest="command", required=True)
    command(series, "test", _series_test).add_argument("term")
    for name, handler in (("sum", _series_sum), ("enclose", _series_enclose)):
        sub = command(series, name, handler)
        sub.add_argument("term")
        sub.add_argument("n", type=int)
    command(series, "exp", _series_exp).add_argument("x")
    command(series, "e", _series_e).add_argument("--digits", type=int, default=7)
    sub = command(series, "cauchy", _series_cauchy)
    sub.add_argument("a", help="comma separated coefficients or a term")
    sub.add_argument("b", help="comma separated coefficients or a term")
    sub.add_argument("n", type=int)
    command(series, "fib", _series_fib).add_argument("n", type=int)
    sub = command(series, "limsup", _series_limsup)
    sub.add_argument("--head", default="")
    sub.add_argument("--cycle", required=True)

    return parser


def _bold(text: str) -> str:
    if sys.stdout.isatty() and "NO_COLOR" not in os.environ:
        return f"\033[1m{text}\033[0m"
    return text


def render(report: Report, output_format: OutputFormat) -> str:
    match output_format:
        case OutputFormat.JSON:
            return json.dumps(report.payload) + "\n"
        case OutputFormat.CSV:
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            if report.header:
                writer.writerow(report.header)
            writer.writerows(report.rows)
            return out.getvalue()
        case OutputFormat.TABLE:
            lines = [list(report.header)] if report.header else []
            lines += report.rows
            if not lines:
                return ""
            widths = [max(len(line[i]) for line in lines) for i in range(len(lines[0]))]
            text = []
            for index, line in enumerate(lines):
                cells = [cell.ljust(width) for cell, width in zip(line, widths)]
                row = "  ".join(cells).rstrip()
                text.append(_bold(row) if report.header and index == 0 else row)
            return "\n".join(text) + "\n"


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        config = CliConfig(OutputFormat(args.format), args.tol, args.max_iter, args.base)
        report_config(config, log.info)
        report = args.handler(args, config)
    except CliUsageError as e:
        sys.stderr.write(str(e))
        return EXIT_USAGE
    except ParseError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except AnalysisError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else EXIT_OK

    sys.stdout.write(render(report, config.output_format))
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))

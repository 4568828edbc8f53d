import json

import pytest
from hypothesis import given
from utils import formulas, table_oracle

from exact_analysis.common import (
    DomainError,
    ParseError,
    TooManyVariablesError,
    UnboundVariableError,
)
from exact_analysis.logic_kit import (
    Binary,
    Const,
    Connective,
    FormulaClass,
    ImplicationKind,
    Not,
    Quantifier,
    QuantifierBinding,
    QuantifierStatement,
    Var,
    classify,
    equivalent,
    evaluate,
    format_formula,
    format_quantified,
    implication_transform,
    negate_quantified,
    parse_formula,
    truth_table,
    variables,
    xor_swap,
)


def check_equivalent(left: str, right: str, expected: bool = True):
    """
    Parses both formulas and compares their truth columns over the union of
    their variables.
    """
    assert equivalent(parse_formula(left), parse_formula(right)) is expected


def test_implication_as_disjunction():
    check_equivalent("p -> q", "!p | q")


def test_contrapositive_law():
    check_equivalent("p -> q", "!q -> !p")


def test_de_morgan():
    check_equivalent("!(p & q)", "!p | !q")
    check_equivalent("!(p | q)", "!p & !q")


def test_proof_by_cases():
    check_equivalent("(p | q) -> r", "(p -> r) & (q -> r)")


def test_converse_differs():
    check_equivalent("p -> q", "q -> p", expected=False)


def test_nand_is_complete():
    check_equivalent("p nand p", "!p")
    check_equivalent("(p nand q) nand (p nand q)", "p & q")
    check_equivalent("(p nand p) nand (q nand q)", "p | q")


def test_xor_as_inequality():
    check_equivalent("p xor q", "!(p <-> q)")


def test_truth_table_of_implication():
    table = truth_table([parse_formula("p -> q")])
    assert table.header == ["p", "q", "p -> q"]
    assert table.cells() == [
        ["T", "T", "T"],
        ["T", "F", "F"],
        ["F", "T", "T"],
        ["F", "F", "T"],
    ]


def test_truth_table_serializers():
    table = truth_table([parse_formula("p & q"), parse_formula("p | q")])
    assert table.to_csv().splitlines() == [
        "p,q,p & q,p | q",
        "T,T,T,T",
        "T,F,F,T",
        "F,T,F,T",
        "F,F,F,F",
    ]
    decoded = json.loads(json.dumps(table.to_json()))
    assert decoded["variables"] == ["p", "q"]
    assert decoded["rows"][1] == {"assignment": ["T", "F"], "values": ["F", "T"]}


def test_truth_table_variable_order():
    table = truth_table([parse_formula("q & p"), parse_formula("r")])
    assert table.variables == ("q", "p", "r")
    assert len(table.rows) == 8


def test_truth_table_limit():
    wide = " & ".join(f"x{i}" for i in range(21))
    with pytest.raises(TooManyVariablesError):
        truth_table([parse_formula(wide)])


def test_classify():
    assert classify(parse_formula("p | !p")) is FormulaClass.TAUTOLOGY
    assert classify(parse_formula("p & !p")) is FormulaClass.CONTRADICTION
    assert classify(parse_formula("p -> q")) is FormulaClass.CONTINGENT
    assert classify(parse_formula("T")) is FormulaClass.TAUTOLOGY


def test_xor_swap():
    for p in (True, False):
        for q in (True, False):
            assert xor_swap(p, q) == (q, p)


def test_precedence_and_associativity():
    assert parse_formula("p & q | r") == Binary(
        Connective.OR, Binary(Connective.AND, Var("p"), Var("q")), Var("r")
    )
    assert parse_formula("p -> q -> r") == Binary(
        Connective.IMPLIES, Var("p"), Binary(Connective.IMPLIES, Var("q"), Var("r"))
    )
    assert parse_formula("p xor q xor r") == Binary(
        Connective.XOR, Binary(Connective.XOR, Var("p"), Var("q")), Var("r")
    )


def test_minimal_parentheses():
    assert format_formula(parse_formula("((p & q)) | r")) == "p & q | r"
    assert format_formula(parse_formula("p -> (q -> r)")) == "p -> q -> r"
    assert format_formula(parse_formula("(p -> q) -> r")) == "(p -> q) -> r"
    assert format_formula(parse_formula("!(p & q)")) == "!(p & q)"


def test_unicode_aliases():
    assert parse_formula("¬p ∨ q") == parse_formula("!p | q")
    assert parse_formula("p ∧ q → r ↔ s") == parse_formula("p & q -> r <-> s")
    assert parse_formula("p ⊕ q") == parse_formula("p XOR q")


def test_parse_error_offsets():
    with pytest.raises(ParseError) as error:
        parse_formula("p & ")
    assert error.value.offset == 4
    assert "identifier" in error.value.expected

    # `∧` takes three bytes in UTF-8
    with pytest.raises(ParseError) as error:
        parse_formula("p ∧ ?")
    assert error.value.offset == 6

    with pytest.raises(ParseError) as error:
        parse_formula("(p | q")
    assert error.value.offset == 6

    with pytest.raises(ParseError):
        parse_formula("")


def test_unbound_variable():
    with pytest.raises(UnboundVariableError) as error:
        evaluate(parse_formula("p & q"), {"p": True})
    assert error.value.name == "q"
    assert isinstance(error.value, KeyError)


def test_variables_in_first_occurrence_order():
    assert variables(parse_formula("(b | a) & !b -> c")) == ("b", "a", "c")


def test_implication_transforms():
    f = parse_formula("p -> q")
    contrapositive = implication_transform(f, ImplicationKind.CONTRAPOSITIVE)
    assert format_formula(contrapositive) == "!q -> !p"
    assert equivalent(f, contrapositive)

    converse = implication_transform(f, ImplicationKind.CONVERSE)
    inverse = implication_transform(f, ImplicationKind.INVERSE)
    assert format_formula(converse) == "q -> p"
    assert format_formula(inverse) == "!p -> !q"
    assert equivalent(converse, inverse)
    assert not equivalent(f, converse)

    with pytest.raises(DomainError):
        implication_transform(parse_formula("p & q"), ImplicationKind.CONVERSE)


def test_negate_quantified():
    statement = QuantifierStatement(
        (
            QuantifierBinding(Quantifier.FORALL, "eps", "R>0"),
            QuantifierBinding(Quantifier.EXISTS, "N", "N"),
        ),
        parse_formula("P"),
    )
    negated = negate_quantified(statement)
    assert format_quantified(negated) == "(exists eps in R>0)(forall N in N) !P"
    assert negate_quantified(negated).prefix == statement.prefix
    assert negate_quantified(negated).matrix == Not(Not(Var("P")))


def test_quantifier_names_distinct():
    with pytest.raises(DomainError):
        QuantifierStatement(
            (
                QuantifierBinding(Quantifier.FORALL, "x"),
                QuantifierBinding(Quantifier.EXISTS, "x"),
            ),
            parse_formula("p"),
        )


@given(formulas())
def test_format_parse_round_trip(f):
    assert parse_formula(format_formula(f)) == f


@given(formulas())
def test_classify_matches_direct_evaluation(f):
    column = table_oracle(f)
    expected = (
        FormulaClass.TAUTOLOGY
        if all(column)
        else FormulaClass.CONTRADICTION if not any(column) else FormulaClass.CONTINGENT
    )
    assert classify(f) is expected


@given(formulas())
def test_double_negation(f):
    assert equivalent(Not(Not(f)), f)


@given(formulas())
def test_tautology_is_equivalent_to_true(f):
    assert (classify(f) is FormulaClass.TAUTOLOGY) == equivalent(f, Const(True))
    assert (classify(f) is FormulaClass.CONTRADICTION) == equivalent(f, Const(False))


@given(formulas(), formulas(), formulas())
def test_equivalence_relation(f, g, h):
    assert equivalent(f, f)
    assert equivalent(f, g) == equivalent(g, f)
    if equivalent(f, g) and equivalent(g, h):
        assert equivalent(f, h)


def test_reserved_variable_names():
    for name in ("T", "F", "xor", "NAND", "", "2p", "p q"):
        with pytest.raises(DomainError):
            Var(name)
    for name in ("p", "t", "x_1", "Txor"):
        assert parse_formula(format_formula(Var(name))) == Var(name)

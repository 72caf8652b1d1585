import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shishkin.exprs import (
    BinOp,
    Call,
    ExprDomainError,
    ExprSyntaxError,
    Neg,
    Num,
    UnknownIdentifierError,
    Var,
    evaluate,
    evaluate_array,
    parse,
    to_source,
)


def test_literal():
    assert parse("2") == Num(2.0)


def test_eval_polynomial():
    assert evaluate(parse("1 + x*x"), 0.5) == 1.25


def test_eval_exp_of_negated_x():
    assert evaluate(parse("exp(0-x)"), 0.0) == 1.0


def test_eval_power_minus_linear():
    assert evaluate(parse("x^2 - x"), 3.0) == 6.0


def test_unclosed_paren_reports_end_of_input():
    with pytest.raises(ExprSyntaxError) as err:
        parse("exp(-x")
    assert err.value.offset == 6
    assert "')'" in err.value.expected
    assert "end of input" in str(err.value)


def test_division_by_zero_names_subexpression():
    with pytest.raises(ExprDomainError, match=r"division by zero in '1\.0 / x' at x = 0\.0"):
        evaluate(parse("1/x"), 0.0)


@pytest.mark.parametrize("source,x,fragment", [
    ("ln(0 - x)", 1.0, "ln of non-positive"),
    ("ln(x)", 0.0, "ln of non-positive"),
    ("sqrt(0 - x)", 4.0, "sqrt of negative"),
    ("(0 - x)^0.5", 2.0, "non-integer exponent"),
    ("x^(0-1)", 0.0, "zero base with negative exponent"),
])
def test_domain_errors(source, x, fragment):
    with pytest.raises(ExprDomainError, match=fragment):
        evaluate(parse(source), x)


def test_negative_base_integer_exponent_allowed():
    assert evaluate(parse("(0 - 2)^3"), 0.0) == -8.0


def test_power_right_associative():
    assert evaluate(parse("2^3^2"), 0.0) == 512.0


def test_unary_minus_binds_below_power():
    assert evaluate(parse("-x^2"), 2.0) == -4.0


def test_power_accepts_negated_exponent():
    assert evaluate(parse("2^-1"), 0.0) == 0.5


def test_precedence_mul_over_add():
    assert parse("1 + 2*x") == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Var()))


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        parse("2 + y")
    assert err.value.name == "y"
    assert err.value.offset == 4


def test_unknown_function():
    with pytest.raises(UnknownIdentifierError):
        parse("tan(x)")


def test_function_requires_parenthesis():
    with pytest.raises(ExprSyntaxError):
        parse("sin x")


def test_trailing_garbage_rejected():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1 2")
    assert err.value.offset == 2


def test_unexpected_character():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1 , 2")
    assert err.value.offset == 2


def test_scientific_notation():
    assert parse("1e-06") == Num(1e-06)
    assert parse("2.5E+3") == Num(2500.0)


def test_bare_dot_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("2.")


def test_whitespace_insignificant():
    assert parse(" 1+ x \t* x ") == parse("1 + x*x")


def test_eval_deterministic_bits():
    expr = parse("sin(3*x) + exp(0 - x^2) / (1 + x)")
    a = evaluate(expr, 0.7342)
    b = evaluate(expr, 0.7342)
    assert a == b and math.isfinite(a)


# hypothesis: random expression trees round-trip through the printer

_functions = st.sampled_from(["sin", "cos", "exp", "ln", "sqrt", "abs"])
_numbers = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)


def _trees(depth):
    leaf = st.one_of(_numbers.map(Num), st.just(Var()))
    if depth == 0:
        return leaf
    sub = _trees(depth - 1)
    return st.one_of(
        leaf,
        st.builds(Neg, sub),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), sub, sub),
        st.builds(Call, _functions, sub),
    )


@settings(max_examples=300, deadline=None)
@given(_trees(4))
def test_printer_round_trip(tree):
    assert parse(to_source(tree)) == tree


@settings(max_examples=100, deadline=None)
@given(_numbers, _numbers, _numbers)
def test_precedence_property(a, b, c):
    lhs = parse("%r + %r * %r" % (a, b, c))
    rhs = parse("%r + (%r * %r)" % (a, b, c))
    assert evaluate(lhs, 0.0) == evaluate(rhs, 0.0)


@settings(max_examples=100, deadline=None)
@given(_trees(3), st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_array_evaluation_matches_scalar(tree, x):
    xs = np.array([x, x / 2.0, 1.0 - x])
    try:
        expected = [evaluate(tree, v) for v in xs]
    except ExprDomainError:
        with pytest.raises(ExprDomainError):
            evaluate_array(tree, xs)
        return
    got = evaluate_array(tree, xs)
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-300, nan_ok=True)


def test_array_evaluation_exact_for_arithmetic():
    expr = parse("1 + x*x - x/4")
    xs = np.linspace(0.0, 1.0, 17)
    scalar = np.array([evaluate(expr, v) for v in xs])
    assert np.array_equal(evaluate_array(expr, xs), scalar)


def test_array_domain_error_names_first_offender():
    expr = parse("1/(x - 0.5)")
    with pytest.raises(ExprDomainError, match="x = 0.5"):
        evaluate_array(expr, np.array([0.0, 0.5, 1.0]))

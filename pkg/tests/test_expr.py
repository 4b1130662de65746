import math

import pytest
from hypothesis import given, strategies as st

from wienerinf.expr import (BinOp, Call, ExpressionEvalError, ExpressionParseError, Neg, Num,
                            Var, eval_log, evaluate, limit, parse_expr, to_text)

LN2 = math.log(2)


@pytest.mark.parametrize("text,j,value", [
    ("0.75*pow2(4^j)", 1, 12.0),
    ("pow2(-(8^j))", 1, 1 / 256),
    ("exp(-(2^j))", 1, math.exp(-2)),
    ("2^3^2", 0, 512.0),
    ("-j^2", 3, 9.0),  # unary minus binds tighter than ^
    ("-(j^2)", 3, -9.0),
    ("1 - 2 - 3", 0, -4.0),
    ("12/4/3", 0, 1.0),
    ("log(exp(j))", 2.5, 2.5),
])
def test_evaluate_examples(text, j, value):
    assert evaluate(parse_expr(text), j) == pytest.approx(value, rel=1e-15)


def test_log_domain_beyond_binary64():
    assert eval_log(parse_expr("pow2(-(8^j))"), 5) == pytest.approx(-(8 ** 5) * LN2, rel=1e-15)
    assert eval_log(parse_expr("0.75*pow2(4^j)"), 6) == pytest.approx(
        math.log(0.75) + 4 ** 6 * LN2, rel=1e-15)
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("pow2(8^j)"), 5)


@pytest.mark.parametrize("text,pos", [
    ("1+", 2), ("(j", 2), ("pow3(j)", 0), ("j*", 2), ("2 $ 3", 2), ("j j", 2),
])
def test_parse_error_positions(text, pos):
    with pytest.raises(ExpressionParseError) as info:
        parse_expr(text)
    assert info.value.pos == pos


def test_limits():
    assert limit(parse_expr("pow2(-(8^j))")) == 0.0
    assert limit(parse_expr("0.75*pow2(4^j)")) == math.inf
    assert limit(parse_expr("3")) == 3.0


def test_log_domain_errors():
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("log(0-j)"), 1)
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("1/(j-1)"), 1)


numbers = st.floats(min_value=-50, max_value=50, allow_nan=False).map(lambda v: Num(round(v, 3)))
leaves = st.one_of(numbers, st.just(Var()))
trees = st.recursive(
    leaves,
    lambda ch: st.one_of(
        st.builds(Neg, ch),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), ch, ch),
        st.builds(Call, st.sampled_from(["exp", "log", "pow2"]), ch),
    ),
    max_leaves=8,
)


@given(trees)
def test_text_round_trip(e):
    assert parse_expr(to_text(e)) == e


@given(trees, st.floats(min_value=0, max_value=6))
def test_evaluation_deterministic(e, j):
    def run():
        try:
            return evaluate(e, j)
        except ExpressionEvalError:
            return "error"
    a, b = run(), run()
    assert a == b


@given(st.integers(min_value=1, max_value=4), st.floats(min_value=-3, max_value=3))
def test_eval_log_matches_plain(j, c):
    e = parse_expr(f"exp({c!r})*pow2(2^j)")
    assert eval_log(e, j) == pytest.approx(math.log(evaluate(e, j)), rel=1e-12, abs=1e-12)

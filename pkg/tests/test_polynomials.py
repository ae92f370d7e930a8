import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paracontact.jets import coordinates
from paracontact.polynomials import Polynomial, Rational, parse_expression, parse_function, random_polynomial

NAMES = ["u1", "v1", "t"]


@pytest.mark.parametrize(
    "expr, terms",
    [
        ("0.3*u1*v1", {(1, 1, 0): 0.3}),
        ("-t + 2*u1^2", {(0, 0, 1): -1.0, (2, 0, 0): 2.0}),
        ("u1 - u1 + 1.5", {(1, 0, 0): 0.0, (0, 0, 0): 1.5}),
        ("1e-3*v1*v1*t", {(0, 2, 1): 1e-3}),
        (".5*t*2", {(0, 0, 1): 1.0}),
    ],
)
def test_parse_expression(expr, terms):
    poly = parse_expression(expr, NAMES)
    assert {e: c for c, e in poly.terms} == pytest.approx(terms)


@pytest.mark.parametrize("bad", ["", "0.3*w", "u1 v1", "u1^-1", "2**u1", "+"])
def test_parse_expression_rejects(bad):
    with pytest.raises(ValueError):
        parse_expression(bad, NAMES)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-5, 5).map(lambda c: round(c, 3)), st.lists(st.integers(0, 2), min_size=3, max_size=3)),
        min_size=1,
        max_size=5,
    ),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
)
def test_expression_roundtrip(terms, p):
    text = " + ".join(
        "*".join([repr(abs(c))] + [f"{NAMES[i]}^{e}" for i, e in enumerate(ex) if e])
        if c >= 0
        else "0 - " + "*".join([repr(abs(c))] + [f"{NAMES[i]}^{e}" for i, e in enumerate(ex) if e])
        for c, ex in terms
    )
    poly = parse_expression(text, NAMES)
    expect = sum(c * np.prod([p[i] ** e for i, e in enumerate(ex)]) for c, ex in terms)
    assert poly(p) == pytest.approx(expect, abs=1e-9)


def test_parse_function_json_forms():
    poly = parse_function([[2.0, [1, 0, 0]], [1.0, [0, 0, 2]]])
    assert isinstance(poly, Polynomial)
    assert poly([0.5, 0.0, 3.0]) == pytest.approx(10.0)
    rat = parse_function({"num": [[1.0, [0, 0, 0]]], "den": [[1.0, [0, 0, 0]], [1.0, [1, 0, 0]]]})
    assert isinstance(rat, Rational)
    X = coordinates([0.0, 0.0, 0.0], 2)
    assert rat(X).coeffs[:2] == pytest.approx([1.0, -1.0])
    assert parse_function(rat.to_json())(X).coeffs == pytest.approx(rat(X).coeffs)
    with pytest.raises(ValueError):
        parse_function([[1.0, [1, 0]]], 3)


def test_random_polynomial_is_seeded():
    a = random_polynomial(np.random.default_rng(3), 3)
    b = random_polynomial(np.random.default_rng(3), 3)
    assert a == b
    assert a.degree == 2
    assert all(sum(e) > 0 for _, e in a.terms)

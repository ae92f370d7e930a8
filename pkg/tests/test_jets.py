import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paracontact.errors import DegenerateJet, DomainError, JetMismatch, OrderExhausted, SingularSystem
from paracontact.jets import Jet, coordinates, jeinsum, jet_analytic, jet_arith, jet_linear_solve, jet_space, stack


def coef(j, alpha):
    return j.coeffs[j.space.index(alpha)]


def taylor(j):
    """``{multi-index: coefficient}`` of a scalar jet."""
    return {tuple(int(x) for x in e): float(c) for e, c in zip(j.space.exponents, j.coeffs)}


def test_storage_covers_exactly_total_degree():
    sp = jet_space(3, 4)
    exps = {tuple(e) for e in sp.exponents}
    assert len(exps) == sp.size == math.comb(3 + 4, 4)
    assert all(sum(e) <= 4 for e in exps)


@pytest.mark.parametrize(
    "op, expected",
    [
        ("mul", {(0,): 1.0, (1,): 0.0, (2,): -1.0}),
        ("div", {(0,): 1.0, (1,): 2.0, (2,): 2.0}),
        ("add", {(0,): 2.0, (1,): 0.0, (2,): 0.0}),
        ("sub", {(0,): 0.0, (1,): 2.0, (2,): 0.0}),
    ],
)
def test_arith_one_variable(op, expected):
    (x,) = coordinates([0.0], 2)
    assert taylor(jet_arith(1.0 + x, 1.0 - x, op)) == pytest.approx(expected)


def test_geometric_series():
    (x,) = coordinates([0.0], 2)
    assert taylor(1.0 / (1.0 + x)) == pytest.approx({(0,): 1.0, (1,): -1.0, (2,): 1.0})


def test_binomial_two_variables():
    x, y = coordinates([0.0, 0.0], 2)
    s = 1.0 + x + y
    expected = {(0, 0): 1, (1, 0): 2, (0, 1): 2, (2, 0): 1, (1, 1): 2, (0, 2): 1}
    assert taylor(jet_arith(s, s, "mul")) == pytest.approx(expected)


def test_exp_series():
    (x,) = coordinates([0.0], 3)
    assert taylor(jet_analytic(x, "exp")) == pytest.approx({(0,): 1, (1,): 1, (2,): 0.5, (3,): 1 / 6})


def test_pow_examples():
    (x,) = coordinates([0.0], 1)
    assert taylor(jet_analytic(1.0 + 2.0 * x, "pow", 0.5)) == pytest.approx({(0,): 1.0, (1,): 1.0})
    four = Jet.constant(jet_space(1, 2), 4.0)
    assert four.pow(-0.5).value == pytest.approx(0.5)


def test_errors():
    (x,) = coordinates([0.0], 2)
    with pytest.raises(DegenerateJet):
        1.0 / x
    with pytest.raises(DomainError):
        (x - 1.0).pow(0.5)
    (y,) = coordinates([0.0], 3)
    with pytest.raises(JetMismatch):
        x + y
    with pytest.raises(OrderExhausted):
        Jet.constant(jet_space(1, 0), 1.0).derivative(0)
    with pytest.raises(OrderExhausted):
        x.truncate(3)


def _fd(f, p, i, h=1e-4):
    e = np.zeros_like(p)
    e[i] = h
    return (f(p + e) - f(p - e)) / (2 * h)


FUNCS = [
    ("product", lambda X: X[0] * X[1] + X[2]),
    ("quotient", lambda X: (X[0] + 2.0) / (3.0 + X[1] * X[2])),
    ("exp", lambda X: (X[0] * X[1]).exp() if isinstance(X[0], Jet) else np.exp(X[0] * X[1])),
    (
        "pow",
        lambda X: (2.0 + X[0] * X[0] + X[1]).pow(1.5) if isinstance(X[0], Jet) else (2.0 + X[0] ** 2 + X[1]) ** 1.5,
    ),
]


@pytest.mark.parametrize("name, f", FUNCS)
def test_derivatives_match_finite_differences(name, f, rng):
    for _ in range(5):
        p = rng.uniform(-0.5, 0.5, 3)
        J = f(coordinates(p, 2))
        for i in range(3):
            assert J.derivative(i).value == pytest.approx(_fd(f, p, i), abs=1e-7)
            # second derivatives from the jet against differences of first ones
            for k in range(3):
                d2 = _fd(lambda q: f(coordinates(q, 1)).derivative(k).value, p, i)
                assert J.derivative(k).derivative(i).value == pytest.approx(d2, abs=1e-6)


coeff_lists = st.lists(st.floats(-2, 2), min_size=10, max_size=10)


def _jet(cs):
    return Jet(jet_space(3, 2), np.array(cs))


@settings(max_examples=50, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_mul_commutative_associative(a, b, c):
    A, B, C = _jet(a), _jet(b), _jet(c)
    np.testing.assert_allclose((A * B).coeffs, (B * A).coeffs, atol=1e-12)
    np.testing.assert_allclose(((A * B) * C).coeffs, (A * (B * C)).coeffs, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(coeff_lists, coeff_lists)
def test_div_inverts_mul(a, b):
    b = [3.0] + b[1:]
    A, B = _jet(a), _jet(b)
    np.testing.assert_allclose(((A * B) / B).coeffs, A.coeffs, atol=1e-10)


def test_linear_solve_identity(rng):
    sp = jet_space(2, 3)
    b = Jet(sp, rng.normal(size=(sp.size, 3)))
    np.testing.assert_allclose(jet_linear_solve(np.eye(3), b).coeffs, b.coeffs)


def test_linear_solve_scalar_reciprocal():
    (x,) = coordinates([0.0], 4)
    A = stack([stack([1.0 + x])])
    b = stack([Jet.constant(x.space, 1.0)])
    sol = jet_linear_solve(A, b)[0]
    assert taylor(sol) == pytest.approx({(k,): (-1.0) ** k for k in range(5)})


@pytest.mark.parametrize("order", [1, 3, 4])
def test_linear_solve_random(rng, order):
    sp = jet_space(3, order)
    A = Jet(sp, rng.normal(size=(sp.size, 4, 4)) * 0.3)
    A.coeffs[0] += 3.0 * np.eye(4)
    b = Jet(sp, rng.normal(size=(sp.size, 4)))
    x = jet_linear_solve(A, b)
    resid = jeinsum("ij,j->i", A, x) - b
    assert resid.max_abs() < 1e-12 * max(1.0, b.max_abs())


def test_linear_solve_singular():
    sp = jet_space(1, 1)
    A = Jet.constant(sp, np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularSystem) as info:
        jet_linear_solve(A, Jet.constant(sp, np.ones(2)))
    assert info.value.condition > 1e13


def test_jeinsum_matches_pointwise_product(rng):
    p = rng.uniform(-1, 1, 2)
    x, y = coordinates(p, 3)
    M = stack([stack([x, y]), stack([y * y, 1.0 + x])])
    v = stack([x * y, y])
    prod = jeinsum("ij,j->i", M, v)
    expect = [x * (x * y) + y * y, (y * y) * (x * y) + (1.0 + x) * y]
    for k in range(2):
        np.testing.assert_allclose(prod[k].coeffs, expect[k].coeffs, atol=1e-13)

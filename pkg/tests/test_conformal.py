import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paracontact import models
from paracontact.conformal import ConformalFactor, cocycle_residual, deform, transformation_law_residuals, wpc_invariance_residual
from paracontact.connection import solve_connection
from paracontact.curvature import curvature_tensor
from paracontact.errors import ModeError
from paracontact.polynomials import Polynomial, parse_expression, random_polynomial
from paracontact.structures import check_compatibility, evaluate
from paracontact.tensors import values


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closed_forms_for_u_equal_u1(n, rng):
    spec = models.heisenberg_spec(n)
    bar = deform(spec, lambda X: X[0])
    for _ in range(3):
        p = rng.uniform(-1, 1, 2 * n + 1)
        ev = evaluate(bar, p, 3)
        conn = solve_connection(ev)
        e2u = math.exp(2 * p[0])
        assert float(values(conn.tau)[0, n]) == pytest.approx(-2 * e2u, rel=1e-12)
        scal = float(values(curvature_tensor(conn, ev).scal))
        assert scal == pytest.approx(-8 * n * (n + 1) * e2u, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_deformation_is_compatible(n, rng):
    spec = deform(models.hyperboloid_spec(n), random_polynomial(rng, 2 * n + 1, scale=0.3))
    for _ in range(5):
        rep = check_compatibility(evaluate(spec, models.random_hyperboloid_point(rng, n), 2), 1e-9)
        assert rep.passed, rep.failures()


LAW_CASES = [
    ("heisenberg", 1, "u1"),
    ("heisenberg", 2, "0.3*u1*v1"),
    ("heisenberg", 2, "0.2*u1^2 - 0.4*v2*t + 0.1*t"),
    ("hyperboloid", 1, "0.3*x1*y1 - 0.2*y0"),
    ("hyperboloid", 2, "0.25*y0^2 + 0.3*x2*y1 - 0.1*x1"),
    ("perturbed", 2, "0.3*x1*y2 + 0.2*y0*x2"),
]


def _base(name, n):
    return {
        "heisenberg": models.heisenberg_spec,
        "hyperboloid": models.hyperboloid_spec,
        "perturbed": lambda n: models.perturbed_hyperboloid_spec(n, seed=7),
    }[name](n)


@pytest.mark.parametrize("name, n, expr", LAW_CASES)
def test_transformation_laws(name, n, expr, rng):
    spec = _base(name, n)
    u = parse_expression(expr, spec.coordinates)
    for _ in range(2):
        rep = transformation_law_residuals(spec, u, rng.uniform(-0.3, 0.3, spec.dim), order=4, tol=1e-8)
        assert rep.passed, rep.failures()


@pytest.mark.parametrize("name, n, expr", LAW_CASES)
def test_wpc_invariance(name, n, expr, rng):
    spec = _base(name, n)
    u = parse_expression(expr, spec.coordinates)
    assert wpc_invariance_residual(spec, u, rng.uniform(-0.3, 0.3, spec.dim)) < 1e-7


@settings(max_examples=8, deadline=None)
@given(st.lists(st.floats(-0.4, 0.4), min_size=9, max_size=9), st.integers(0, 2**31 - 1))
def test_wpc_invariance_random_quadratic(coefs, seed):
    spec = models.perturbed_hyperboloid_spec(2, seed=1)
    rng = np.random.default_rng(seed)
    p = rng.uniform(-0.3, 0.3, 5)
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 0), (2, 2), (4, 4), (1, 3)]
    u = Polynomial(tuple((c, tuple(int(k == i) + int(k == j) for k in range(5))) for c, (i, j) in zip(coefs, pairs)))
    assert wpc_invariance_residual(spec, u, p) < 1e-7


def test_cocycle(rng):
    spec = models.hyperboloid_spec(2)
    u1 = random_polynomial(rng, 5, scale=0.3)
    u2 = random_polynomial(rng, 5, scale=0.3)
    assert cocycle_residual(spec, u1, u2, models.random_hyperboloid_point(rng, 2)) < 1e-10


def test_constant_factor_rescales(rng):
    # u constant: tau stays zero and Scal is multiplied by 2 e^{2u}
    spec = models.hyperboloid_spec(1)
    p = models.random_hyperboloid_point(rng, 1)
    ev = evaluate(spec, p, 2)
    evb = evaluate(deform(spec, lambda X: 0.7), p, 2)
    s0 = float(values(curvature_tensor(solve_connection(ev), ev).scal))
    s1 = float(values(curvature_tensor(solve_connection(evb), evb).scal))
    assert s1 == pytest.approx(2 * math.exp(1.4) * s0, rel=1e-12)


def test_conformal_factor_data(rng):
    spec = models.heisenberg_spec(1)
    p = rng.uniform(-1, 1, 3)
    cd = ConformalFactor(lambda X: X[0] * X[1]).at(evaluate(spec, p, 3))
    # U(u1 v1) = v1, V(u1 v1) = u1 on the flat group
    np.testing.assert_allclose(values(cd.du)[:2], [p[1], p[0]], atol=1e-14)
    assert float(values(cd.grad_norm2)) == pytest.approx(p[1] ** 2 - p[0] ** 2)


def test_cr_structures_are_rejected():
    with pytest.raises(ModeError):
        deform(models.sphere_spec(1), lambda X: X[0])

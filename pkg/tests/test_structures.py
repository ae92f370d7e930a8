import dataclasses

import numpy as np
import pytest

from paracontact import models
from paracontact.errors import ArityError, ChartDomain, FrameDegenerate
from paracontact.jets import jeinsum
from paracontact.structures import check_compatibility, evaluate, load_spec, polynomial_spec
from paracontact.tensors import signed_trace, values

BUILTIN = [
    ("heisenberg", lambda n: models.heisenberg_spec(n), 1.0),
    ("hyperboloid", lambda n: models.hyperboloid_spec(n), 0.4),
    ("perturbed", lambda n: models.perturbed_hyperboloid_spec(n, seed=1), 0.4),
    ("cr-heisenberg", lambda n: models.cr_heisenberg_spec(n), 1.0),
    ("sphere", lambda n: models.sphere_spec(n), 0.4),
]


@pytest.mark.parametrize("n", [1, 2])
def test_heisenberg_structure_functions(n):
    ev = evaluate(models.heisenberg_spec(n), np.linspace(-0.7, 0.8, 2 * n + 1), 3)
    c = values(ev.c)
    N = 2 * n
    expected = np.zeros_like(c)
    for k in range(n):
        expected[k, n + k, N] = -2.0
        expected[n + k, k, N] = 2.0
    np.testing.assert_allclose(c, expected, atol=1e-14)
    # the jet of eta(xi) is the constant -1
    exi = ev.eta_frame()[N]
    assert exi.value == pytest.approx(-1.0)
    assert np.abs(exi.coeffs[1:]).max() < 1e-14


def test_hyperboloid_reeb_at_base_point():
    ev = evaluate(models.hyperboloid_spec(1), np.zeros(3), 2)
    assert values(ev.eta_frame())[-1] == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("name, make, radius", BUILTIN)
@pytest.mark.parametrize("n", [1, 2])
def test_compatibility_on_builtins(name, make, radius, n):
    spec = make(n)
    rng = np.random.default_rng([n, sum(map(ord, name))])
    for _ in range(20):
        rep = check_compatibility(evaluate(spec, rng.uniform(-radius, radius, spec.dim), 2), tol=1e-9)
        assert rep.passed, rep.failures()


@pytest.mark.parametrize("n", [1, 2])
def test_corrupted_pairing_is_reported(n, rng):
    spec = models.hyperboloid_spec(n)
    P = spec.I.copy()
    P[:, [0, 1]] = P[:, [1, 0]]
    bad = dataclasses.replace(spec, pairing=tuple(map(tuple, P)))
    rep = check_compatibility(evaluate(bad, models.random_hyperboloid_point(rng, n), 2))
    assert rep["nijenhuis"].residual > 0.1
    assert not rep.passed


@pytest.mark.parametrize("name, make, radius", BUILTIN[:3])
def test_structure_functions_reproduce_brackets(name, make, radius, rng):
    spec = make(2)
    ev = evaluate(spec, rng.uniform(-radius, radius, spec.dim), 3)
    k = ev.c.order
    rebuilt = jeinsum("ABC,Ci->ABi", ev.c, ev.frame.truncate(k))
    assert (rebuilt - ev.brackets).max_abs() < 1e-10 * max(1.0, ev.brackets.max_abs())
    assert (ev.c + ev.c.transpose(1, 0, 2)).max_abs() < 1e-12


def test_signed_trace_conventions(rng):
    ev = evaluate(models.hyperboloid_spec(2), models.random_hyperboloid_point(rng, 2), 1)
    g = np.diag(ev.eps)
    assert signed_trace(g, ev.eps) == pytest.approx(4.0)
    assert signed_trace(ev.omega[:4, :4], ev.eps) == pytest.approx(0.0)
    with pytest.raises(ArityError):
        signed_trace(np.zeros((3, 3)), ev.eps)


def test_degenerate_frame_and_chart_errors():
    data = {
        "n": 1,
        "coordinates": ["x", "y", "t"],
        "frame": [
            [[[1.0, [1, 0, 0]]], 0.0, 0.0],
            [0.0, [[1.0, [0, 0, 0]]], 0.0],
            [0.0, 0.0, [[1.0, [0, 0, 0]]]],
        ],
        "eta": [0.0, 0.0, [[-1.0, [0, 0, 0]]]],
    }
    spec = polynomial_spec(data)
    with pytest.raises(FrameDegenerate):
        evaluate(spec, [0.0, 0.3, 0.1], 2)
    with pytest.raises(ChartDomain):
        evaluate(models.hyperboloid_spec(1), [0.0, 2.0, 0.0], 2)


def test_json_roundtrip(tmp_path, rng):
    spec = models.heisenberg_spec(2)
    path = tmp_path / "spec.json"
    path.write_text(spec.to_json())
    loaded = load_spec(path)
    p = rng.uniform(-1, 1, 5)
    a, b = evaluate(spec, p, 3), evaluate(loaded, p, 3)
    np.testing.assert_allclose(a.frame.coeffs, b.frame.coeffs)
    np.testing.assert_allclose(a.c.coeffs, b.c.coeffs)
    assert loaded.coordinates == spec.coordinates

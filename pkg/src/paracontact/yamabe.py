"""The sub-ultrahyperbolic Yamabe equation ``L phi = -phi^{(n+2)/n}`` on ``G(P)``.

``L = sum_k (U_k^2 - V_k^2)`` with ``U_k = d/du_k + 2 v_k d/dt`` and
``V_k = d/dv_k - 2 u_k d/dt`` (``convention="fixed"``), or with the opposite
``d/dt`` coefficients (``convention="reflected"``).  The two are conjugate under
``t -> -t``.  Group functions act on coordinate jets ordered
``u_1..u_n, v_1..v_n, t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NearSingularSet, NegativeBase, OrderExhausted
from .jets import Jet, coordinates
from .models import SINGULAR_GUARD, inversion_jets, xi_distance

__all__ = [
    "GroupFunction",
    "ultrahyperbolic_L",
    "phi_epsilon",
    "phi_epsilon_function",
    "f_function",
    "yamabe_residual",
    "harmonic_residual",
    "apply_L",
    "dilate",
    "translate",
    "group_product",
    "kelvin",
    "kelvin_function",
    "sample_points",
    "admissible",
]

FIXED = "fixed"
REFLECTED = "reflected"


@dataclass(frozen=True)
class GroupFunction:
    """A function on ``G(P)`` evaluated on coordinate jets.

    ``fn`` maps the list of ``2n+1`` coordinate jets to a jet.  ``singular(p)``
    returns the distance-like gap to the singular set; points with a gap below
    ``delta`` are rejected.
    """

    fn: Callable
    n: int
    singular: Callable | None = None
    name: str = ""
    delta: float = SINGULAR_GUARD

    def check(self, p):
        if self.singular is not None and self.singular(np.asarray(p, float)) < self.delta:
            raise NearSingularSet(f"{self.name or 'function'} is singular near {list(map(float, p))}")

    def jet(self, p, order: int = 2) -> Jet:
        self.check(p)
        X = coordinates(p, order)
        val = self.fn(X)
        if not isinstance(val, Jet):
            val = Jet.constant(X[0].space, float(val))
        return val

    def __call__(self, p) -> float:
        return float(self.jet(p, 0).value)


def _split(X, n):
    return list(X[:n]), list(X[n : 2 * n]), X[2 * n]


def _field(phi: Jet, X, n, k, which, sign):
    """``U_k phi`` or ``V_k phi`` on a jet."""
    t = 2 * n
    d = phi.order - 1
    if which == "U":
        return phi.derivative(k) + (2.0 * sign) * X[n + k].truncate(d) * phi.derivative(t)
    return phi.derivative(n + k) - (2.0 * sign) * X[k].truncate(d) * phi.derivative(t)


def _L_terms(phi: Jet, X, n, convention):
    if phi.order < 2:
        raise OrderExhausted("the sub-Laplacian needs second-order jets")
    sign = 1.0 if convention == FIXED else -1.0
    terms = []
    for k in range(n):
        Uphi = _field(phi, X, n, k, "U", sign)
        Vphi = _field(phi, X, n, k, "V", sign)
        terms.append(_field(Uphi, X, n, k, "U", sign))
        terms.append(-1.0 * _field(Vphi, X, n, k, "V", sign))
    return terms


def apply_L(phi: Jet, X, n, convention: str = FIXED) -> Jet:
    """``sum_k (U_k^2 - V_k^2) phi`` as a jet two orders lower."""
    terms = _L_terms(phi, X, n, convention)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def ultrahyperbolic_L(phi: GroupFunction, p, convention: str = FIXED) -> float:
    """``L phi`` at ``p``."""
    J = phi.jet(p, 2)
    X = coordinates(p, 2)
    return float(apply_L(J, X, phi.n, convention).value)


def harmonic_residual(phi: GroupFunction, p, convention: str = FIXED) -> float:
    """``|L phi| / max(1, |U_k^2 phi|, |V_k^2 phi|)`` at ``p``."""
    J = phi.jet(p, 2)
    X = coordinates(p, 2)
    vals = [float(t.value) for t in _L_terms(J, X, phi.n, convention)]
    return abs(sum(vals)) / max([1.0] + [abs(v) for v in vals])


def _quadratic(U, V):
    a = 0.0
    for u, v in zip(U, V):
        a = a + u * u - v * v
    return a


def _positive_power(base, r, n):
    """``base ** r`` for a jet or float; negative bases only when ``r`` is an integer."""
    b0 = float(base.value) if isinstance(base, Jet) else float(base)
    if b0 <= 0 and float(r) != int(r):
        raise NegativeBase(f"base {b0:.6g} is not positive; the power {r} has no real branch")
    if isinstance(base, Jet):
        return base.pow(int(r) if float(r) == int(r) else r)
    return float(np.sign(b0) ** int(r) * abs(b0) ** r) if float(r) == int(r) else b0**r


def _sigma_gap(eps, n):
    def gap(p):
        U, V, t = _split(p, n)
        a = eps * eps + float(np.dot(U, U) - np.dot(V, V))
        return abs(abs(a) - abs(t))

    return gap


def phi_epsilon_function(n: int, eps: float) -> GroupFunction:
    """``phi_eps = (4 n^2 eps^2 / ((eps^2 + |u|^2 - |v|^2)^2 - t^2))^{n/2}``."""

    def fn(X):
        U, V, t = _split(X, n)
        a = eps * eps + _quadratic(U, V)
        D = a * a - t * t
        return _positive_power((4.0 * n * n * eps * eps) * D.reciprocal(), n / 2.0, n)

    return GroupFunction(fn, n, _sigma_gap(eps, n), f"phi_{eps:g}")


def phi_epsilon(n: int, eps: float, p) -> float:
    return phi_epsilon_function(n, eps)(p)


def f_function(n: int) -> GroupFunction:
    """``f = ((1 + |u|^2 - |v|^2)^2 - t^2)^{-n/2}``, which satisfies ``L f = -4 n^2 f^{(n+2)/n}``."""

    def fn(X):
        U, V, t = _split(X, n)
        a = 1.0 + _quadratic(U, V)
        return _positive_power((a * a - t * t).reciprocal(), n / 2.0, n)

    return GroupFunction(fn, n, _sigma_gap(1.0, n), "f")


def _critical_power(phi: GroupFunction, p):
    """``phi^{(n+2)/n}`` at ``p``, taking the real branch of ``phi``'s own power."""
    n = phi.n
    v = phi(p)
    r = (n + 2) / n
    if v < 0 and float(r) != int(r):
        raise NegativeBase(f"phi = {v:.6g} < 0 has no real power {r}")
    if v < 0:
        return float(v ** int(r))
    return v**r


def yamabe_residual(phi: GroupFunction, n: int | None = None, p=None, convention: str = FIXED, scale: float = 1.0) -> float:
    """``|L phi + scale * phi^{(n+2)/n}| / max(1, |scale * phi^{(n+2)/n}|)``."""
    Lp = ultrahyperbolic_L(phi, p, convention)
    rhs = scale * _critical_power(phi, p)
    return abs(Lp + rhs) / max(1.0, abs(rhs), abs(Lp))


def dilate(phi: GroupFunction, n: int, lam: float) -> GroupFunction:
    """``lam^n phi(lam u, lam v, lam^2 t)``."""
    if lam == 0:
        raise ValueError("dilation factor must be nonzero")

    def fn(X):
        U, V, t = _split(X, n)
        return (lam**n) * phi.fn([lam * x for x in U] + [lam * x for x in V] + [lam * lam * t])

    def gap(p):
        U, V, t = _split(np.asarray(p, float), n)
        q = np.concatenate([lam * np.asarray(U), lam * np.asarray(V), [lam * lam * t]])
        return phi.singular(q) if phi.singular is not None else np.inf

    return GroupFunction(fn, n, gap, f"dilate({phi.name}, {lam:g})", phi.delta)


def group_product(g, X, n):
    """``g o X`` with ``(u', v', t') o (u, v, t) = (u' + u, v' + v, t' + t + 2 sum(v'_k u_k - u'_k v_k))``.

    This is the law for which the fixed-convention fields are left invariant.
    """
    Ug, Vg, tg = _split(g, n)
    U, V, t = _split(X, n)
    tt = t + tg
    for k in range(n):
        tt = tt + 2.0 * (Vg[k] * U[k] - Ug[k] * V[k])
    return [Ug[k] + U[k] for k in range(n)] + [Vg[k] + V[k] for k in range(n)] + [tt]


def translate(phi: GroupFunction, n: int, g) -> GroupFunction:
    """Left translate ``p -> phi(g o p)``."""
    g = [float(x) for x in g]

    def gap(p):
        q = np.array(group_product(g, list(np.asarray(p, float)), n))
        return phi.singular(q) if phi.singular is not None else np.inf

    return GroupFunction(lambda X: phi.fn(group_product(g, X, n)), n, gap, f"translate({phi.name})", phi.delta)


def kelvin_function(phi: GroupFunction, n: int) -> GroupFunction:
    """``(K phi)(p) = ((|u|^2 - |v|^2)^2 - t^2)^{-n/2} phi(inversion(p))``."""

    def fn(X):
        U, V, t = _split(X, n)
        a = _quadratic(U, V)
        Up, Vp, tp = inversion_jets(U, V, t)
        return _positive_power((a * a - t * t).reciprocal(), n / 2.0, n) * phi.fn(Up + Vp + [tp])

    def gap(p):
        p = np.asarray(p, float)
        g = xi_distance(p)
        if g < phi.delta:
            return g
        U, V, t = _split(p, n)
        Up, Vp, tp = inversion_jets(list(U), list(V), t)
        q = np.array(list(Up) + list(Vp) + [tp])
        return min(g, phi.singular(q)) if phi.singular is not None else g

    return GroupFunction(fn, n, gap, f"K({phi.name})", phi.delta)


def kelvin(phi: GroupFunction, n: int, p) -> float:
    return kelvin_function(phi, n)(p)


def admissible(phi: GroupFunction, p, margin: float = 0.1) -> bool:
    """``p`` lies at least ``margin`` from ``phi``'s singular set and ``phi(p)`` is real."""
    if phi.singular is not None and phi.singular(np.asarray(p, float)) <= margin:
        return False
    try:
        phi(p)
    except NegativeBase:
        return False
    return True


def sample_points(rng, n: int, count: int, functions=(), margin: float = 0.1, tries: int = 100):
    """Uniform points in ``[-1, 1]^{2n+1}`` admissible for every function in ``functions``."""
    pts = []
    for _ in range(count):
        for _attempt in range(tries):
            p = rng.uniform(-1.0, 1.0, 2 * n + 1)
            if all(admissible(f, p, margin) for f in functions):
                pts.append(p)
                break
        else:
            raise NearSingularSet(f"no admissible point found in {tries} tries")
    return pts

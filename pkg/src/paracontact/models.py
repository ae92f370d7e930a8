"""Built-in model structures, the Cayley transform and the group inversion.

Models
------
* hyperbolic Heisenberg group ``G(P)`` in coordinates ``(u_1..u_n, v_1..v_n, t)``
  with ``U_k = d/du_k + 2 v_k d/dt``, ``V_k = d/dv_k - 2 u_k d/dt``, ``xi = 2 d/dt``
  and ``Theta = -dt/2 - sum(u_k dv_k - v_k du_k)``;
* hypersurfaces of ``R^{2n+2}`` written as graphs ``x_0 = h(y_0, x_1, y_1, ...)``,
  with the structure induced by the flat parahermitian (or hermitian) structure:
  the hyperboloid ``sum x^2 - sum y^2 = 1``, the round sphere (CR mode) and
  perturbations of them;
* the CR Heisenberg group and a Sasakian family with non-constant curvature.
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import ChartDegenerate, ChartDomain, NearSingularSet
from .jets import Jet, coordinates, jeinsum, stack
from .report import ResidualReport, normalized_residual
from .structures import CR, PARACONTACT, StructureSpec, mode_sign, polynomial_spec
from .tensors import values

__all__ = [
    "heisenberg_spec",
    "cr_heisenberg_spec",
    "hypersurface_spec",
    "hyperboloid_spec",
    "sphere_spec",
    "perturbed_hyperboloid_spec",
    "sasakian_spec",
    "sl2_twisted_heisenberg_spec",
    "hyperboloid_lift",
    "random_hyperboloid_point",
    "cayley",
    "cayley_pullback_residual",
    "cayley_domain_map",
    "pcr_residuals",
    "inversion",
    "inversion_jets",
    "SINGULAR_GUARD",
]

#: Distance to a singular set below which model maps refuse to evaluate.
SINGULAR_GUARD = 1e-6


def _heisenberg_payload(n, mode):
    m = 2 * n + 1
    t = 2 * n
    frame = []
    for k in range(n):
        row = [[] for _ in range(m)]
        row[k] = [[1.0, [0] * m]]
        e = [0] * m
        e[n + k] = 1
        row[t] = [[2.0, e]]
        frame.append(row)
    for k in range(n):
        row = [[] for _ in range(m)]
        row[n + k] = [[1.0, [0] * m]]
        e = [0] * m
        e[k] = 1
        row[t] = [[-2.0, e]]
        frame.append(row)
    row = [[] for _ in range(m)]
    row[t] = [[2.0, [0] * m]]
    frame.append(row)
    eta = [[] for _ in range(m)]
    sign = 1.0 if mode == PARACONTACT else -1.0
    for k in range(n):
        ev = [0] * m
        ev[n + k] = 1
        eu = [0] * m
        eu[k] = 1
        # paracontact: Theta = -dt/2 - sum(u dv - v du); CR: theta = dt/2 + sum(u dv - v du)
        eta[k] = [[sign * 1.0, ev]]
        eta[n + k] = [[-sign * 1.0, eu]]
    eta[t] = [[-0.5 * sign, [0] * m]]
    names = [f"u{k + 1}" for k in range(n)] + [f"v{k + 1}" for k in range(n)] + ["t"]
    if mode == CR:
        names = [f"x{k + 1}" for k in range(n)] + [f"y{k + 1}" for k in range(n)] + ["t"]
    return {
        "n": n,
        "mode": mode,
        "coordinates": names,
        "frame": frame,
        "eta": eta,
        "signs": None,
        "name": "heisenberg" if mode == PARACONTACT else "cr-heisenberg",
    }


@functools.lru_cache(maxsize=None)
def heisenberg_spec(n: int) -> StructureSpec:
    """The hyperbolic Heisenberg group ``G(P)``: the flat paracontact model."""
    return polynomial_spec(_heisenberg_payload(n, PARACONTACT))


@functools.lru_cache(maxsize=None)
def cr_heisenberg_spec(n: int) -> StructureSpec:
    """The CR Heisenberg group with ``X = d/dx + 2y d/dt``, ``Y = d/dy - 2x d/dt``."""
    return polynomial_spec(_heisenberg_payload(n, CR))


# -- hypersurfaces ------------------------------------------------------------


def _ambient_tables(n, mode):
    m = 2 * n + 2
    if mode == PARACONTACT:
        G = np.diag([1.0, -1.0] * (n + 1))
    else:
        G = np.eye(m)
    J = np.zeros((m, m))  # J[:, k] is the image of the k-th coordinate field
    for j in range(n + 1):
        x, y = 2 * j, 2 * j + 1
        J[y, x] = 1.0
        J[x, y] = 1.0 if mode == PARACONTACT else -1.0
    return G, J


def hypersurface_spec(n, graph, mode=PARACONTACT, name="hypersurface", domain_fn=None, signs=None):
    """Structure induced on the graph ``x_0 = graph(chart)`` in ``R^{2n+2}``.

    Ambient coordinates are ``(x_0, y_0, x_1, y_1, ..., x_n, y_n)``; the chart
    uses all of them but ``x_0``.  ``graph`` maps the list of chart coordinate
    jets to the jet of ``x_0``.  The contact form is ``g(I N, .)`` for the unit
    normal ``N``, the horizontal metric is read off from ``d eta`` and the
    adapted frame is produced by a signed Gram-Schmidt with pivoting.
    """
    s = mode_sign(mode)
    G, J = _ambient_tables(n, mode)
    m = 2 * n + 1
    D = m + 1
    reeb_sign = -1.0 if mode == PARACONTACT else 1.0
    if signs is None:
        signs = (1.0,) * n + ((-1.0,) * n if mode == PARACONTACT else (1.0,) * n)
    eps = np.array(signs, dtype=float)

    @functools.lru_cache(maxsize=32)
    def data(point_key, order):
        point = np.array(point_key)
        X = coordinates(point, order + 2)
        x0 = graph(X)
        dh = x0.gradient()  # order K+1
        sp = dh.space
        one = Jet.constant(sp, 1.0)
        # tangent vectors: chart field d_j pushes forward to d_j + (d_j h) d_x0
        # gradient of f = x0 - h: df = dx0 - sum_j d_j h dx_j
        df = stack([one] + [-dh[j] for j in range(m)])
        nu = jeinsum("ij,j->i", np.linalg.inv(G), df)
        nn = jeinsum("i,ij,j->", nu, G, nu)
        if nn.value <= 0:
            raise ChartDegenerate("the normal of the hypersurface is not spacelike here")
        N = nu * nn.pow(-0.5)
        w = jeinsum("ij,j->i", J, N)
        eta_amb = jeinsum("ij,j->i", G, w)
        # pull back to the chart
        eta = stack([eta_amb[j + 1] + eta_amb[0] * dh[j] for j in range(m)])
        de = eta.gradient()
        de = de - de.transpose()  # order K
        K = order
        Nk, wk = N.truncate(K), w.truncate(K)
        eta_k = eta.truncate(K)

        def gamb(a, b):
            return (a * jeinsum("ij,j->i", G, b)).sum()

        def to_chart(v):
            return v[1:]

        def Q(a, b):
            # horizontal metric g(a, b) = d eta(s I a, b) / 2
            Ia = jeinsum("ij,j->i", J, a)
            return 0.5 * s * (jeinsum("i,ij->j", to_chart(Ia), de) * to_chart(b)).sum()

        spk = Nk.space
        cands = []
        for k in range(D):
            e = np.zeros(D)
            e[k] = 1.0
            v = Jet.constant(spk, e)
            v = v - Nk * gamb(v, Nk) + wk * (s * gamb(v, wk))
            cands.append(v)
        frame_h = [None] * (2 * n)
        for step in range(n):
            pool = list(cands)
            for i in range(len(cands)):
                for j in range(i + 1, len(cands)):
                    pool.append(cands[i] + cands[j])
                    pool.append(cands[i] + jeinsum("ij,j->i", J, cands[j]))
            q = [Q(c, c) for c in pool]
            k = int(np.argmax([abs(x.value) for x in q]))
            if abs(q[k].value) < 1e-8:
                raise ChartDegenerate("no non-null candidate left for the adapted frame")
            c, qc = pool[k], q[k]
            if np.sign(qc.value) != eps[step]:
                if s == 1:
                    c = jeinsum("ij,j->i", J, c)
                    qc = -qc
                else:
                    raise ChartDegenerate("horizontal metric does not have the requested signs")
            e = c * (qc * eps[step]).pow(-0.5)
            Ie = jeinsum("ij,j->i", J, e)
            frame_h[step] = e
            frame_h[n + step] = Ie
            qe, qIe = Q(e, e), Q(Ie, Ie)
            cands = [v - e * (Q(v, e) / qe) - Ie * (Q(v, Ie) / qIe) for v in cands]
        # Reeb field xi = lam (w + beta^b e_b)
        E = stack([to_chart(v) for v in frame_h])  # (2n, m)
        de_w = jeinsum("i,ij->j", to_chart(wk), de)
        de_wE = jeinsum("j,bj->b", de_w, E)
        Ifr = np.zeros((2 * n, 2 * n))
        for k in range(n):
            Ifr[n + k, k] = 1.0
            Ifr[k, n + k] = s
        omega = Ifr.T @ np.diag(eps)
        # sum_b beta^b d eta(e_b, e_a) = - d eta(w, e_a), with d eta(e_b, e_a) = 2 omega[b, a]
        beta = jeinsum("ab,b->a", np.linalg.inv(2.0 * omega.T), -de_wE)
        lam = reeb_sign / gamb(wk, wk)
        xi = (to_chart(wk) + jeinsum("b,bj->j", beta, E)) * lam
        F = stack([E[a] for a in range(2 * n)] + [xi])
        return F, eta_k

    def frame_fn(point, order):
        return data(tuple(float(x) for x in point), order)[0]

    def eta_fn(point, order):
        return data(tuple(float(x) for x in point), order)[1]

    names = ["y0"] + [f"{c}{j}" for j in range(1, n + 1) for c in "xy"]
    return StructureSpec(
        n=n,
        mode=mode,
        frame_fn=frame_fn,
        eta_fn=eta_fn,
        coordinates=tuple(names),
        signs=tuple(signs),
        domain_fn=domain_fn,
        name=name,
    )


def _quadric_radicand(X, mode):
    # chart order: y0, x1, y1, ..., xn, yn
    if mode == PARACONTACT:
        r = 1.0 + X[0] * X[0]
        for j in range(1, len(X), 2):
            r = r - X[j] * X[j] + X[j + 1] * X[j + 1]
    else:
        r = 1.0 - X[0] * X[0]
        for j in range(1, len(X), 2):
            r = r - X[j] * X[j] - X[j + 1] * X[j + 1]
    return r


def _quadric_domain(mode, margin=1e-3):
    def inside(p):
        return float(_quadric_radicand(list(p), mode)) > margin ** 2

    return inside


@functools.lru_cache(maxsize=None)
def hyperboloid_spec(n: int, chart_center=None) -> StructureSpec:
    """The neutral hyperboloid ``HS^{2n+1}`` on the chart ``x_0 > 0``."""
    if chart_center is not None:
        c = np.asarray(chart_center, dtype=float)
        if c.size != 2 * n + 2 or c[0] <= 0:
            raise ChartDomain("chart centre must be an ambient point with x_0 > 0")
        q = c[0::2] @ c[0::2] - c[1::2] @ c[1::2]
        if abs(q - 1.0) > 1e-12:
            raise ChartDomain("chart centre does not lie on the hyperboloid")
    return hypersurface_spec(
        n,
        lambda X: _quadric_radicand(X, PARACONTACT).sqrt(),
        PARACONTACT,
        name="hyperboloid",
        domain_fn=_quadric_domain(PARACONTACT),
    )


@functools.lru_cache(maxsize=None)
def sphere_spec(n: int) -> StructureSpec:
    """The round sphere ``S^{2n+1}`` in ``C^{n+1}`` with ``theta = sum(x dy - y dx)``."""
    return hypersurface_spec(
        n,
        lambda X: _quadric_radicand(X, CR).sqrt(),
        CR,
        name="sphere",
        domain_fn=_quadric_domain(CR),
    )


def perturbed_hyperboloid_spec(n: int, seed: int = 0, amplitude: float = 0.1) -> StructureSpec:
    """Hyperboloid graph plus ``amplitude`` times a random cubic: a generic, non-flat structure."""
    rng = np.random.default_rng(seed)
    from .polynomials import random_polynomial

    q = random_polynomial(rng, 2 * n + 1, degree=3, scale=1.0)

    def graph(X):
        return _quadric_radicand(X, PARACONTACT).sqrt() + amplitude * q(X)

    return hypersurface_spec(
        n, graph, PARACONTACT, name="perturbed-hyperboloid", domain_fn=_quadric_domain(PARACONTACT)
    )


def hyperboloid_lift(chart_point, mode=PARACONTACT) -> np.ndarray:
    """Ambient point ``(x_0, y_0, ..., x_n, y_n)`` over a chart point."""
    p = np.asarray(chart_point, dtype=float)
    r = _quadric_radicand(list(p), mode)
    if r <= 0:
        raise ChartDomain("chart point is outside the graph domain")
    return np.concatenate([[np.sqrt(r)], p])


def random_hyperboloid_point(rng, n, radius=0.4) -> np.ndarray:
    """Chart point of the hyperboloid drawn uniformly from a cube."""
    return rng.uniform(-radius, radius, size=2 * n + 1)


# -- CR examples -----------------------------------------------------------------


def sasakian_spec(kappa: float = 0.3) -> StructureSpec:
    """Three-dimensional Sasakian structure with non-constant Webster curvature.

    ``X = psi^{-1/2} d/dx``, ``Y = psi^{-1/2}(d/dy + b d/dt)``, ``zeta = 2 d/dt`` with
    ``psi = 1 + kappa x^2``, ``b = -4(x + kappa x^3/3)`` and ``theta = dt/2 - b dy/2``.
    """

    def parts(point, order):
        x, y, t = coordinates(point, order)
        psi = 1.0 + kappa * x * x
        b = -4.0 * (x + kappa * x * x * x / 3.0)
        return x, psi, b

    def frame_fn(point, order):
        x, psi, b = parts(point, order)
        sp = x.space
        z = Jet.constant(sp, 0.0)
        r = psi.pow(-0.5)
        return stack(
            [
                stack([r, z, z]),
                stack([z, r, r * b]),
                stack([z, z, z + 2.0]),
            ]
        )

    def eta_fn(point, order):
        x, psi, b = parts(point, order)
        z = Jet.constant(x.space, 0.0)
        return stack([z, -0.5 * b, z + 0.5])

    return StructureSpec(
        n=1,
        mode=CR,
        frame_fn=frame_fn,
        eta_fn=eta_fn,
        coordinates=("x", "y", "t"),
        name=f"sasakian(kappa={kappa})",
    )


def sl2_twisted_heisenberg_spec(seed: int = 0, amplitude: float = 0.1) -> StructureSpec:
    """Three-dimensional ``G(P)`` with the horizontal frame rotated by a field in ``SL(2)``.

    ``e_1 = a U + b V``, ``e_2 = c U + d V`` with ``ad - bc = 1``; ``I e_1 = e_2`` and the
    contact form is unchanged.  This is again an integrable paracontact hermitian
    structure, but with a different ``I`` and ``g``, generically not flat.
    """
    rng = np.random.default_rng(seed)
    from .polynomials import random_polynomial

    pa = random_polynomial(rng, 3, degree=2, scale=amplitude)
    pb = random_polynomial(rng, 3, degree=2, scale=amplitude)
    pc = random_polynomial(rng, 3, degree=2, scale=amplitude)
    base = heisenberg_spec(1)

    def frame_fn(point, order):
        X = coordinates(point, order)
        F = base.frame_fn(point, order)
        a = 1.0 + pa(X)
        b = pb(X)
        c = pc(X)
        d = (1.0 + b * c) / a
        return stack([F[0] * a + F[1] * b, F[0] * c + F[1] * d, F[2]])

    return StructureSpec(
        n=1,
        mode=PARACONTACT,
        frame_fn=frame_fn,
        eta_fn=base.eta_fn,
        coordinates=base.coordinates,
        name="sl2-twisted-heisenberg",
    )


# -- Cayley transform -------------------------------------------------------------


def _cayley_parts(P):
    # P: ambient coordinates (x0, y0, x1, y1, ..., xn, yn), floats or jets
    x0, y0 = P[0], P[1]
    den = (1.0 + x0) * (1.0 + x0) - y0 * y0
    xs = P[2::2]
    ys = P[3::2]
    t = 2.0 * y0 / den
    us = [(xk * (1.0 + x0) - yk * y0) / den for xk, yk in zip(xs, ys)]
    vs = [(yk * (1.0 + x0) - xk * y0) / den for xk, yk in zip(xs, ys)]
    return us, vs, t, den


def _check_sigma0(p, delta):
    p = np.asarray(p, dtype=float)
    den = (1.0 + p[0]) ** 2 - p[1] ** 2
    if abs(abs(1.0 + p[0]) - abs(p[1])) < delta:
        raise NearSingularSet(f"point is within {delta:g} of the Cayley singular set")
    return den


def cayley(p, delta: float = SINGULAR_GUARD):
    """Image in ``G(P)`` (ordered ``u_1..u_n, v_1..v_n, t``) and the pullback factor."""
    p = np.asarray(p, dtype=float)
    den = _check_sigma0(p, delta)
    us, vs, t, _ = _cayley_parts(list(p))
    return np.array(list(us) + list(vs) + [t]), 1.0 / den


def cayley_pullback_residual(chart_point, delta: float = SINGULAR_GUARD) -> float:
    """``|C^* Theta - eta / ((1+x_0)^2 - y_0^2)|`` on the hyperboloid, normalized."""
    q = np.asarray(chart_point, dtype=float)
    n = (q.size - 1) // 2
    amb = hyperboloid_lift(q)
    _check_sigma0(amb, delta)
    X = coordinates(q, 2)
    x0 = _quadric_radicand(X, PARACONTACT).sqrt()
    P = [x0] + X
    us, vs, t, den = _cayley_parts(P)
    # Theta = -dt/2 - sum(u dv - v du), pulled back to the chart
    dt = t.gradient()
    theta = -0.5 * dt
    for u, v in zip(us, vs):
        theta = theta - (u.truncate(1) * v.gradient() - v.truncate(1) * u.gradient())
    # eta = -sum(x dy - y dx), pulled back to the chart
    dP = [p.gradient() for p in P]
    Pl = [p.truncate(1) for p in P]
    eta = 0.0
    for j in range(n + 1):
        eta = eta - (Pl[2 * j] * dP[2 * j + 1] - Pl[2 * j + 1] * dP[2 * j])
    factor = den.truncate(1).reciprocal()
    rhs = factor * eta
    return normalized_residual(theta, rhs)


def cayley_domain_map(P):
    """Map from the ball ``B`` to the domain ``D``: ``(u_0, v_0, u_1, v_1, ..., u_n, v_n)``."""
    x0, y0 = P[0], P[1]
    us, vs, t, den = _cayley_parts(P)
    v0 = (1.0 - x0 * x0 + y0 * y0) / den
    out = [t, v0]
    for u, v in zip(us, vs):
        out += [u, v]
    return out


def pcr_residuals(p, delta: float = SINGULAR_GUARD) -> ResidualReport:
    """Para Cauchy-Riemann residuals of the ball-to-domain Cayley map at ``p``.

    For ``k >= 1`` the pairs ``(u_k, v_k)`` are checked.  For ``k = 0`` the
    paraholomorphic function is ``v_0 - e u_0 = (1 - z_0)/(1 + z_0)``, so the
    pair ``(v_0, -u_0)`` is checked; the pairing ``(u_0, v_0)``, which is not
    paraholomorphic, is reported separately.  Also checks that hyperboloid points land on ``dD``.
    """
    p = np.asarray(p, dtype=float)
    _check_sigma0(p, delta)
    n = p.size // 2 - 1
    X = coordinates(p, 1)
    F = cayley_domain_map(X)
    rep = ResidualReport("pcr")
    grads = [values(f.gradient()) for f in F]
    worst, uv0 = 0.0, 0.0
    scale = max(1.0, max(float(np.max(np.abs(g))) for g in grads))
    for k in range(n + 1):
        a, b = grads[2 * k], grads[2 * k + 1]
        if k == 0:
            a, b = b, -a
        for j in range(n + 1):
            xj, yj = 2 * j, 2 * j + 1
            worst = max(worst, abs(a[xj] - b[yj]), abs(a[yj] - b[xj]))
    a, b = grads[0], grads[1]
    for j in range(n + 1):
        xj, yj = 2 * j, 2 * j + 1
        uv0 = max(uv0, abs(a[xj] - b[yj]), abs(a[yj] - b[xj]))
    rep.add("pcr", worst / scale, 1e-9, p)
    rep.add("pcr_k0_uv_pairing", uv0 / scale, 1e-9, p)
    q = p[0::2] @ p[0::2] - p[1::2] @ p[1::2]
    if abs(q - 1.0) < 1e-12:
        vals = [float(values(f)) for f in F]
        u0, v0 = vals[0], vals[1]
        us, vs = vals[2::2], vals[3::2]
        (g_us, g_vs, g_t, _) = _cayley_parts(list(p))
        bnd = v0 - sum(u * u - v * v for u, v in zip(us, vs))
        rep.add("boundary_v0", abs(bnd) / max(1.0, abs(v0)), 1e-9, p)
        rep.add("boundary_u0_is_t", abs(u0 - g_t) / max(1.0, abs(u0)), 1e-9, p)
    return rep


# -- inversion --------------------------------------------------------------------


def inversion_jets(U, V, t):
    """Inversion of ``G(P)`` on coordinate lists (floats or jets)."""
    a = 0.0
    for u, v in zip(U, V):
        a = a + u * u - v * v
    den = a * a - t * t
    Up = [-(a * u + t * v) / den for u, v in zip(U, V)]
    Vp = [-(a * v + t * u) / den for u, v in zip(U, V)]
    tp = -t / den
    return Up, Vp, tp


def xi_distance(p) -> float:
    """Distance-like gap ``||u|^2 - |v|^2| - |t||`` to the singular set of the inversion."""
    p = np.asarray(p, dtype=float)
    n = (p.size - 1) // 2
    a = p[:n] @ p[:n] - p[n : 2 * n] @ p[n : 2 * n]
    return abs(abs(a) - abs(p[-1]))


def inversion(p, delta: float = SINGULAR_GUARD) -> np.ndarray:
    """Inversion of ``G(P)`` centred at the singular set."""
    p = np.asarray(p, dtype=float)
    n = (p.size - 1) // 2
    if xi_distance(p) < delta:
        raise NearSingularSet(f"point is within {delta:g} of the inversion singular set")
    Up, Vp, tp = inversion_jets(list(p[:n]), list(p[n : 2 * n]), p[-1])
    return np.array(list(Up) + list(Vp) + [tp])

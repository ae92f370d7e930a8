"""The canonical connection, solved pointwise from its axioms.

Unknowns are the coefficients ``Gamma[A, b, c]`` of ``nabla_{E_A} e_b`` along
``e_c`` (``A`` over all ``2n+1`` directions, ``b, c`` horizontal); ``xi`` is
parallel, so no other coefficients appear.  The axioms give a linear system
whose matrix depends only on the metric signs and the pairing, while the
right-hand side is linear in the structure functions.  The least-norm
solution is therefore a fixed matrix applied to the structure-function jets.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import AxiomInconsistency, NonUniqueConnection, OrderExhausted
from .jets import Jet, jeinsum
from .report import ResidualReport, normalized_residual
from .structures import StructureEval
from .tensors import signed_trace, values

__all__ = ["Connection", "solve_connection", "covariant_derivative", "verify_axioms", "axiom_system"]

AXIOM_TOL = 1e-9


@functools.lru_cache(maxsize=64)
def axiom_system(n: int, signs: tuple, pairing: tuple, s: int):
    """Constant matrices ``(M, B)`` with ``M @ gamma = B @ c`` encoding the axioms.

    ``gamma`` is ``Gamma[A, b, c]`` flattened, ``c`` the structure functions
    ``c[A, B, C]`` flattened.
    """
    N = 2 * n
    D = N + 1
    eps = np.array(signs)
    I = np.array(pairing)
    xi = N

    def g_ix(A, b, c):
        return (A * N + b) * N + c

    def c_ix(A, B, C):
        return (A * D + B) * D + C

    nun = D * N * N
    rows_M, rows_B = [], []

    def add(mrow, brow=None):
        rows_M.append(mrow)
        rows_B.append(brow if brow is not None else {})

    # metric: eps_c Gamma^c_{Ab} + eps_b Gamma^b_{Ac} = 0
    for A in range(D):
        for b in range(N):
            for c in range(b, N):
                r = {}
                r[g_ix(A, b, c)] = r.get(g_ix(A, b, c), 0.0) + eps[c]
                r[g_ix(A, c, b)] = r.get(g_ix(A, c, b), 0.0) + eps[b]
                add(r)
    # nabla I = 0: sum_d I[d,b] Gamma^c_{Ad} - I[c,d] Gamma^d_{Ab} = 0
    for A in range(D):
        for b in range(N):
            for c in range(N):
                r = {}
                for d in range(N):
                    if I[d, b]:
                        r[g_ix(A, d, c)] = r.get(g_ix(A, d, c), 0.0) + I[d, b]
                    if I[c, d]:
                        r[g_ix(A, b, d)] = r.get(g_ix(A, b, d), 0.0) - I[c, d]
                add(r)
    # horizontal torsion has no horizontal part
    for a in range(N):
        for b in range(a + 1, N):
            for c in range(N):
                add({g_ix(a, b, c): 1.0, g_ix(b, a, c): -1.0}, {c_ix(a, b, c): 1.0})
    # tau(e_a, e_b) = eps_b (Gamma^b_{xi a} - c^b_{xi a}) equals (1/2) L_xi g
    for a in range(N):
        for b in range(N):
            rb = {c_ix(xi, a, b): 0.5 * eps[b]}
            rb[c_ix(xi, b, a)] = rb.get(c_ix(xi, b, a), 0.0) - 0.5 * eps[a]
            add({g_ix(xi, a, b): eps[b]}, rb)
    # tau symmetric
    for a in range(N):
        for b in range(a + 1, N):
            add(
                {g_ix(xi, a, b): eps[b], g_ix(xi, b, a): -eps[a]},
                {c_ix(xi, a, b): eps[b], c_ix(xi, b, a): -eps[a]},
            )
    # tau(I e_a, I e_b) = s tau(e_a, e_b)
    for a in range(N):
        for b in range(N):
            r, rb = {}, {}
            for c in range(N):
                for d in range(N):
                    w = I[c, a] * I[d, b] * eps[d]
                    if w:
                        r[g_ix(xi, c, d)] = r.get(g_ix(xi, c, d), 0.0) + w
                        rb[c_ix(xi, c, d)] = rb.get(c_ix(xi, c, d), 0.0) + w
            r[g_ix(xi, a, b)] = r.get(g_ix(xi, a, b), 0.0) - s * eps[b]
            rb[c_ix(xi, a, b)] = rb.get(c_ix(xi, a, b), 0.0) - s * eps[b]
            add(r, rb)

    M = np.zeros((len(rows_M), nun))
    B = np.zeros((len(rows_M), D ** 3))
    for k, (rm, rb) in enumerate(zip(rows_M, rows_B)):
        for j, v in rm.items():
            M[k, j] += v
        for j, v in rb.items():
            B[k, j] += v
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    K = np.linalg.pinv(M, rcond=1e-10) @ B
    return M, B, K, rank


@dataclass
class Connection:
    """Coefficients of the canonical connection at a point.

    ``gamma[A, b, c]`` is the ``e_c`` component of ``nabla_{E_A} e_b``;
    ``gamma_full`` pads it to ``(2n+1)^3`` with zero xi slots.  ``tau[a, b]``
    is ``g(T(xi, e_a), e_b)``.
    """

    gamma: Jet
    gamma_full: Jet
    tau: Jet
    torsion: Jet
    mode: str
    rank: int
    residual: float

    @property
    def order(self):
        return self.gamma.order


def solve_connection(ev: StructureEval, tol: float = AXIOM_TOL) -> Connection:
    """Solve the axioms of the canonical (or, in CR mode, Webster) connection."""
    n, N = ev.n, ev.N
    D = N + 1
    M, B, K, rank = axiom_system(n, tuple(ev.eps), tuple(map(tuple, ev.I)), ev.s)
    if rank < M.shape[1]:
        raise NonUniqueConnection(
            f"axiom system has rank {rank} < {M.shape[1]} unknowns; "
            "the structure violates the hypotheses of the uniqueness theorem"
        )
    cflat = ev.c.reshape(D ** 3)
    gflat = jeinsum("ij,j->i", K, cflat)
    rhs = jeinsum("ij,j->i", B, cflat)
    resid = normalized_residual(values(jeinsum("ij,j->i", M, gflat)), values(rhs), [values(cflat)])
    if resid > tol:
        raise AxiomInconsistency(
            f"least-norm solution leaves an axiom residual of {resid:.3g}", resid
        )
    gamma = gflat.reshape(D, N, N)
    sp = gamma.space
    full = np.zeros((sp.size, D, D, D))
    full[:, :, :N, :N] = gamma.coeffs
    gamma_full = Jet(sp, full)
    c = ev.c
    torsion = gamma_full - gamma_full.transpose(1, 0, 2) - c
    # tau_ab = g(T(xi, e_a), e_b)
    tau = jeinsum("ab,b->ab", torsion[N][:N, :N], ev.eps)
    return Connection(gamma, gamma_full, tau, torsion, ev.spec.mode, rank, resid)


def covariant_derivative(T, conn: Connection, ev: StructureEval) -> Jet:
    """Frame covariant derivative; the derivative direction becomes axis 0.

    Slots of ``T`` may have length ``2n+1`` or ``2n``.  The jet order drops by one.
    """
    if not isinstance(T, Jet):
        raise TypeError("covariant_derivative expects a jet tensor")
    if T.order < 1:
        raise OrderExhausted("covariant derivative of an order-0 jet")
    dT = ev.frame_derivative(T)
    k = min(dT.order, conn.order)
    out = dT.truncate(k)
    Tk = T.truncate(k)
    G = conn.gamma_full.truncate(k)
    N = ev.N
    letters = "bcdefghjklmnopqrstuvw"
    nd = T.ndim
    idx = letters[:nd]
    for j in range(nd):
        size = T.shape[j]
        Gj = G if size == N + 1 else G[:, :N, :N]
        src = idx[:j] + "z" + idx[j + 1 :]
        out = out - jeinsum(f"A{idx[j]}z,{src}->A{idx}", Gj, Tk)
    return out


def verify_axioms(conn: Connection, ev: StructureEval, tol: float = AXIOM_TOL) -> ResidualReport:
    """Residuals of every defining axiom for a solved connection."""
    rep = ResidualReport("axioms")
    N = ev.N
    h = slice(0, N)
    pt = ev.point
    sp = conn.gamma.space
    G = Jet.constant(sp, ev.G)
    rep.add("nabla_g", normalized_residual(covariant_derivative(G, conn, ev)), tol, pt)
    # with nabla g = 0, nabla I = 0 is equivalent to nabla omega = 0
    om = Jet.constant(sp, ev.omega)
    rep.add("nabla_I", normalized_residual(covariant_derivative(om, conn, ev)), tol, pt)
    eta = ev.eta_frame().truncate(sp.order)
    rep.add("nabla_eta", normalized_residual(covariant_derivative(eta, conn, ev)), tol, pt)
    # nabla xi = 0: the xi row and column of gamma_full vanish by construction
    gf = values(conn.gamma_full)
    rep.add("nabla_xi", float(np.max(np.abs(gf[:, N, :])) + np.max(np.abs(gf[:, :, N]))), tol, pt)

    T = values(conn.torsion)
    expected = 2.0 * ev.reeb_sign * ev.omega[h, h]
    rep.add("torsion_horizontal", normalized_residual(T[h, h, h]), tol, pt)
    rep.add("torsion_reeb_component", normalized_residual(T[h, h, N], expected), tol, pt)
    rep.add("torsion_xi_horizontal", normalized_residual(T[N, h, N], 0.0, [T]), tol, pt)

    tau = values(conn.tau)
    rep.add("tau_symmetric", normalized_residual(tau, tau.T), tol, pt)
    I = ev.I
    rep.add("tau_I_invariance", normalized_residual(I.T @ tau @ I, ev.s * tau), tol, pt)
    c = values(ev.c)
    lie = -0.5 * (c[N, h, h] * ev.eps[None, :] + (c[N, h, h] * ev.eps[None, :]).T)
    rep.add("tau_lie_derivative", normalized_residual(tau, lie), tol, pt)
    rep.add("tau_trace", normalized_residual(signed_trace(tau, ev.eps), 0.0, [tau]), tol, pt)
    rep.add(
        "tau_trace_I",
        normalized_residual(signed_trace(tau, ev.eps, twist=I), 0.0, [tau]),
        tol,
        pt,
    )
    return rep

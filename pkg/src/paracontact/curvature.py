"""Curvature of the canonical connection, the conformal tensors and their identities.

Frame conventions: ``R[A, B, C, D] = g(R(E_A, E_B) E_C, E_D)`` with
``R = [nabla, nabla] - nabla_[,]``; the Ricci tensor is
``r(A, B) = R(e_a, A, B, e_a)``, the Ricci 2-form
``rho(A, B) = R(A, B, e_a, I e_a) / 2`` and ``Scal = r(e_a, e_a)``, every sum
being signed.  Second covariant derivatives are
``nabla^2_{A,B} = nabla_A nabla_B - nabla_{nabla_A B}``, i.e. the covariant
derivative of the covariant derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import Connection, covariant_derivative
from .errors import ModeError, OrderExhausted
from .jets import Jet, jeinsum
from .report import ResidualReport, normalized_residual
from .structures import PARACONTACT, StructureEval
from .tensors import on_slot, signed_trace

__all__ = [
    "CurvatureData",
    "InvariantTensors",
    "curvature_tensor",
    "curvature_identity_residuals",
    "invariant_tensors",
    "pw_trace_residuals",
    "integrability_residuals",
    "f_tensor",
]


@dataclass
class CurvatureData:
    R: Jet  # (2n+1)^4
    r: Jet  # (2n+1)^2
    rho: Jet  # (2n+1)^2
    scal: Jet  # scalar

    @property
    def order(self):
        return self.R.order


@dataclass
class InvariantTensors:
    L: Jet
    PW: Jet
    Wpc: Jet
    F: Jet | None
    B_X_xi: Jet | None
    B_xi_xi: Jet | None
    trL: Jet


def curvature_tensor(conn: Connection, ev: StructureEval) -> CurvatureData:
    """``R``, ``r``, ``rho`` and ``Scal`` from the connection coefficients."""
    G = conn.gamma_full
    if G.order < 1:
        raise OrderExhausted("curvature needs connection coefficients of order at least 1")
    dG = ev.frame_derivative(G)  # [A, B, c, f] = E_A(Gamma^f_{Bc})
    k = dG.order
    Gk = G.truncate(k)
    c = ev.c.truncate(k)
    Rup = dG - dG.transpose(1, 0, 2, 3)
    Rup = Rup + jeinsum("Bcd,Adf->ABcf", Gk, Gk) - jeinsum("Acd,Bdf->ABcf", Gk, Gk)
    Rup = Rup - jeinsum("ABD,Dcf->ABcf", c, Gk)
    R = jeinsum("ABcf,f->ABcf", Rup, np.diag(ev.G))
    r = signed_trace(R, ev.eps, axes=(0, 3))
    rho = 0.5 * signed_trace(R, ev.eps, axes=(2, 3), twist=ev.I)
    N = ev.N
    scal = signed_trace(r[:N, :N], ev.eps)
    return CurvatureData(R, r, rho, scal)


def _h(T, N):
    """Restrict every slot of a full-frame tensor to the horizontal part."""
    return T[(slice(0, N),) * T.ndim]


def curvature_identity_residuals(curv: CurvatureData, conn: Connection, ev: StructureEval, tol=1e-7):
    """Residuals of the curvature identities satisfied by the canonical connection."""
    rep = ResidualReport("curvature-identities")
    N, n, s, I = ev.N, ev.n, ev.s, ev.I
    pt = ev.point
    k = curv.order
    R = curv.R
    Rh = _h(R, N)
    g = np.diag(ev.eps)
    om = ev.omega[:N, :N]
    tau = conn.tau.truncate(k)
    r = _h(curv.r, N)
    rho = _h(curv.rho, N)

    RII = on_slot(on_slot(Rh, I, 2), I, 3)
    rep.add("curi_I", normalized_residual(RII, -s * Rh), tol, pt)
    rep.add("curi_antisym", normalized_residual(Rh, -Rh.transpose(0, 1, 3, 2)), tol, pt)
    rep.add("curi_xi", normalized_residual(R[:, :, :, N], 0.0, [R]), tol, pt)
    rep.add("ricci_symmetric", normalized_residual(r, r.transpose()), tol, pt)

    tauI = on_slot(tau, I, 1)  # tau(X, I Y)
    if ev.spec.mode == PARACONTACT:
        lhs = Rh + on_slot(on_slot(Rh, I, 0), I, 1)
        rhs = 2.0 * (
            jeinsum("xz,yv->xyzv", g, tauI)
            + jeinsum("yv,xz->xyzv", g, tauI)
            - jeinsum("yz,xv->xyzv", g, tauI)
            - jeinsum("xv,yz->xyzv", g, tauI)
        ) + 2.0 * (
            jeinsum("xz,yv->xyzv", om, tau)
            + jeinsum("yv,xz->xyzv", om, tau)
            - jeinsum("yz,xv->xyzv", om, tau)
            - jeinsum("xv,yz->xyzv", om, tau)
        )
        rep.add("currrr", normalized_residual(lhs, rhs, [Rh]), tol, pt)
        bs = 2.0 * (
            jeinsum("xz,yv->xyzv", om, tau)
            + jeinsum("yv,xz->xyzv", om, tau)
            - jeinsum("yz,xv->xyzv", om, tau)
            - jeinsum("xv,yz->xyzv", om, tau)
        )
        rep.add("biansim", normalized_residual(Rh - Rh.transpose(2, 3, 0, 1), bs, [Rh]), tol, pt)
        rep.add(
            "torric",
            normalized_residual(r + on_slot(on_slot(r, I, 0), I, 1), 4.0 * (1 - n) * tauI, [r]),
            tol,
            pt,
        )
        rIIr = r - on_slot(on_slot(r, I, 0), I, 1)
        rep.add("rho", normalized_residual(2.0 * on_slot(rho, I, 1), rIIr, [r]), tol, pt)
        trR = signed_trace(Rh, ev.eps, axes=(0, 1), twist=I)
        rep.add("rho_trace", normalized_residual(2.0 * on_slot(rho, I, 1), on_slot(trR, I, 1), [Rh]), tol, pt)

    if k >= 1:
        Dtau = covariant_derivative(conn.tau, conn, ev)  # [A, y, z]
        kk = min(k, Dtau.order)
        Dh = Dtau.truncate(kk)[:N]
        # R(xi, X, Y, Z) = (nabla_Y tau)(Z, X) - (nabla_Z tau)(Y, X)
        lhs = R.truncate(kk)[N, :N, :N, :N]
        rhs = Dh.transpose(2, 0, 1) - Dh.transpose(2, 1, 0)
        rep.add("currr", normalized_residual(lhs, rhs, [Dh]), tol, pt)
        Rk = R.truncate(kk)
        rep.add(
            "biansimv",
            normalized_residual(lhs - Rk[:N, :N, N, :N].transpose(2, 0, 1), rhs, [Dh]),
            tol,
            pt,
        )
        Dr = covariant_derivative(r, conn, ev)[:N]  # [a, b, x]
        div = 2.0 * signed_trace(Dr, ev.eps, axes=(0, 1))
        dS = ev.frame_derivative(curv.scal)[:N]
        rep.add("div", normalized_residual(div, dS, [Dr]), tol, pt)
        if ev.spec.mode == PARACONTACT:
            DR = covariant_derivative(Rh, conn, ev)[:N]  # [a, x, y, z, v]
            t1 = signed_trace(DR, ev.eps, axes=(0, 4))  # (nabla_{e_a} R)(X, Y, Z, e_a)
            rf = curv.r.truncate(Dr.order)
            RxI = on_slot(R.truncate(Dr.order)[N, :N, :N, :N], I, 2)  # R(xi, Y, Z, I X) -> [y, z, x]
            # (nabla_{e_a} R)(X, Y, Z, e_a) - (nabla_X r)(Y, Z) + (nabla_Y r)(X, Z)
            # + 2 R(xi, Y, Z, I X) - 2 R(xi, X, Z, I Y) + 2 omega(X, Y) r(xi, Z)
            lhs = t1 - Dr + Dr.transpose(1, 0, 2) + 2.0 * RxI.transpose(2, 0, 1)
            lhs = lhs - 2.0 * RxI.transpose(0, 2, 1)
            lhs = lhs + 2.0 * jeinsum("xy,z->xyz", om, rf[N, :N])
            rep.add("bian2", normalized_residual(lhs, 0.0, [t1, Dr]), tol, pt)
    return rep


def _LIL(L, eps, I):
    """``LIL[x, z] = L(X, I L(Z))`` with ``L(Z)`` the endomorphism dual to ``L``."""
    LI = on_slot(L, I, 1)
    return jeinsum("xb,b,zb->xz", LI, eps, L)


def invariant_tensors(curv: CurvatureData, conn: Connection, ev: StructureEval, with_F=None, with_B=True):
    """``L``, ``PW``, ``W^pc`` and, when the jet order allows, ``F`` and the ``B`` tensors."""
    N, n, I = ev.N, ev.n, ev.I
    eps = ev.eps
    k = curv.order
    g = np.diag(eps)
    om = ev.omega[:N, :N]
    tau = conn.tau.truncate(k)
    rho = _h(curv.rho, N)
    scal = curv.scal
    L = (
        on_slot(rho, I, 1) / (2.0 * (n + 2))
        - on_slot(tau, I, 0)
        - jeinsum("xy,->xy", g, scal) / (8.0 * (n + 1) * (n + 2))
    )
    LI = on_slot(L, I, 1)  # L(X, I Y)
    IL = on_slot(L, I, 0)  # L(I X, Y)
    Rh = _h(curv.R, N)
    PW = (
        Rh
        + jeinsum("xz,yv->xyzv", g, L)
        + jeinsum("yv,xz->xyzv", g, L)
        - jeinsum("yz,xv->xyzv", g, L)
        - jeinsum("xv,yz->xyzv", g, L)
        + jeinsum("xz,yv->xyzv", om, LI)
        + jeinsum("yv,xz->xyzv", om, LI)
        - jeinsum("yz,xv->xyzv", om, LI)
        - jeinsum("xv,yz->xyzv", om, LI)
        + jeinsum("xy,zv->xyzv", om, LI - IL)
        + jeinsum("zv,xy->xyzv", om, LI - IL)
    )
    Wpc = 0.5 * (PW - on_slot(on_slot(PW, I, 0), I, 1))
    trL = signed_trace(L, eps)

    F = None
    if with_F is None:
        with_F = n == 1 and k >= 2
    if with_F:
        F = f_tensor(curv, conn, ev)

    B_X = B_xx = None
    if with_B and k >= 1:
        DL = covariant_derivative(L, conn, ev)
        B_X = -signed_trace(DL[:N], eps, axes=(0, 1), twist=I) / (2.0 * n + 1)
        if B_X.order >= 1:
            DB = covariant_derivative(B_X, conn, ev)
            kk = DB.order
            LIL = _LIL(L.truncate(kk), eps, I)
            B_xx = -(
                signed_trace(DB[:N], eps, axes=(0, 1), twist=I) + signed_trace(LIL, eps, twist=I)
            ) / (2.0 * n)
    return InvariantTensors(L, PW, Wpc, F, B_X, B_xx, trL)


def f_tensor(curv: CurvatureData, conn: Connection, ev: StructureEval, cr: bool = False) -> Jet:
    """The three-dimensional invariant ``F`` (or ``F^car`` with ``cr=True``)."""
    if ev.n != 1:
        raise ModeError("F is defined only in dimension three")
    N, I, eps = ev.N, ev.I, ev.eps
    g = np.diag(eps)
    if curv.order < 2:
        raise OrderExhausted("F needs curvature jets of order at least 2")
    dS = ev.frame_derivative(curv.scal)
    H = covariant_derivative(dS, conn, ev)[:N, :N]  # (nabla d Scal)(A, B)
    Dtau = covariant_derivative(conn.tau, conn, ev)
    D2 = covariant_derivative(Dtau, conn, ev)  # [A, B, y, z] = (nabla^2_{A,B} tau)(y, z)
    k = min(H.order, D2.order)
    H = H.truncate(k)
    D2h = D2.truncate(k)[:N, :N]
    HI = on_slot(H, I, 1)  # H(X, I Y)
    t_xa = signed_trace(D2h, eps, axes=(1, 3))  # [x, y] = (nabla^2_{X e_a} tau)(Y, e_a)
    t_aIa = signed_trace(D2h, eps, axes=(0, 1), twist=I)  # [y, z]
    tau = conn.tau.truncate(k)
    scal = curv.scal.truncate(k)
    trH = signed_trace(H, eps, twist=I)
    sign48 = 1.0 if cr else -1.0
    return (
        HI
        + HI.transpose()
        + 16.0 * t_xa
        + 16.0 * t_xa.transpose()
        + sign48 * 48.0 * on_slot(t_aIa, I, 1)
        + 36.0 * scal * tau
        + 3.0 * jeinsum("xy,->xy", g, trH)
    )


def pw_trace_residuals(inv: InvariantTensors, ev: StructureEval, tol=1e-9) -> ResidualReport:
    """Signed traces of ``PW``, and the ``I``-type symmetries of ``PW``."""
    rep = ResidualReport("pw-traces")
    PW, eps, I, pt = inv.PW, ev.eps, ev.I, ev.point
    terms = [PW]
    rep.add("pw_ricci", normalized_residual(signed_trace(PW, eps, axes=(0, 3)), 0.0, terms), tol, pt)
    rep.add("pw_ricci_23", normalized_residual(signed_trace(PW, eps, axes=(1, 2)), 0.0, terms), tol, pt)
    rep.add(
        "pw_rho", normalized_residual(signed_trace(PW, eps, axes=(2, 3), twist=I), 0.0, terms), tol, pt
    )
    rep.add(
        "pw_rho_01", normalized_residual(signed_trace(PW, eps, axes=(0, 1), twist=I), 0.0, terms), tol, pt
    )
    rep.add(
        "pw_ricci_twisted",
        normalized_residual(signed_trace(PW, eps, axes=(0, 3), twist=I), 0.0, terms),
        tol,
        pt,
    )
    if ev.n == 1:
        rep.add("pw_vanishes_n1", normalized_residual(PW, 0.0), 1e-10, pt)
    else:
        PWII = on_slot(on_slot(PW, I, 0), I, 1)
        rep.add("pw_I_antiinvariant", normalized_residual(PW + PWII, 0.0, terms), tol, pt)
    return rep


def pinv_residual(curv: CurvatureData, inv: InvariantTensors, ev: StructureEval) -> float:
    """The redundant expression of ``PW - PW(I., I., ., .)`` in terms of ``R``, ``rho``, ``Scal``."""
    N, n, I, eps = ev.N, ev.n, ev.I, ev.eps
    g = np.diag(eps)
    om = ev.omega[:N, :N]
    PW = inv.PW
    k = PW.order
    Rh = _h(curv.R, N).truncate(k)
    rho = _h(curv.rho, N).truncate(k)
    scal = curv.scal.truncate(k)
    rhoI = on_slot(rho, I, 1)
    c1 = 1.0 / (2.0 * (n + 1) * (n + 2))
    omom = (
        np.einsum("xz,yv->xyzv", om, om)
        - np.einsum("yz,xv->xyzv", om, om)
        + 2.0 * np.einsum("xy,zv->xyzv", om, om)
    )
    gg = np.einsum("xz,yv->xyzv", g, g) - np.einsum("yz,xv->xyzv", g, g)
    rhs = (
        Rh
        - on_slot(on_slot(Rh, I, 0), I, 1)
        + jeinsum("xyzv,->xyzv", c1 * (omom - gg), scal)
        + (2.0 / (n + 2)) * (jeinsum("xy,zv->xyzv", om, rho) + jeinsum("zv,xy->xyzv", om, rho))
        + (1.0 / (n + 2))
        * (
            jeinsum("xz,yv->xyzv", g, rhoI)
            - jeinsum("yz,xv->xyzv", g, rhoI)
            + jeinsum("yv,xz->xyzv", g, rhoI)
            - jeinsum("xv,yz->xyzv", g, rhoI)
        )
        + (1.0 / (n + 2))
        * (
            jeinsum("xz,yv->xyzv", om, rho)
            - jeinsum("yz,xv->xyzv", om, rho)
            + jeinsum("yv,xz->xyzv", om, rho)
            - jeinsum("xv,yz->xyzv", om, rho)
        )
    )
    lhs = PW - on_slot(on_slot(PW, I, 0), I, 1)
    return normalized_residual(lhs, rhs, [Rh])


def integrability_residuals(inv: InvariantTensors, curv: CurvatureData, conn: Connection, ev: StructureEval, tol=1e-7):
    """Integrability conditions of the flattening system and their consequences.

    Conditions needing more jet order than available are left out.
    """
    rep = ResidualReport("integrability")
    N, n, I, eps, pt = ev.N, ev.n, ev.I, ev.eps, ev.point
    g = np.diag(eps)
    om = ev.omega[:N, :N]
    L = inv.L
    k = L.order
    tau = conn.tau.truncate(k)
    r = _h(curv.r, N)
    rho = _h(curv.rho, N)
    trL = inv.trL
    LII = on_slot(on_slot(L, I, 0), I, 1)

    rep.add(
        "rl0",
        normalized_residual(r, (2 * n + 1) * L - 3.0 * LII + jeinsum("xy,->xy", g, trL), [L]),
        tol,
        pt,
    )
    rep.add(
        "rl1",
        normalized_residual(
            rho, (n + 2) * (on_slot(L, I, 1) - on_slot(L, I, 0)) - jeinsum("xy,->xy", om, trL), [L]
        ),
        tol,
        pt,
    )
    rep.add("tl", normalized_residual(2.0 * on_slot(tau, I, 0), -L - LII, [L]), tol, pt)
    if n == 1:
        rep.add(
            "3l",
            normalized_residual(L, jeinsum("xy,->xy", g, curv.scal) / 16.0 - on_slot(tau, I, 1), [L]),
            tol,
            pt,
        )

    if k < 1 or inv.B_X_xi is None:
        return rep
    DL = covariant_derivative(L, conn, ev)  # [A, x, y]
    BX = inv.B_X_xi
    kb = BX.order
    DLh = DL[:N]
    omB = (
        jeinsum("zy,x->zxy", om, BX)
        - jeinsum("xy,z->zxy", om, BX)
        + 2.0 * jeinsum("zx,y->zxy", om, BX)
    )
    rep.add("inte", normalized_residual(DLh - DLh.transpose(1, 0, 2), omB, [DLh]), tol, pt)
    # consistency of the two expressions for B(., xi)
    dtrL = ev.frame_derivative(trL)[:N]
    lhs = dtrL - signed_trace(DLh, eps, axes=(0, 1))
    rep.add("bes", normalized_residual(lhs, 3.0 * on_slot(BX, I, 0), [DLh]), tol, pt)

    if n == 1 and kb >= 1:
        # 2 (nabla_xi L)(X, Y) = -(nabla^2_{e_a I e_a} L)(X, Y) - Scal tau(X, Y)
        D2L = covariant_derivative(DL, conn, ev)
        kk = D2L.order
        t = signed_trace(D2L[:N, :N], eps, axes=(0, 1), twist=I)
        rhs = -t - curv.scal.truncate(kk) * tau.truncate(kk)
        rep.add("3xi", normalized_residual(2.0 * DL.truncate(kk)[N], rhs, [t]), tol, pt)

    if inv.B_xi_xi is None:
        return rep
    DB = covariant_derivative(BX, conn, ev)  # [A, x]
    kk = DB.order
    Bxx = inv.B_xi_xi.truncate(kk)
    Lk = L.truncate(kk)
    LIL = _LIL(Lk, eps, I)  # [x, z] = L(X, I L(Z))
    DBh = DB[:N]
    lhs = DBh - DBh.transpose() + LIL - LIL.transpose()
    rep.add("inte1", normalized_residual(lhs, 2.0 * jeinsum("zx,->zx", om, Bxx), [DBh, LIL]), tol, pt)

    tk = tau.truncate(kk)
    # tau(X, L(Y)) = sum_b eps_b L(Y, e_b) tau(X, e_b)
    tL = jeinsum("yb,b,xb->xy", Lk, eps, tk)
    lhs = DBh - DL.truncate(kk)[N]
    rhs = LIL.transpose() + tL + tL.transpose() + jeinsum("xy,->xy", om, Bxx)
    rep.add("intexih11", normalized_residual(lhs, rhs, [DBh, LIL]), tol, pt)
    diff = lhs - rhs
    rep.add(
        "intexih11_sym",
        normalized_residual(diff + diff.transpose(), 0.0, [DBh, LIL]),
        tol,
        pt,
    )

    if inv.B_xi_xi.order >= 1:
        dBxx = ev.frame_derivative(inv.B_xi_xi)
        k3 = dBxx.order
        BXk = BX.truncate(k3)
        LI = on_slot(L.truncate(k3), I, 1)
        lhs = (
            DB.truncate(k3)[N]
            - dBxx[:N]
            - 2.0 * jeinsum("a,a,xa->x", BXk, eps, LI)
            + jeinsum("xa,a,a->x", tau.truncate(k3), eps, BXk)
        )
        rep.add("intehxi312", normalized_residual(lhs, 0.0, [DB.truncate(k3), dBxx]), tol, pt)
    return rep

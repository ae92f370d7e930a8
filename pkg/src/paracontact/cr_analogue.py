"""The CR counterpart: Tanaka-Webster connection, ``F^car`` and the Sasakian corollary.

CR structures use the same frame machinery with ``J^2 = -1``, a positive
definite Levi form, ``d theta(X, Y) = 2 g(JX, Y)`` and ``theta(zeta) = 1``.
The Webster connection is the solution of the common axiom system in this
mode; its torsion endomorphism ``A`` plays the part of ``tau``.
"""

from __future__ import annotations

import numpy as np

from .connection import Connection, covariant_derivative, solve_connection, verify_axioms
from .curvature import curvature_tensor, f_tensor
from .errors import ModeError
from .jets import Jet, jeinsum
from .report import ResidualReport, normalized_residual
from .structures import CR, StructureEval, StructureSpec, check_compatibility, evaluate
from .tensors import on_slot, values

__all__ = [
    "webster_connection",
    "webster_residuals",
    "f_car_tensor",
    "levi_civita",
    "riemannian_scalar",
    "sasakian_residuals",
]


def _require_cr(spec: StructureSpec):
    if spec.mode != CR:
        raise ModeError(f"{spec.name or 'structure'} is not a CR structure")


def webster_connection(spec: StructureSpec, point, order: int = 4) -> tuple[Connection, StructureEval]:
    """The Tanaka-Webster connection at ``point`` and the evaluation it was solved on."""
    _require_cr(spec)
    ev = evaluate(spec, point, order)
    return solve_connection(ev), ev


def webster_residuals(spec: StructureSpec, point, order: int = 4, tol: float = 1e-9) -> ResidualReport:
    """Compatibility and Webster-axiom residuals, plus the torsion ``|A|``."""
    conn, ev = webster_connection(spec, point, order)
    rep = ResidualReport("webster")
    rep.extend(check_compatibility(ev, tol), prefix="compat.")
    rep.extend(verify_axioms(conn, ev, tol), prefix="axioms.")
    return rep


def f_car_tensor(spec: StructureSpec, point, order: int = 5) -> Jet:
    """``F^car`` of a three-dimensional CR structure."""
    _require_cr(spec)
    if spec.n != 1:
        raise ModeError("F^car is defined only in dimension three")
    conn, ev = webster_connection(spec, point, order)
    return f_tensor(curvature_tensor(conn, ev), conn, ev, cr=True)


def levi_civita(ev: StructureEval) -> Connection:
    """Levi-Civita connection of ``g + theta^2`` in the frame, via the Koszul formula.

    The result has only ``gamma_full`` filled, which is all that
    ``covariant_derivative`` and ``curvature_tensor`` use.
    """
    G = np.diag(ev.G)
    c = ev.c
    cl = jeinsum("ABC,C->ABC", c, G)  # g([E_A, E_B], E_C)
    low = 0.5 * (cl - cl.transpose(2, 0, 1) + cl.transpose(1, 2, 0))
    full = jeinsum("ABC,C->ABC", low, G)
    return Connection(full, full, None, None, "riemannian", 0, 0.0)


def riemannian_scalar(ev: StructureEval, lc: Connection | None = None) -> Jet:
    """Scalar curvature of the Riemannian metric ``g + theta^2``."""
    lc = lc if lc is not None else levi_civita(ev)
    R = curvature_tensor(lc, ev).R  # g(R(E_A, E_B) E_C, E_D)
    G = np.diag(ev.G)
    ric = jeinsum("ABCA,A->BC", R, G)
    return jeinsum("BB,B->", ric, G)


def _hessian_twist_sym(S: Jet, conn: Connection, ev: StructureEval) -> Jet:
    """``H(X, JY) + H(Y, JX)`` on ``H`` for ``H = nabla d S``."""
    N = ev.N
    dS = ev.frame_derivative(S)
    H = covariant_derivative(dS, conn, ev)[:N, :N]
    HJ = on_slot(H, ev.I, 1)
    return HJ + HJ.transpose()


def sasakian_residuals(spec: StructureSpec, point, order: int = 5, tol: float = 1e-9) -> ResidualReport:
    """The Sasakian corollary on one example.

    Checks ``A = 0``, ``zeta(Scal^cr) = 0``, ``nabla^cr_X Y = nabla^g_X Y + g(JX, Y) zeta``,
    ``2 s = Scal^g + 2n`` and that ``F^car`` agrees with the Riemannian expression
    ``(nabla^g d Scal^g)(X, JY) + (nabla^g d Scal^g)(Y, JX)``.  Here ``s`` is the
    pseudohermitian scalar curvature normalized as a sum over a complex frame,
    ``s = r(e_a, e_a) / 2``; with ``Scal^cr = r(e_a, e_a)`` the relation reads
    ``Scal^cr = Scal^g + 2n``.
    """
    _require_cr(spec)
    conn, ev = webster_connection(spec, point, order)
    rep = ResidualReport("sasakian")
    pt = ev.point
    N, n = ev.N, ev.n
    rep.add("torsion_A", normalized_residual(conn.tau), tol, pt)
    curv = curvature_tensor(conn, ev)
    dS = ev.frame_derivative(curv.scal)
    rep.add("zeta_scal", normalized_residual(dS[N], 0.0, [dS]), tol, pt)

    lc = levi_civita(ev)
    Gw = values(conn.gamma_full)
    Gl = values(lc.gamma_full)
    pred = Gl[:N, :N, :].copy()
    pred[:, :, N] += ev.omega[:N, :N]  # + g(J e_a, e_b) zeta
    rep.add("connection_relation", normalized_residual(Gw[:N, :N, :], pred), tol, pt)

    scal_g = riemannian_scalar(ev, lc)
    rep.add("scal_relation", normalized_residual(curv.scal, scal_g + 2.0 * n), tol, pt)

    if n == 1:
        F = f_tensor(curv, conn, ev, cr=True)
        Sg = _hessian_twist_sym(scal_g, lc, ev)
        k = min(F.order, Sg.order)
        rep.add("fcar_vs_scalg", normalized_residual(F.truncate(k), Sg.truncate(k), [F, Sg]), tol, pt)
        rep.add("fcar_symmetric", normalized_residual(F, F.transpose()), tol, pt)
    return rep

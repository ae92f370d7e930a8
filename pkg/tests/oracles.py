"""Reference computations independent of the jet machinery."""

import numpy as np

from paracontact.connection import solve_connection
from paracontact.structures import evaluate
from paracontact.tensors import values


class FrameJump(ValueError):
    """The chart's adapted frame changes branch inside the stencil."""


def fd_curvature(spec, p, h=1e-4):
    """``g(R(E_A, E_B) E_c, E_d)`` from connection values at nearby points.

    Derivatives of the connection coefficients come from central differences
    in the chart, everything else from plain loops.
    """
    ev = evaluate(spec, p, 1)
    G = values(solve_connection(ev).gamma_full)
    frame = values(ev.frame)
    c = values(ev.c)
    D = G.shape[0]
    dG = np.zeros((spec.dim,) + G.shape)
    for i in range(spec.dim):
        e = np.zeros(spec.dim)
        e[i] = h
        evp, evm = evaluate(spec, p + e, 1), evaluate(spec, p - e, 1)
        for other in (evp, evm):
            if np.abs(values(other.frame) - frame).max() > 100 * h:
                raise FrameJump(f"adapted frame is discontinuous near {p}")
        gp = values(solve_connection(evp).gamma_full)
        gm = values(solve_connection(evm).gamma_full)
        dG[i] = (gp - gm) / (2 * h)
    EG = np.einsum("Ai,iBcd->ABcd", frame, dG)
    R = np.zeros((D, D, D, D))
    for A in range(D):
        for B in range(D):
            for cc in range(D):
                for d in range(D):
                    v = EG[A, B, cc, d] - EG[B, A, cc, d]
                    for e_ in range(D):
                        v += G[B, cc, e_] * G[A, e_, d] - G[A, cc, e_] * G[B, e_, d]
                        v -= c[A, B, e_] * G[e_, cc, d]
                    R[A, B, cc, d] = v * ev.G[d, d]
    N = ev.N
    eps = ev.eps
    ric = sum(eps[a] * R[a, :, :, a] for a in range(N))
    scal = sum(eps[a] * ric[a, a] for a in range(N))
    return R, scal


def fd_scalar(spec, rng, radius=0.4, tries=20):
    """Oracle scalar curvature at the first sampled point with a smooth frame."""
    for _ in range(tries):
        try:
            return fd_curvature(spec, rng.uniform(-radius, radius, spec.dim))[1]
        except FrameJump:
            continue
    raise FrameJump("no smooth stencil found")

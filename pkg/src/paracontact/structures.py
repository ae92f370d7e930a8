"""Paracontact (and CR) hermitian structures given by frame data.

A structure is described by an adapted frame ``e_1..e_2n, xi`` written in the
coordinates of one chart, together with the contact form.  The metric is the
one making the frame orthonormal with signs ``eps_a``, and the endomorphism
``I`` acts by the pairing ``I e_s = e_{n+s}``, ``I e_{n+s} = s e_s``, with
``s = +1`` (paracontact) or ``s = -1`` (CR).  In both modes

    d eta(X, Y) = 2 g(IX, Y),   eta(xi) = g(xi, xi) = eps_xi,

where ``eps_xi = -1`` for paracontact and ``+1`` for CR structures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArityError, ChartDomain, FrameDegenerate, SingularSystem
from .jets import Jet, coordinates, jeinsum, jet_linear_solve, stack
from .polynomials import parse_function
from .report import ResidualReport, normalized_residual
from .tensors import signed_trace, slot_matrix, values

__all__ = [
    "PARACONTACT",
    "CR",
    "StructureSpec",
    "StructureEval",
    "evaluate",
    "check_compatibility",
    "signed_trace",
    "standard_pairing",
    "default_signs",
    "polynomial_spec",
    "load_spec",
]

PARACONTACT = "paracontact"
CR = "cr"
DEFAULT_ORDER = 4


def mode_sign(mode: str) -> int:
    if mode == PARACONTACT:
        return 1
    if mode == CR:
        return -1
    raise ValueError(f"unknown mode {mode!r}")


def default_signs(n: int, mode: str) -> tuple:
    if mode == PARACONTACT:
        return (1.0,) * n + (-1.0,) * n
    return (1.0,) * (2 * n)


def standard_pairing(n: int, mode: str) -> np.ndarray:
    """Matrix of ``I`` on ``e_1..e_2n``; column ``a`` holds the components of ``I e_a``."""
    s = mode_sign(mode)
    M = np.zeros((2 * n, 2 * n))
    for k in range(n):
        M[n + k, k] = 1.0
        M[k, n + k] = s
    return M


@dataclass(frozen=True)
class StructureSpec:
    """Frame data of a paracontact or CR hermitian structure on one chart.

    ``frame_fn(point, order)`` returns a jet of shape ``(2n+1, m)`` whose row
    ``A`` lists the coordinate components of ``E_A`` (``e_1..e_2n`` then
    ``xi``); ``eta_fn(point, order)`` returns the contact form components as a
    jet of shape ``(m,)``.
    """

    n: int
    mode: str
    frame_fn: Callable
    eta_fn: Callable
    coordinates: tuple = ()
    signs: tuple | None = None
    pairing: tuple | None = None
    domain_fn: Callable | None = None
    name: str = ""
    payload: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        mode_sign(self.mode)
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.signs is None:
            object.__setattr__(self, "signs", default_signs(self.n, self.mode))
        if len(self.signs) != 2 * self.n:
            raise ArityError(f"expected {2 * self.n} metric signs, got {len(self.signs)}")
        object.__setattr__(self, "signs", tuple(float(x) for x in self.signs))
        if self.pairing is None:
            P = standard_pairing(self.n, self.mode)
        else:
            P = np.asarray(self.pairing, dtype=float)
            if P.shape != (2 * self.n, 2 * self.n):
                raise ArityError("pairing matrix must be 2n x 2n")
        object.__setattr__(self, "pairing", tuple(map(tuple, P)))
        if not self.coordinates:
            object.__setattr__(self, "coordinates", tuple(f"x{i}" for i in range(self.dim)))

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def s(self) -> int:
        return mode_sign(self.mode)

    @property
    def reeb_sign(self) -> float:
        return -1.0 if self.mode == PARACONTACT else 1.0

    @property
    def eps(self) -> np.ndarray:
        return np.array(self.signs)

    @property
    def I(self) -> np.ndarray:
        return np.array(self.pairing)

    def in_domain(self, point) -> bool:
        return True if self.domain_fn is None else bool(self.domain_fn(np.asarray(point, float)))

    def to_json(self) -> str:
        if self.payload is None:
            raise ValueError(f"structure {self.name or '<anonymous>'} has no polynomial form")
        return json.dumps(self.payload, indent=2, sort_keys=True)


def polynomial_spec(data: dict, name: str = "") -> StructureSpec:
    """Structure from the JSON form ``{n, mode, coordinates, frame, eta, signs}``."""
    n = int(data["n"])
    mode = data.get("mode", PARACONTACT)
    m = 2 * n + 1
    coords = tuple(data.get("coordinates") or [f"x{i}" for i in range(m)])
    if len(coords) != m:
        raise ArityError(f"expected {m} coordinates, got {len(coords)}")
    frame = [[parse_function(f, m) for f in row] for row in data["frame"]]
    if len(frame) != m or any(len(row) != m for row in frame):
        raise ArityError("frame must list 2n+1 vector fields with 2n+1 components each")
    eta = [parse_function(f, m) for f in data["eta"]]
    if len(eta) != m:
        raise ArityError("eta must have 2n+1 components")

    def frame_fn(point, order):
        X = coordinates(point, order)
        return stack([stack([f(X) for f in row]) for row in frame])

    def eta_fn(point, order):
        X = coordinates(point, order)
        return stack([f(X) for f in eta])

    return StructureSpec(
        n=n,
        mode=mode,
        frame_fn=frame_fn,
        eta_fn=eta_fn,
        coordinates=coords,
        signs=tuple(data["signs"]) if data.get("signs") is not None else None,
        pairing=tuple(map(tuple, data["pairing"])) if data.get("pairing") is not None else None,
        name=name or data.get("name", ""),
        payload=dict(data),
    )


def load_spec(path) -> StructureSpec:
    with open(path) as fh:
        return polynomial_spec(json.load(fh))


class StructureEval:
    """Jet data of a structure at one point.

    Attributes
    ----------
    frame : Jet (2n+1, m), order K
    eta : Jet (m,), order K
    c : Jet (2n+1, 2n+1, 2n+1), order K-1, with ``[E_A, E_B] = c[A, B, C] E_C``
    G, Ifull, omega : constant (2n+1, 2n+1) matrices of g, I and omega in the frame
    """

    def __init__(self, spec: StructureSpec, point, order: int):
        self.spec = spec
        self.point = np.asarray(point, dtype=float)
        self.order = order
        self.n = spec.n
        self.N = 2 * spec.n
        self.s = spec.s
        self.eps = spec.eps
        self.reeb_sign = spec.reeb_sign
        self.I = spec.I
        N = self.N
        self.G = np.diag(np.append(self.eps, self.reeb_sign))
        self.Ifull = slot_matrix(self.I, N + 1)
        # omega(X, Y) = g(IX, Y)
        self.omega = self.Ifull.T @ self.G
        self.g_h = slot_matrix(np.diag(self.eps), N + 1)

        if not spec.in_domain(self.point):
            raise ChartDomain(f"point {self.point.tolist()} lies outside the chart of {spec.name}")
        F = spec.frame_fn(self.point, order)
        if F.shape != (N + 1, self.point.size):
            raise ArityError(f"frame has shape {F.shape}, expected {(N + 1, self.point.size)}")
        self.frame = F
        self.eta = spec.eta_fn(self.point, order)

        if order < 1:
            raise FrameDegenerate("structure functions need jet order at least 1")
        Fl = F.truncate(order - 1)
        dF = F.gradient()  # (m, A, i), order K-1
        # [E_A, E_B]^i = E_A(F_B^i) - E_B(F_A^i)
        EdF = jeinsum("Aj,jBi->ABi", Fl, dF)
        self.brackets = EdF - EdF.transpose(1, 0, 2)
        m = self.point.size
        try:
            sol = jet_linear_solve(Fl.transpose(), self.brackets.reshape(N + 1, N + 1, m).transpose(2, 0, 1).reshape(m, -1))
        except SingularSystem as exc:
            raise FrameDegenerate(
                f"frame matrix is not invertible at {self.point.tolist()}"
            ) from exc
        self.c = sol.reshape(N + 1, N + 1, N + 1).transpose(1, 2, 0)

    # -- derived objects ------------------------------------------------------

    def frame_derivative(self, f: Jet) -> Jet:
        """``E_A(f)`` for every frame vector, prepended as a new first axis."""
        grad = f.gradient()
        F = self.frame.truncate(grad.order)
        return jeinsum("Ai,i...->A...", F, grad)

    def eta_frame(self) -> Jet:
        """``eta(E_A)``."""
        return jeinsum("Ai,i->A", self.frame, self.eta)

    def d_eta(self) -> Jet:
        """``d eta(E_A, E_B)`` from the coordinate exterior derivative, order K-1."""
        de = self.eta.gradient()  # (i, j) = d_i eta_j
        de = de - de.transpose()
        F = self.frame.truncate(de.order)
        tmp = jeinsum("Ai,ij->Aj", F, de)
        return jeinsum("Aj,Bj->AB", tmp, F)

    def signed_trace(self, T, axes=(0, 1), twist=None):
        return signed_trace(T, self.eps, axes, twist)


def evaluate(spec: StructureSpec, point, order: int = DEFAULT_ORDER) -> StructureEval:
    """All pointwise jet data of ``spec`` at ``point``."""
    return StructureEval(spec, point, order)


def check_compatibility(ev: StructureEval, tol: float = 1e-9) -> ResidualReport:
    """Residuals of the compatibility and integrability axioms at the point."""
    rep = ResidualReport("compat")
    N, s, I = ev.N, ev.s, ev.I
    eps = ev.eps
    h = slice(0, N)
    pt = ev.point

    rep.add("I_squared", normalized_residual(I @ I, s * np.eye(N)), tol, pt)
    g = np.diag(eps)
    rep.add("g_I_invariance", normalized_residual(I.T @ g @ I, -s * g), tol, pt)

    deta = values(ev.d_eta())
    two_omega = 2.0 * ev.omega
    rep.add("deta_omega", normalized_residual(deta[h, h], two_omega[h, h]), tol, pt)
    rep.add("deta_reeb", normalized_residual(deta[N, :], 0.0, [deta]), tol, pt)
    etaF = values(ev.eta_frame())
    rep.add("eta_reeb", normalized_residual(etaF[N], ev.reeb_sign), tol, pt)
    rep.add("eta_horizontal", normalized_residual(etaF[h], 0.0), tol, pt)

    c = values(ev.c)
    If = ev.Ifull
    # brackets of I-twisted frame vectors: [I e_a, e_b], [e_a, I e_b], [I e_a, I e_b]
    cIa = np.einsum("da,dbC->abC", If, c)
    caI = np.einsum("eb,aeC->abC", If, c)
    cII = np.einsum("da,eb,deC->abC", If, If, c)
    nij = cII + s * c - np.einsum("CD,abD->abC", If, cIa + caI)
    rep.add("nijenhuis", normalized_residual(nij[h, h, :], 0.0, [cII, c]), tol, pt)
    mixed = (cIa + caI)[h, h, N]
    rep.add("bracket_horizontal", normalized_residual(mixed, 0.0, [c]), tol, pt)
    return rep

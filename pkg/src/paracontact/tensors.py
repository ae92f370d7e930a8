"""Frame-component tensor helpers shared by the geometry modules.

Tensors are stored as jets (or plain arrays) whose batch axes are frame
slots.  A slot of length ``2n+1`` runs over ``e_1..e_2n, xi``; a slot of
length ``2n`` is horizontal only.  All contractions are signed, weighted by
``eps_a = g(e_a, e_a)``.
"""

from __future__ import annotations

import string

import numpy as np

from .errors import ArityError
from .jets import Jet, jeinsum

__all__ = ["on_slot", "signed_trace", "values", "max_abs", "slot_matrix"]

_LETTERS = string.ascii_lowercase


def _ndim(T):
    return T.ndim


def _einsum(sub, *ops):
    if any(isinstance(o, Jet) for o in ops):
        return jeinsum(sub, *ops)
    return np.einsum(sub, *ops)


def slot_matrix(M, size):
    """Pad a ``2n x 2n`` matrix with a zero xi row/column when ``size = 2n+1``."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] == size:
        return M
    if M.shape[0] + 1 == size:
        out = np.zeros((size, size))
        out[: M.shape[0], : M.shape[0]] = M
        return out
    raise ArityError(f"matrix of size {M.shape[0]} does not fit a slot of size {size}")


def on_slot(T, M, slot: int):
    """Evaluate ``T`` with slot ``slot`` fed through the linear map ``M``.

    ``M[d, x]`` is the ``d``-th component of the image of ``e_x``, so the result
    is ``T(..., M e_x, ...) = sum_d M[d, x] T[..., d, ...]``.
    """
    nd = _ndim(T)
    M = slot_matrix(M, T.shape[slot])
    idx = list(_LETTERS[:nd])
    src = idx.copy()
    src[slot] = "z"
    out = idx
    return _einsum(f"{''.join(src)},z{idx[slot]}->{''.join(out)}", T, M)


def signed_trace(T, signs, axes=(0, 1), twist=None):
    """Signed contraction ``sum_a eps_a T(.., e_a, .., e_a, ..)`` over two slots.

    With ``twist`` (a ``2n x 2n`` matrix, usually ``I``) the second slot receives
    the image of ``e_a`` instead, giving ``sum_a eps_a T(.., e_a, .., I e_a, ..)``.
    Slot sizes may be ``2n`` or ``2n+1``; the xi slot never contributes.
    """
    signs = np.asarray(signs, dtype=float)
    nd = _ndim(T)
    if nd < 2:
        raise ArityError("signed_trace needs a tensor with at least two slots")
    i, j = (a % nd for a in axes)
    if i == j:
        raise ArityError("signed_trace needs two distinct slots")
    size = T.shape[i]
    if T.shape[j] != size or size not in (signs.size, signs.size + 1):
        raise ArityError(
            f"slots of size {T.shape[i]} and {T.shape[j]} do not match {signs.size} signs"
        )
    W = np.diag(signs)
    if twist is not None:
        W = W @ np.asarray(twist, dtype=float).T
    W = slot_matrix(W, size)
    idx = list(_LETTERS[:nd])
    idx[j] = "z"
    src = "".join(idx)
    out = "".join(c for k, c in enumerate(idx) if k not in (i, j))
    return _einsum(f"{src},{idx[i]}z->{out}", T, W)


def values(T):
    """Base-point values of a jet tensor (arrays pass through)."""
    if isinstance(T, Jet):
        return np.asarray(T.coeffs[0])
    return np.asarray(T, dtype=float)


def max_abs(*items) -> float:
    """Largest base-point magnitude across tensors, jets and numbers."""
    m = 0.0
    for it in items:
        v = values(it)
        if v.size:
            m = max(m, float(np.max(np.abs(v))))
    return m

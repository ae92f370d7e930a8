"""Truncated multivariate Taylor expansions (jets) at a point.

A :class:`Jet` stores the Taylor coefficients of a scalar (or of an array of
scalars) up to a fixed total degree.  Coefficients live on the *first* axis,
in graded lexicographic order of the multi-indices, so that truncating to a
lower order is a prefix slice.  Any further axes are batch axes and follow
the usual numpy broadcasting rules, which lets tensor components be handled
as one object.

Arithmetic is exact through the retained order: the result of every
operation is the Taylor expansion of the pointwise operation, truncated.
"""

from __future__ import annotations

import functools
import itertools
import math
import numbers
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (
    DegenerateJet,
    DomainError,
    JetMismatch,
    OrderExhausted,
    SingularSystem,
)

__all__ = [
    "JetSpace",
    "jet_space",
    "Jet",
    "coordinates",
    "jeinsum",
    "stack",
    "jet_arith",
    "jet_analytic",
    "jet_linear_solve",
    "jet_lstsq",
    "common_order",
]

#: Constant-term condition number above which a jet system counts as singular.
SINGULAR_CONDITION = 1e13


class JetSpace:
    """Index tables for jets in ``num_vars`` variables truncated at ``order``.

    Instances are cached; obtain them through :func:`jet_space`.
    """

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        if order < 0:
            raise ValueError("order must be non-negative")
        self.num_vars = num_vars
        self.order = order

        exps = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(num_vars), deg):
                e = [0] * num_vars
                for i in combo:
                    e[i] += 1
                exps.append(tuple(e))
        self.exponents = np.array(exps, dtype=int).reshape(len(exps), num_vars)
        self.degrees = self.exponents.sum(axis=1)
        self.size = len(exps)
        self._index = {e: k for k, e in enumerate(exps)}
        # Taylor coefficient of x^alpha times alpha! gives the partial derivative.
        self.factorials = np.array(
            [math.prod(math.factorial(a) for a in e) for e in exps], dtype=float
        )

        left, right, target = [], [], []
        for i, ei in enumerate(exps):
            di = self.degrees[i]
            for j, ej in enumerate(exps):
                if di + self.degrees[j] > order:
                    continue
                left.append(i)
                right.append(j)
                target.append(self._index[tuple(a + b for a, b in zip(ei, ej))])
        self.left = np.array(left, dtype=int)
        self.right = np.array(right, dtype=int)
        npairs = len(left)
        self.scatter = scipy.sparse.csr_matrix(
            (np.ones(npairs), (np.array(target, dtype=int), np.arange(npairs))),
            shape=(self.size, npairs),
        )

    def __repr__(self):
        return f"JetSpace(num_vars={self.num_vars}, order={self.order})"

    def index(self, alpha) -> int:
        return self._index[tuple(int(a) for a in alpha)]

    @functools.cached_property
    def _derivative_tables(self):
        # For each variable: source index in this space and multiplier, per
        # monomial of the space one order lower.
        if self.order == 0:
            return None
        lower = jet_space(self.num_vars, self.order - 1)
        tables = []
        for var in range(self.num_vars):
            src = np.empty(lower.size, dtype=int)
            fac = np.empty(lower.size)
            for k, e in enumerate(lower.exponents):
                up = list(e)
                up[var] += 1
                src[k] = self._index[tuple(up)]
                fac[k] = up[var]
            tables.append((src, fac))
        return lower, tables


@functools.lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int) -> JetSpace:
    return JetSpace(num_vars, order)


def _is_integer(r) -> bool:
    return float(r).is_integer()


class Jet:
    """Truncated Taylor expansion of a scalar or array-valued function.

    ``coeffs`` has shape ``(space.size, *shape)``.  Jets combine with other
    jets of the same space and with numbers / numpy arrays (treated as
    constants broadcast against the batch shape).
    """

    __slots__ = ("space", "coeffs")
    __array_priority__ = 1000

    def __init__(self, space: JetSpace, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[0] != space.size:
            raise JetMismatch(
                f"coefficient array of shape {coeffs.shape} does not fit {space!r}"
            )
        self.space = space
        self.coeffs = coeffs

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, space: JetSpace, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((space.size,) + value.shape)
        c[0] = value
        return cls(space, c)

    @classmethod
    def zeros(cls, space: JetSpace, shape=()) -> "Jet":
        return cls(space, np.zeros((space.size,) + tuple(shape)))

    @classmethod
    def variable(cls, space: JetSpace, var: int, value: float = 0.0) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        if space.order >= 1:
            e = [0] * space.num_vars
            e[var] = 1
            c[space.index(e)] = 1.0
        return cls(space, c)

    # -- basic properties ---------------------------------------------------

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def num_vars(self) -> int:
        return self.space.num_vars

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self):
        """Value at the base point (the constant Taylor coefficient)."""
        v = self.coeffs[0]
        return float(v) if v.ndim == 0 else v.copy()

    def __repr__(self):
        return f"Jet(num_vars={self.num_vars}, order={self.order}, shape={self.shape})"

    def __len__(self):
        if not self.shape:
            raise TypeError("len() of a scalar jet")
        return self.shape[0]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return Jet(self.space, self.coeffs[(slice(None),) + key])

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.space, self.coeffs.reshape((self.space.size,) + tuple(shape)))

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.space, self.coeffs.transpose((0,) + tuple(a + 1 for a in axes)))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % self.ndim + 1 for a in axis)
        return Jet(self.space, self.coeffs.sum(axis=axis))

    def copy(self) -> "Jet":
        return Jet(self.space, self.coeffs.copy())

    def max_abs(self) -> float:
        """Largest coefficient magnitude over every entry and every degree."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    # -- order handling ---------------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExhausted(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        sp = jet_space(self.num_vars, order)
        return Jet(sp, self.coeffs[: sp.size])

    def derivative(self, var: int) -> "Jet":
        """Partial derivative along coordinate ``var``; the order drops by one."""
        if self.order == 0:
            raise OrderExhausted("derivative of an order-0 jet")
        lower, tables = self.space._derivative_tables
        src, fac = tables[var]
        fac = fac.reshape((-1,) + (1,) * self.ndim)
        return Jet(lower, self.coeffs[src] * fac)

    def gradient(self) -> "Jet":
        """All first partials, stacked on a new leading batch axis."""
        return stack([self.derivative(i) for i in range(self.num_vars)], axis=0)

    def partial(self, alpha):
        """Value at the base point of the partial derivative with multi-index ``alpha``."""
        k = self.space.index(alpha)
        v = self.coeffs[k] * self.space.factorials[k]
        return float(v) if np.ndim(v) == 0 else v

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Jet"):
        if other.space is not self.space:
            raise JetMismatch(
                f"cannot combine jets from {self.space!r} and {other.space!r}"
            )

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            a, b = _align(self.coeffs, other.coeffs)
            return Jet(self.space, a + b)
        other = np.asarray(other, dtype=float)
        if other.ndim > self.ndim:
            c = np.broadcast_to(self.coeffs, (self.space.size,) + np.broadcast_shapes(self.shape, other.shape)).copy()
        else:
            c = self.coeffs.copy()
        c[0] = c[0] + other
        return Jet(self.space, c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return _mul(self, other)
        other = np.asarray(other, dtype=float)
        return Jet(self.space, self.coeffs * other[None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        return Jet(self.space, self.coeffs / other[None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, r):
        return self.pow(r)

    # -- analytic functions ------------------------------------------------

    def _nilpotent(self):
        c = self.coeffs.copy()
        c[0] = 0.0
        return Jet(self.space, c)

    def _horner(self, h: "Jet", coeffs) -> "Jet":
        # sum_k coeffs[k] h^k, exact since h^(order+1) = 0
        coeffs = list(coeffs)
        out = Jet.constant(self.space, np.full(h.shape, coeffs[-1], dtype=float))
        for c in reversed(coeffs[:-1]):
            out = h * out + c
        return out

    def exp(self) -> "Jet":
        h = self._nilpotent()
        series = [1.0 / math.factorial(k) for k in range(self.order + 1)]
        return self._horner(h, series) * np.exp(self.coeffs[0])

    def reciprocal(self) -> "Jet":
        return self.pow(-1)

    def sqrt(self) -> "Jet":
        return self.pow(Fraction(1, 2))

    def pow(self, r) -> "Jet":
        """``self ** r`` for a real (rational or integer) exponent."""
        a0 = self.coeffs[0]
        if _is_integer(r):
            r = int(r)
            if r >= 0:
                return _int_power(self, r)
            if np.any(a0 == 0.0):
                raise DegenerateJet("negative power of a jet with zero constant term")
        else:
            if np.any(a0 <= 0.0):
                raise DomainError(
                    f"fractional power {r} of a jet with non-positive constant term"
                )
        rf = float(r)
        h = self._nilpotent() / a0
        series = [1.0]
        for k in range(1, self.order + 1):
            series.append(series[-1] * (rf - k + 1) / k)
        return self._horner(h, series) * np.power(a0, rf)


def _align(a, b):
    # pad batch axes so numpy broadcasting applies to batch shapes only
    if a.ndim < b.ndim:
        a = a.reshape(a.shape[:1] + (1,) * (b.ndim - a.ndim) + a.shape[1:])
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape[:1] + (1,) * (a.ndim - b.ndim) + b.shape[1:])
    return a, b


def _mul(a: Jet, b: Jet) -> Jet:
    sp = a.space
    left, right = _align(a.coeffs[sp.left], b.coeffs[sp.right])
    prod = left * right
    shape = prod.shape[1:]
    out = sp.scatter @ prod.reshape(prod.shape[0], -1)
    return Jet(sp, np.asarray(out).reshape((sp.size,) + shape))


def _int_power(a: Jet, r: int) -> Jet:
    result = Jet.constant(a.space, np.ones(a.shape))
    base = a
    while r:
        if r & 1:
            result = result * base
        r >>= 1
        if r:
            base = base * base
    return result


# -- module-level helpers --------------------------------------------------


def coordinates(point, order: int):
    """Coordinate jets ``x_i = p_i + dx_i`` at ``point``."""
    point = np.asarray(point, dtype=float)
    sp = jet_space(point.size, order)
    return [Jet.variable(sp, i, point[i]) for i in range(point.size)]


def common_order(*jets) -> int:
    return min(j.order for j in jets)


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    sp = jets[0].space
    for j in jets[1:]:
        if j.space is not sp:
            raise JetMismatch("cannot stack jets from different spaces")
    nd = jets[0].ndim
    axis = axis % (nd + 1)
    return Jet(sp, np.stack([j.coeffs for j in jets], axis=axis + 1))


def jeinsum(subscripts: str, *operands):
    """``numpy.einsum`` over jets and constant arrays (at most two jets)."""
    inputs, output = subscripts.replace(" ", "").split("->")
    terms = inputs.split(",")
    if len(terms) != len(operands):
        raise ValueError("subscripts do not match the number of operands")
    jet_pos = [k for k, op in enumerate(operands) if isinstance(op, Jet)]
    if not jet_pos:
        return np.einsum(subscripts, *operands)
    z = next(c for c in "ZYXWVUTSRQPONM" if c not in subscripts)
    sp = operands[jet_pos[0]].space
    for k in jet_pos[1:]:
        if operands[k].space is not sp:
            raise JetMismatch("jeinsum operands live in different jet spaces")
    if len(jet_pos) == 1:
        args, new_terms = [], []
        for k, (t, op) in enumerate(zip(terms, operands)):
            if k == jet_pos[0]:
                args.append(op.coeffs)
                new_terms.append(z + t)
            else:
                args.append(np.asarray(op, dtype=float))
                new_terms.append(t)
        out = np.einsum(",".join(new_terms) + "->" + z + output, *args, optimize=True)
        return Jet(sp, out)
    if len(jet_pos) == 2:
        i, j = jet_pos
        args, new_terms = [], []
        for k, (t, op) in enumerate(zip(terms, operands)):
            if k == i:
                args.append(op.coeffs[sp.left])
                new_terms.append(z + t)
            elif k == j:
                args.append(op.coeffs[sp.right])
                new_terms.append(z + t)
            else:
                args.append(np.asarray(op, dtype=float))
                new_terms.append(t)
        prod = np.einsum(",".join(new_terms) + "->" + z + output, *args, optimize=True)
        shape = prod.shape[1:]
        out = sp.scatter @ prod.reshape(prod.shape[0], -1)
        return Jet(sp, np.asarray(out).reshape((sp.size,) + shape))
    raise ValueError("jeinsum supports at most two jet operands")


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Pointwise ``add``/``sub``/``mul``/``div`` of two jets."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_analytic(a: Jet, f: str, r=None) -> Jet:
    """Apply ``exp`` or ``pow`` (with exponent ``r``) to a jet."""
    if f == "exp":
        return a.exp()
    if f == "pow":
        if r is None:
            raise ValueError("pow requires an exponent")
        return a.pow(r)
    raise ValueError(f"unknown analytic function {f!r}")


def jet_linear_solve(A, b: Jet) -> Jet:
    """Solve ``A x = b`` exactly through the retained order.

    ``A`` is an ``(N, N)`` jet (or constant array); ``b`` has shape ``(N,)`` or
    ``(N, k)``.  The constant-term matrix is factored once and higher-order
    corrections are back-substituted degree by degree.
    """
    if not isinstance(b, Jet):
        raise TypeError("right-hand side must be a jet")
    sp = b.space
    if isinstance(A, Jet):
        if A.space is not sp:
            raise JetMismatch("matrix and right-hand side live in different jet spaces")
        A0 = A.coeffs[0]
    else:
        A0 = np.asarray(A, dtype=float)
    if A0.ndim != 2 or A0.shape[0] != A0.shape[1] or A0.shape[0] != b.shape[0]:
        raise ValueError("jet_linear_solve needs a square matrix matching the right-hand side")
    cond = np.linalg.cond(A0)
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularSystem(f"constant-term matrix is singular (cond={cond:.3g})", cond)
    lu = scipy.linalg.lu_factor(A0)
    N = A0.shape[0]
    vector = b.ndim == 1

    def solve0(c):
        moved = np.moveaxis(c, 1, 0)
        sol = scipy.linalg.lu_solve(lu, moved.reshape(N, -1))
        return np.moveaxis(sol.reshape(moved.shape), 0, 1)

    x = Jet(sp, solve0(b.coeffs))
    if not isinstance(A, Jet) or sp.order == 0:
        return x
    A1 = A._nilpotent()
    sub = "ij,j->i" if vector else "ij,jk->ik"
    for _ in range(sp.order):
        x = Jet(sp, solve0((b - jeinsum(sub, A1, x)).coeffs))
    return x


def jet_lstsq(A, b: Jet, rcond: float = 1e-12):
    """Least-norm solution of a (possibly over-determined) jet system.

    Returns ``(x, rank)`` where ``rank`` is the numerical rank of the
    constant-term matrix.  Constant matrices are handled with a single
    pseudo-inverse; jet matrices go through the normal equations.
    """
    if isinstance(A, Jet):
        A0 = A.coeffs[0]
        rank = np.linalg.matrix_rank(A0)
        AtA = jeinsum("ki,kj->ij", A, A)
        Atb = jeinsum("ki,k->i", A, b) if b.ndim == 1 else jeinsum("ki,kj->ij", A, b)
        return jet_linear_solve(AtA, Atb), rank
    A = np.asarray(A, dtype=float)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > rcond * s[0])) if s.size else 0
    pinv = np.linalg.pinv(A, rcond=rcond)
    sub = "ij,j->i" if b.ndim == 1 else "ij,jk->ik"
    return jeinsum(sub, pinv, b), rank


def is_number(x) -> bool:
    return isinstance(x, numbers.Number) and not isinstance(x, bool)

"""Polynomial and rational coefficient functions in the monomial-list format.

A polynomial is a list of ``[coefficient, [e_1, ..., e_m]]`` monomials; a
rational function is ``{"num": <polynomial>, "den": <polynomial>}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


from .jets import Jet

__all__ = ["Polynomial", "Rational", "parse_function", "dump_function", "parse_expression", "random_polynomial"]


@dataclass(frozen=True)
class Polynomial:
    terms: tuple  # ((coef, (e_1, ..., e_m)), ...)

    @classmethod
    def from_terms(cls, terms):
        cleaned = []
        for coef, exps in terms:
            cleaned.append((float(coef), tuple(int(e) for e in exps)))
        return cls(tuple(cleaned))

    @classmethod
    def constant(cls, value, num_vars):
        return cls(((float(value), (0,) * num_vars),))

    @property
    def num_vars(self):
        return len(self.terms[0][1]) if self.terms else 0

    @property
    def degree(self):
        return max((sum(e) for _, e in self.terms), default=0)

    def __call__(self, X):
        """Evaluate on coordinate jets (or plain floats) ``X``."""
        powers = {}

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = X[i] if e == 1 else power(i, e - 1) * X[i]
            return powers[key]

        total = None
        for coef, exps in self.terms:
            term = coef
            for i, e in enumerate(exps):
                if e:
                    term = power(i, e) * term
            total = term if total is None else total + term
        if total is None:
            total = 0.0
        if not isinstance(total, Jet) and isinstance(X[0], Jet):
            total = Jet.constant(X[0].space, total)
        return total

    def to_json(self):
        return [[c, list(e)] for c, e in self.terms]


@dataclass(frozen=True)
class Rational:
    num: Polynomial
    den: Polynomial

    def __call__(self, X):
        return self.num(X) / self.den(X)

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den.to_json()}


def parse_function(obj, num_vars=None):
    """Build a coefficient function from its JSON form."""
    if isinstance(obj, dict):
        return Rational(parse_function(obj["num"]), parse_function(obj["den"]))
    if isinstance(obj, (int, float)):
        if num_vars is None:
            raise ValueError("a bare constant needs num_vars")
        return Polynomial.constant(obj, num_vars)
    terms = [(t[0], t[1]) for t in obj]
    poly = Polynomial.from_terms(terms)
    if num_vars is not None and poly.terms and poly.num_vars != num_vars:
        raise ValueError(f"monomial length {poly.num_vars} does not match {num_vars} coordinates")
    return poly


def dump_function(f):
    return f.to_json()


def random_polynomial(rng, num_vars, degree=2, scale=0.5, zero_constant=True):
    """Dense polynomial with coefficients uniform in ``[-scale, scale]``."""
    from .jets import jet_space

    sp = jet_space(num_vars, degree)
    terms = []
    for e in sp.exponents:
        if zero_constant and not e.any():
            continue
        terms.append((float(rng.uniform(-scale, scale)), tuple(int(x) for x in e)))
    return Polynomial(tuple(terms))


_TOKEN = re.compile(r"\s*([+-])?\s*([^+-]+)")
_NUMBER = re.compile(r"^(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def parse_expression(expr: str, names) -> Polynomial:
    """Compile ``"0.3*u1*v1 - t + 2"`` into a polynomial in the coordinates ``names``.

    Terms are products of coordinate names, ``name^k`` powers and decimal
    coefficients, joined by ``+`` or ``-``.
    """
    names = list(names)
    index = {nm: i for i, nm in enumerate(names)}
    text = expr.strip()
    if not text:
        raise ValueError("empty expression")
    # protect exponent signs such as 1e-3 from the term splitter
    text = re.sub(r"(\d)[eE]([+-])(\d)", lambda m: f"{m[1]}e{'P' if m[2] == '+' else 'M'}{m[3]}", text)
    terms = {}
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or not m.group(2).strip():
            raise ValueError(f"cannot parse {expr!r} near position {pos}")
        if pos and m.group(1) is None:
            raise ValueError(f"missing operator in {expr!r}")
        pos = m.end()
        coef = -1.0 if m.group(1) == "-" else 1.0
        exps = [0] * len(names)
        for factor in m.group(2).split("*"):
            factor = factor.strip().replace("eP", "e+").replace("eM", "e-")
            base, caret, power = factor.partition("^")
            if caret and not power.isdigit():
                raise ValueError(f"bad power in {factor!r}")
            if _NUMBER.match(base) and not caret:
                coef *= float(base)
            elif base in index:
                exps[index[base]] += int(power) if caret else 1
            else:
                raise ValueError(f"unknown factor {factor!r}; coordinates are {', '.join(names)}")
        key = tuple(exps)
        terms[key] = terms.get(key, 0.0) + coef
    return Polynomial(tuple((c, e) for e, c in terms.items()))

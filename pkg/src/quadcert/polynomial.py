"""Sparse multivariate polynomials keyed by exponent vectors.

Coefficients live in a dict mapping exponent tuples (one entry per variable)
to floats; zero coefficients are never stored. Products route through the
compiled kernels when the term count makes the Python loop the bottleneck.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import kernels

_PRUNE = 0.0  # exact-zero pruning only; never drop small coefficients
_KERNEL_CUTOFF = 2048  # pair count above which array kernels win


class Polynomial:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], float] | None = None):
        self.nvars = int(nvars)
        self.terms: dict[tuple[int, ...], float] = {}
        if terms:
            for e, c in terms.items():
                if c != _PRUNE:
                    if len(e) != self.nvars:
                        raise ValueError("exponent vector length mismatch")
                    self.terms[tuple(int(v) for v in e)] = float(c)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def zero(nvars: int) -> "Polynomial":
        return Polynomial(nvars)

    @staticmethod
    def constant(c: float, nvars: int) -> "Polynomial":
        p = Polynomial(nvars)
        if c != 0.0:
            p.terms[(0,) * nvars] = float(c)
        return p

    @staticmethod
    def variable(i: int, nvars: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        p = Polynomial(nvars)
        p.terms[tuple(e)] = 1.0
        return p

    @staticmethod
    def monomial(exps: Iterable[int], coef: float) -> "Polynomial":
        e = tuple(int(v) for v in exps)
        p = Polynomial(len(e))
        if coef != 0.0:
            p.terms[e] = float(coef)
        return p

    def copy(self) -> "Polynomial":
        p = Polynomial(self.nvars)
        p.terms = dict(self.terms)
        return p

    # -- queries ------------------------------------------------------------
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def coefficient(self, exps: Iterable[int]) -> float:
        return self.terms.get(tuple(int(v) for v in exps), 0.0)

    def max_norm(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def items_grlex(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, tuple(self.items_grlex())))

    def __repr__(self) -> str:
        if not self.terms:
            return "Polynomial(0)"
        bits = []
        for e, c in self.items_grlex()[:8]:
            mono = "*".join(f"x{i}^{p}" for i, p in enumerate(e) if p) or "1"
            bits.append(f"{c:+g}*{mono}")
        more = "" if len(self.terms) <= 8 else f" ... ({len(self.terms)} terms)"
        return f"Polynomial({' '.join(bits)}{more})"

    # -- arithmetic ----------------------------------------------------------
    def _add_scaled(self, other: "Polynomial", s: float) -> "Polynomial":
        out = self.copy()
        for e, c in other.terms.items():
            v = out.terms.get(e, 0.0) + s * c
            if v == 0.0:
                out.terms.pop(e, None)
            else:
                out.terms[e] = v
        return out

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return self._add_scaled(other, 1.0)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self._add_scaled(other, -1.0)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def scale(self, s: float) -> "Polynomial":
        p = Polynomial(self.nvars)
        if s != 0.0:
            p.terms = {e: s * c for e, c in self.terms.items()}
        return p

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        out = Polynomial(self.nvars)
        if not self.terms or not other.terms:
            return out
        if len(self.terms) * len(other.terms) >= _KERNEL_CUTOFF:
            ea, ca = self.to_arrays()
            eb, cb = other.to_arrays()
            exps, coefs = kernels.poly_mul_arrays(ea, ca, eb, cb)
            out.terms = {tuple(map(int, e)): float(c) for e, c in zip(exps, coefs) if c != 0.0}
            return out
        terms = out.terms
        for ea_, ca_ in self.terms.items():
            for eb_, cb_ in other.terms.items():
                e = tuple(a + b for a, b in zip(ea_, eb_))
                v = terms.get(e, 0.0) + ca_ * cb_
                if v == 0.0:
                    terms.pop(e, None)
                else:
                    terms[e] = v
        return out

    def power(self, p: int) -> "Polynomial":
        if p < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1.0, self.nvars)
        base = self
        while p:
            if p & 1:
                result = result * base
            base = base * base if p > 1 else base
            p >>= 1
        return result

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, x) -> float:
        total = 0.0
        for e, c in self.terms.items():
            v = c
            for i, p in enumerate(e):
                if p:
                    v *= float(x[i]) ** p
            total += v
        return total

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(xs.shape[0])
        for e, c in self.terms.items():
            v = np.full(xs.shape[0], c)
            for i, p in enumerate(e):
                if p:
                    v *= xs[:, i] ** p
            out += v
        return out

    # -- transforms ----------------------------------------------------------
    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        items = self.items_grlex()
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
        coefs = np.array([c for _, c in items], dtype=float)
        return exps, coefs

    def extend(self, nvars: int) -> "Polynomial":
        """Same polynomial viewed in a larger variable space."""
        if nvars < self.nvars:
            raise ValueError("cannot shrink variable space")
        pad = (0,) * (nvars - self.nvars)
        p = Polynomial(nvars)
        p.terms = {e + pad: c for e, c in self.terms.items()}
        return p

    def affine_substitute(self, shift: np.ndarray, scale: np.ndarray) -> "Polynomial":
        """Substitute x_i = shift_i + scale_i * u_i."""
        out = Polynomial(self.nvars)
        lin = [
            Polynomial(self.nvars, {(0,) * self.nvars: float(shift[i])})
            ._add_scaled(Polynomial.variable(i, self.nvars), float(scale[i]))
            for i in range(self.nvars)
        ]
        pow_cache: dict[tuple[int, int], Polynomial] = {}

        def lin_pow(i: int, p: int) -> Polynomial:
            key = (i, p)
            got = pow_cache.get(key)
            if got is None:
                got = lin[i].power(p)
                pow_cache[key] = got
            return got

        for e, c in self.terms.items():
            term = Polynomial.constant(c, self.nvars)
            for i, p in enumerate(e):
                if p:
                    term = term * lin_pow(i, p)
            out = out + term
        return out


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


def monomials_upto(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors with total degree <= degree, in graded-lex order.

    Size is C(nvars + degree, degree).
    """
    out = [(0,) * nvars]
    for d in range(1, degree + 1):
        block = []
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            block.append(tuple(e))
        block.sort()
        out.extend(block)
    return out


def count_monomials(nvars: int, degree: int) -> int:
    return math.comb(nvars + degree, degree)

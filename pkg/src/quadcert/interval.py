"""Outward-rounded interval arithmetic over boxes.

Directed rounding is emulated by epsilon-inflation: every arithmetic result
is widened outward by a relative factor of one machine epsilon plus one tiny
absolute ulp. That keeps enclosures sound on any IEEE-754 platform without
touching rounding modes. Transcendental images get a wider inflation because
libm guarantees are weaker than for +,-,*,/.

Intervals produced from finite boxes stay finite; an operation whose exact
range would be unbounded (division by an interval containing zero, log
touching zero) raises IntervalError instead of returning infinities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import expr as ex

_EPS = 2.0**-52
_TINY = 1e-300
# libm functions are not correctly rounded; widen their images further
_EPS_LIBM = 4.0 * _EPS


class IntervalError(Exception):
    """Unbounded or domain-violating interval operation."""


def _out(lo: float, hi: float) -> "Interval":
    """Inflate [lo, hi] outward by one epsilon relative + one ulp absolute."""
    return Interval(lo - abs(lo) * _EPS - _TINY, hi + abs(hi) * _EPS + _TINY)


def _out_libm(lo: float, hi: float) -> "Interval":
    return Interval(lo - abs(lo) * _EPS_LIBM - _TINY, hi + abs(hi) * _EPS_LIBM + _TINY)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise IntervalError(f"non-finite interval [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise IntervalError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(v, v)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise IntervalError("empty intersection")
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def clamp(self, v: float) -> float:
        return min(max(v, self.lo), self.hi)

    def __add__(self, other: "Interval") -> "Interval":
        return _out(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return _out(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        p = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return _out(min(p), max(p))

    def __truediv__(self, other: "Interval") -> "Interval":
        if other.lo <= 0.0 <= other.hi:
            raise IntervalError(
                f"division by interval [{other.lo}, {other.hi}] containing zero"
            )
        p = (
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        )
        return _out(min(p), max(p))

    def power(self, p: int) -> "Interval":
        if p == 1:
            return self
        if p % 2 == 1 or self.lo >= 0.0:
            return _out(self.lo**p, self.hi**p)
        if self.hi <= 0.0:
            return _out(self.hi**p, self.lo**p)
        return _out(0.0, max(self.lo**p, self.hi**p))

    def sqrt(self) -> "Interval":
        if self.hi < 0.0:
            raise IntervalError(f"sqrt of negative interval [{self.lo}, {self.hi}]")
        lo = max(self.lo, 0.0)
        return _out(math.sqrt(lo), math.sqrt(self.hi))

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def min(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), min(self.hi, other.hi))

    def max(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), max(self.hi, other.hi))

    def exp(self) -> "Interval":
        return _out_libm(math.exp(self.lo), math.exp(self.hi))

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise IntervalError(f"log of interval [{self.lo}, {self.hi}] touching 0")
        return _out_libm(math.log(self.lo), math.log(self.hi))

    def atan(self) -> "Interval":
        return _out_libm(math.atan(self.lo), math.atan(self.hi))

    def asin(self) -> "Interval":
        c = self._clamp_unit("asin")
        return _out_libm(math.asin(c.lo), math.asin(c.hi))

    def acos(self) -> "Interval":
        c = self._clamp_unit("acos")
        return _out_libm(math.acos(c.hi), math.acos(c.lo))

    def _clamp_unit(self, name: str) -> "Interval":
        if self.hi < -1.0 - ex.DOMAIN_EPS or self.lo > 1.0 + ex.DOMAIN_EPS:
            raise IntervalError(f"{name} of interval outside [-1, 1]")
        return Interval(max(self.lo, -1.0), min(self.hi, 1.0))

    def sin(self) -> "Interval":
        return _sin_range(self.lo, self.hi)

    def cos(self) -> "Interval":
        # cos(x) = sin(x + pi/2); shift with a safe widening of pi/2
        return _sin_range(self.lo + math.pi / 2 - 1e-15, self.hi + math.pi / 2 + 1e-15)

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _sin_range(lo: float, hi: float) -> Interval:
    """Range of sin over [lo, hi] by critical-point analysis."""
    if hi - lo >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    vlo = min(math.sin(lo), math.sin(hi))
    vhi = max(math.sin(lo), math.sin(hi))
    # maxima at pi/2 + 2k*pi, minima at -pi/2 + 2k*pi
    k_top = math.ceil((lo - math.pi / 2) / (2 * math.pi))
    if math.pi / 2 + 2 * math.pi * k_top <= hi + 1e-15:
        vhi = 1.0
    k_bot = math.ceil((lo + math.pi / 2) / (2 * math.pi))
    if -math.pi / 2 + 2 * math.pi * k_bot <= hi + 1e-15:
        vlo = -1.0
    out = _out_libm(vlo, vhi)
    return Interval(max(out.lo, -1.0), min(out.hi, 1.0))


class Box:
    """Product of closed intervals: the feasible set and all sub-boxes."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval]):
        self.intervals = tuple(intervals)
        if not self.intervals:
            raise ValueError("box must have at least one dimension")

    @staticmethod
    def from_bounds(bounds: Sequence[tuple[float, float]]) -> "Box":
        return Box(Interval(float(lo), float(hi)) for lo, hi in bounds)

    @property
    def n(self) -> int:
        return len(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __getitem__(self, i: int) -> Interval:
        return self.intervals[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Box) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        return "Box(" + " x ".join(map(repr, self.intervals)) + ")"

    def bounds(self) -> list[tuple[float, float]]:
        return [(iv.lo, iv.hi) for iv in self.intervals]

    def widths(self) -> np.ndarray:
        return np.array([iv.width for iv in self.intervals])

    def max_width(self) -> float:
        return max(iv.width for iv in self.intervals)

    def volume(self) -> float:
        v = 1.0
        for iv in self.intervals:
            v *= iv.width
        return v

    def midpoint(self) -> np.ndarray:
        return np.array([iv.mid for iv in self.intervals])

    def contains(self, x, tol: float = 0.0) -> bool:
        return all(iv.contains(float(v), tol) for iv, v in zip(self.intervals, x))

    def clamp(self, x) -> np.ndarray:
        return np.array([iv.clamp(float(v)) for iv, v in zip(self.intervals, x)])

    def replace(self, i: int, iv: Interval) -> "Box":
        parts = list(self.intervals)
        parts[i] = iv
        return Box(parts)

    def intersect_ball(self, center, r: float) -> "Box":
        """Intersection with the L-infinity ball of radius r (a box)."""
        out = []
        for iv, c in zip(self.intervals, center):
            lo = max(iv.lo, float(c) - r)
            hi = min(iv.hi, float(c) + r)
            if lo > hi:
                raise IntervalError("ball does not meet the box")
            out.append(Interval(lo, hi))
        return Box(out)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo = np.array([iv.lo for iv in self.intervals])
        hi = np.array([iv.hi for iv in self.intervals])
        return lo + (hi - lo) * rng.random((count, self.n))


@dataclass
class IntervalMatrix:
    """Symmetric matrix of intervals stored as lower/upper bound arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 2:
            raise ValueError("lo/hi must be matching 2-d arrays")
        if not np.array_equal(self.lo, self.lo.T) or not np.array_equal(self.hi, self.hi.T):
            raise ValueError("interval matrix must be symmetric")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bounds exceed upper bounds")

    @property
    def n(self) -> int:
        return self.lo.shape[0]

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def entry(self, i: int, j: int) -> Interval:
        return Interval(self.lo[i, j], self.hi[i, j])


def eval_interval(e: ex.Expr, box: Box) -> Interval:
    """Enclosure of the range of ``e`` over ``box`` by naive recursion.

    Inclusion-monotone: a sub-box never yields a wider interval.
    """

    def rec(t: ex.Expr) -> Interval:
        k = t.kind
        if k == ex.CONST:
            return Interval.point(t.value)
        if k == ex.VAR:
            return box[t.index]
        ch = [rec(c) for c in t.children]
        if k == ex.ADD:
            return ch[0] + ch[1]
        if k == ex.SUB:
            return ch[0] - ch[1]
        if k == ex.MUL:
            return ch[0] * ch[1]
        if k == ex.DIV:
            return ch[0] / ch[1]
        if k == ex.POW:
            return ch[0].power(t.exponent)
        if k == ex.SQRT:
            return ch[0].sqrt()
        if k == ex.ABS:
            return abs(ch[0])
        if k == ex.MIN:
            return ch[0].min(ch[1])
        if k == ex.MAX:
            return ch[0].max(ch[1])
        if k == ex.ATAN:
            return ch[0].atan()
        if k == ex.ASIN:
            return ch[0].asin()
        if k == ex.ACOS:
            return ch[0].acos()
        if k == ex.EXP:
            return ch[0].exp()
        if k == ex.LOG:
            return ch[0].log()
        if k == ex.SIN:
            return ch[0].sin()
        if k == ex.COS:
            return ch[0].cos()
        raise ValueError(f"unknown node kind {k!r}")  # pragma: no cover

    return rec(e)


def hessian_interval(f: ex.Expr, box: Box) -> IntervalMatrix:
    """Entrywise enclosure of the Hessian of ``f`` over ``box``.

    Uses interval evaluation of the symbolic second derivatives; shared
    (i, j)/(j, i) trees make the result symmetric by construction.
    """
    n = box.n
    hess = ex.hessian(f, n)
    lo = np.zeros((n, n))
    hi = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            iv = eval_interval(hess[i][j], box)
            lo[i, j] = lo[j, i] = iv.lo
            hi[i, j] = hi[j, i] = iv.hi
    return IntervalMatrix(lo, hi)


def refine_sup(e: ex.Expr, iv: Interval, tol: float = 1e-6, max_boxes: int = 4096) -> float:
    """Upper bound for sup of a univariate expression over ``iv``.

    Branch-and-bound on sub-intervals: sound for any tolerance, and within
    ``tol`` of the true supremum once the refinement budget suffices.
    """
    import heapq

    def ub(seg: Interval) -> float:
        return eval_interval(e, Box([seg])).hi

    def sample_lo(seg: Interval) -> float:
        vals = []
        for t in (seg.lo, seg.mid, seg.hi):
            try:
                vals.append(ex.evaluate(e, [t]))
            except ex.DomainError:
                pass
        return max(vals) if vals else -math.inf

    best_lo = sample_lo(iv)
    heap = [(-ub(iv), 0, iv)]
    counter = 1
    processed = 0
    while heap and processed < max_boxes:
        neg_hi, _, seg = heapq.heappop(heap)
        hi_val = -neg_hi
        if hi_val <= best_lo + tol:
            return hi_val
        mid = seg.mid
        if mid <= seg.lo or mid >= seg.hi:
            return hi_val
        for part in (Interval(seg.lo, mid), Interval(mid, seg.hi)):
            best_lo = max(best_lo, sample_lo(part))
            heapq.heappush(heap, (-ub(part), counter, part))
            counter += 1
        processed += 1
    return -heap[0][0] if heap else best_lo

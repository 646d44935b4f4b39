"""Exact arithmetic in the cyclotomic field Q(zeta_p).

Values are stored in the power basis 1, zeta, ..., zeta^(p-2); the relation
1 + zeta + ... + zeta^(p-1) = 0 eliminates zeta^(p-1), so the representation
is canonical and equality is coefficient equality.  For p = 2 the single
coefficient is the rational value itself (zeta_2 = -1).

Magnitude comparisons go through :func:`embed_certified`, which bounds the
complex embedding zeta -> exp(2*pi*i/p) with outward-rounded interval
arithmetic (mpmath.iv).  Rational values embed as exact point intervals.
"""
from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from mpmath import iv
from mpmath.libmp import to_rational

from .errors import NotRational, OrderMismatch

_IV_LOCK = threading.RLock()


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction or int")
    return Fraction(value)


class CycloNum:
    """An element of Q(zeta_p) in canonical power-basis form."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Iterable = ()):
        if p < 2:
            raise ValueError(f"character order must be >= 2, got {p}")
        cs = [_frac(c) for c in coeffs]
        if len(cs) > p - 1:
            raise ValueError(f"expected at most {p - 1} coefficients, got {len(cs)}")
        cs.extend([Fraction(0)] * (p - 1 - len(cs)))
        self.p = p
        self.coeffs = tuple(cs)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_group_ring(cls, p: int, vec: Sequence) -> "CycloNum":
        """Reduce sum_j vec[j] * zeta^j (j = 0..p-1) to canonical form."""
        if len(vec) != p:
            raise ValueError(f"group-ring vector must have length {p}")
        top = _frac(vec[p - 1])
        return cls(p, (_frac(vec[j]) - top for j in range(p - 1)))

    @classmethod
    def from_exponent_counts(cls, p: int, counts: Sequence[int], scale=1) -> "CycloNum":
        """sum_e counts[e] * zeta^e, times an optional rational scale."""
        s = _frac(scale)
        top = int(counts[p - 1])
        return cls(p, (s * (int(counts[j]) - top) for j in range(p - 1)))

    @classmethod
    def rational(cls, p: int, value) -> "CycloNum":
        return cls(p, (_frac(value),))

    @classmethod
    def zeta_power(cls, p: int, j: int) -> "CycloNum":
        j %= p
        vec = [0] * p
        vec[j] = 1
        return cls.from_group_ring(p, vec)

    # -- structure ------------------------------------------------------
    def group_ring(self) -> list[Fraction]:
        """Length-p coefficient vector with a zero in the zeta^(p-1) slot."""
        return list(self.coeffs) + [Fraction(0)]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise NotRational(f"{self!r} has a nonzero irrational part")
        return self.coeffs[0]

    def _coerce(self, other) -> "CycloNum":
        if isinstance(other, CycloNum):
            if other.p != self.p:
                raise OrderMismatch(f"Q(zeta_{self.p}) vs Q(zeta_{other.p})")
            return other
        if isinstance(other, (int, Fraction)):
            return CycloNum.rational(self.p, other)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycloNum(self.p, (a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycloNum(self.p, (-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycloNum(self.p, (a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return CycloNum(self.p, (a * r for a in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.p
        acc = [Fraction(0)] * p
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    acc[(i + j) % p] += a * b
        return CycloNum.from_group_ring(p, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return CycloNum(self.p, (a / r for a in self.coeffs))
        return NotImplemented

    def mul_zeta(self, j: int) -> "CycloNum":
        """Multiply by zeta^j (a cyclic shift in the group ring)."""
        p = self.p
        vec = self.group_ring()
        out = [Fraction(0)] * p
        for i, c in enumerate(vec):
            out[(i + j) % p] = c
        return CycloNum.from_group_ring(p, out)

    def conjugate(self) -> "CycloNum":
        p = self.p
        vec = self.group_ring()
        out = [Fraction(0)] * p
        for i, c in enumerate(vec):
            out[(-i) % p] = c
        return CycloNum.from_group_ring(p, out)

    def abs_sq(self) -> "CycloNum":
        return self * self.conjugate()

    # -- comparison / hashing -------------------------------------------
    def __eq__(self, other):
        if isinstance(other, CycloNum):
            return self.p == other.p and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.p, self.coeffs))

    def __repr__(self):
        terms = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            terms.append(str(c) if j == 0 else f"{c}*z^{j}")
        body = " + ".join(terms) if terms else "0"
        return f"CycloNum(p={self.p}: {body})"

    def to_strings(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    @classmethod
    def from_strings(cls, p: int, items: Sequence[str]) -> "CycloNum":
        return cls(p, (Fraction(s) for s in items))


def cyclo_sum(p: int, items: Iterable[CycloNum]) -> CycloNum:
    """Sum with a single canonicalisation at the end."""
    acc = [Fraction(0)] * (p - 1)
    for z in items:
        if z.p != p:
            raise OrderMismatch(f"Q(zeta_{p}) vs Q(zeta_{z.p})")
        for j, c in enumerate(z.coeffs):
            if c:
                acc[j] += c
    return CycloNum(p, acc)


def conjugate(z: CycloNum) -> CycloNum:
    return z.conjugate()


def abs_sq(z: CycloNum) -> CycloNum:
    return z.abs_sq()


def as_rational(z: CycloNum) -> Fraction:
    return z.as_rational()


# ---------------------------------------------------------------------------
# certified numeric embedding


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval [lo, hi] with exact dyadic (or rational) endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value) -> "CertifiedInterval":
        v = _frac(value)
        return cls(v, v)

    @classmethod
    def from_iv(cls, x) -> "CertifiedInterval":
        lo, hi = x._mpi_
        return cls(Fraction(*to_rational(lo)), Fraction(*to_rational(hi)))

    def to_iv(self):
        return iv.mpf([iv.mpf(self.lo.numerator) / self.lo.denominator,
                       iv.mpf(self.hi.numerator) / self.hi.denominator])

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        if isinstance(value, CertifiedInterval):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= _frac(value) <= self.hi

    def __contains__(self, value) -> bool:
        return self.contains(value)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def to_strings(self) -> list[str]:
        return [f"{self.lo.numerator}/{self.lo.denominator}",
                f"{self.hi.numerator}/{self.hi.denominator}"]


@contextmanager
def interval_precision(bits: int):
    """Run a block with mpmath.iv at `bits` of working precision.

    mpmath keeps precision in a global context, so access is serialised.
    """
    with _IV_LOCK:
        saved = iv.prec
        iv.prec = bits
        try:
            yield
        finally:
            iv.prec = saved


def _iv_rational(c: Fraction):
    return iv.mpf(c.numerator) / iv.mpf(c.denominator)


def embed_certified(z: CycloNum, precision_bits: int = 64, part: str = "real") -> CertifiedInterval:
    """Enclose Re(z) or Im(z) under zeta_p -> exp(2*pi*i/p).

    Rational inputs give exact point intervals.  Otherwise the enclosure is
    computed with outward rounding at ``precision_bits`` bits.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    if part not in ("real", "imag"):
        raise ValueError(f"part must be 'real' or 'imag', not {part!r}")
    if z.is_rational():
        return CertifiedInterval.point(z.coeffs[0] if part == "real" else 0)
    p = z.p
    with interval_precision(precision_bits):
        total = iv.mpf(0)
        for j, c in enumerate(z.coeffs):
            if not c:
                continue
            if j == 0:
                if part == "real":
                    total += _iv_rational(c)
                continue
            angle = 2 * iv.pi * j / p
            trig = iv.cos(angle) if part == "real" else iv.sin(angle)
            total += trig * _iv_rational(c)
        return CertifiedInterval.from_iv(total)


def exact_sqrt(value: Fraction) -> Fraction | None:
    """Square root of a nonnegative rational when it is itself rational."""
    if value < 0:
        return None
    n, d = value.numerator, value.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def certified_abs(z: CycloNum, precision_bits: int = 64) -> Fraction | CertifiedInterval:
    """|z| exactly when rational, else a certified enclosure."""
    sq = z.abs_sq()
    if sq.is_rational():
        r = exact_sqrt(sq.coeffs[0])
        if r is not None:
            return r
    box = embed_certified(sq, precision_bits)
    with interval_precision(precision_bits):
        lo = max(box.lo, Fraction(0))
        root = iv.sqrt(CertifiedInterval(lo, max(lo, box.hi)).to_iv())
        return CertifiedInterval.from_iv(root)

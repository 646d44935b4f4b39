"""Fourier analysis on F_q^d with respect to chi(x) = zeta_p^{Tr(x)}.

    f^(k) = q^{-d} sum_x chi(-x.k) f(x)          (forward)
    f(x)  = sum_k chi(x.k) f^(k)                 (inverse)

Two exact implementations share one representation: every value is lifted
to the group ring Z[Z/p] (length-p integer vectors after clearing a common
denominator), where multiplication by zeta^e is a cyclic shift.

* ``method="naive"`` sums over all q^d * q^d pairs (x, k).
* ``method="fast"`` writes Tr(x.k) = sum_i a_i^T M b_i with a_i, b_i the F_p
  digit vectors of x_i, k_i and M the trace-form matrix.  The sum then becomes
  an ordinary DFT over (Z/p)^(dn) evaluated at M b, which factors into dn
  length-p passes: q^d * d * n * p character products instead of q^{2d}.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

import numpy as np

from .cyclo import CycloNum, cyclo_sum
from .errors import CapExceeded, DimensionMismatch, FieldMismatch
from .field import FieldVector, FiniteField, PointSet, all_vector_codes, dot_matrix

#: largest table size q^d accepted by the fast transform
TRANSFORM_CAP = 1 << 20
#: the naive transform builds a q^d x q^d exponent table
NAIVE_CAP = 1 << 12

_INT64_SAFE = 1 << 62


@dataclass
class OpCounter:
    """Counts character-times-value products performed by a transform."""

    multiplications: int = 0


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function F_q^d -> Q(zeta_p), tabulated in canonical vector order."""

    field: FiniteField
    d: int
    values: tuple[CycloNum, ...]

    def __post_init__(self):
        size = self.field.q ** self.d
        if len(self.values) != size:
            raise DimensionMismatch(f"expected {size} values, got {len(self.values)}")
        for v in self.values:
            if v.p != self.field.p:
                raise FieldMismatch(f"value in Q(zeta_{v.p}) for a field of characteristic {self.field.p}")

    @classmethod
    def from_rationals(cls, field: FiniteField, d: int, values: Iterable) -> "GridFunction":
        return cls(field, d, tuple(CycloNum.rational(field.p, v) for v in values))

    @classmethod
    def indicator(cls, points: PointSet) -> "GridFunction":
        return cls.from_rationals(points.field, points.d, points.indicator().astype(int).tolist())

    @classmethod
    def zero(cls, field: FiniteField, d: int) -> "GridFunction":
        return cls.from_rationals(field, d, [0] * field.q ** d)

    @classmethod
    def constant(cls, field: FiniteField, d: int, value) -> "GridFunction":
        return cls.from_rationals(field, d, [value] * field.q ** d)

    @property
    def size(self) -> int:
        return len(self.values)

    def __getitem__(self, key) -> CycloNum:
        if isinstance(key, FieldVector):
            key = key.index
        return self.values[key]

    def __eq__(self, other):
        return (isinstance(other, GridFunction) and self.field == other.field
                and self.d == other.d and self.values == other.values)

    __hash__ = None

    def translate(self, shift: FieldVector) -> "GridFunction":
        """x -> f(x + shift)."""
        codes = all_vector_codes(self.field, self.d)
        moved = self.field.add_arr(codes, np.asarray(shift.codes, dtype=np.int64)[None, :])
        idx = _index_of(self.field, moved)
        return GridFunction(self.field, self.d, tuple(self.values[i] for i in idx))

    def map(self, fn: Callable[[CycloNum], CycloNum]) -> "GridFunction":
        return GridFunction(self.field, self.d, tuple(fn(v) for v in self.values))


def _index_of(field: FiniteField, codes: np.ndarray) -> np.ndarray:
    idx = np.zeros(codes.shape[0], dtype=np.int64)
    for i in range(codes.shape[1]):
        idx = idx * field.q + codes[:, i]
    return idx


# -- group-ring lifting ------------------------------------------------------

def _lift(values: Sequence[CycloNum], p: int) -> tuple[np.ndarray, int]:
    """Integer (N, p) group-ring table and the common denominator D."""
    den = 1
    for v in values:
        for c in v.coeffs:
            if c.denominator != 1:
                den = lcm(den, c.denominator)
    rows = [[int(c * den) for c in v.coeffs] + [0] for v in values]
    table = np.array(rows, dtype=object).reshape(len(values), p)
    bound = len(values) * max((sum(abs(x) for x in r) for r in rows), default=0)
    if bound < _INT64_SAFE:
        table = table.astype(np.int64)
    return table, den


def _lower(table: np.ndarray, p: int, scale: Fraction) -> tuple[CycloNum, ...]:
    out = []
    for row in table.tolist():
        top = row[p - 1]
        out.append(CycloNum(p, (scale * (int(row[j]) - top) for j in range(p - 1))))
    return tuple(out)


def _check_caps(f: GridFunction, cap: int):
    if f.size > cap:
        raise CapExceeded(f"q^d = {f.size} exceeds the transform cap {cap}")


# -- naive -------------------------------------------------------------------

def _naive_apply(field: FiniteField, d: int, table: np.ndarray, sign: int, premultiplier: int,
                 counter: OpCounter | None) -> np.ndarray:
    p = field.p
    codes = all_vector_codes(field, d)
    dots = dot_matrix(field, codes, codes)
    if premultiplier != 1:
        dots = field.mul_arr(dots, premultiplier)
    expo = (sign * field.trace_arr(dots)) % p
    out = np.zeros_like(table)
    for e in range(p):
        mask = (expo == e).astype(table.dtype)
        out += np.roll(mask @ table, e, axis=1)
    if counter is not None:
        counter.multiplications += table.shape[0] * table.shape[0]
    return out


# -- fast (separable over (Z/p)^(dn)) -----------------------------------------

def _fast_apply(field: FiniteField, d: int, table: np.ndarray, sign: int, premultiplier: int,
                counter: OpCounter | None) -> np.ndarray:
    p, n = field.p, field.n
    size = table.shape[0]
    axes = d * n
    # canonical index -> digits: coordinate i most significant, within a
    # coordinate the top coefficient c_{n-1} most significant
    data = table.reshape((p,) * axes + (p,))
    for ax in range(axes):
        moved = np.moveaxis(data, ax, 0)
        out = np.zeros_like(moved)
        for b in range(p):
            acc = moved[0].copy()
            for a in range(1, p):
                shift = (sign * a * b) % p
                acc += np.roll(moved[a], shift, axis=-1) if shift else moved[a]
            out[b] = acc
        data = np.moveaxis(out, 0, ax)
        if counter is not None:
            counter.multiplications += size * p
    flat = data.reshape(size, p)

    # output k is read off at beta = M b(k) for each coordinate
    form = field.trace_form(premultiplier)
    codes = all_vector_codes(field, d)
    beta_index = np.zeros(size, dtype=np.int64)
    for i in range(d):
        digits = np.stack(field._digits(codes[:, i]), axis=1)  # (size, n), c_0 first
        beta = (digits @ form.T) % p
        for j in range(n - 1, -1, -1):
            beta_index = beta_index * p + beta[:, j]
    return flat[beta_index]


_METHODS = {"naive": (_naive_apply, NAIVE_CAP), "fast": (_fast_apply, TRANSFORM_CAP)}


def _transform(f: GridFunction, sign: int, scale: Fraction, method: str,
               premultiplier, counter: OpCounter | None) -> GridFunction:
    try:
        impl, cap = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown transform method {method!r}") from None
    _check_caps(f, cap)
    a = f.field(premultiplier).code if premultiplier is not None else 1
    if a == 0:
        raise ValueError("the character premultiplier must be nonzero")
    table, den = _lift(f.values, f.field.p)
    out = impl(f.field, f.d, table, sign, a, counter)
    return GridFunction(f.field, f.d, _lower(out, f.field.p, scale / den))


def fourier_transform(f: GridFunction, *, method: str = "naive", premultiplier=None,
                      counter: OpCounter | None = None) -> GridFunction:
    """f^(k) = q^{-d} sum_x chi(-x.k) f(x), exactly."""
    return _transform(f, -1, Fraction(1, f.field.q ** f.d), method, premultiplier, counter)


def inverse_transform(g: GridFunction, *, method: str = "naive", premultiplier=None,
                      counter: OpCounter | None = None) -> GridFunction:
    """f(x) = sum_k chi(x.k) g(k), exactly."""
    return _transform(g, 1, Fraction(1), method, premultiplier, counter)


def fast_transform(f: GridFunction, *, premultiplier=None,
                   counter: OpCounter | None = None) -> GridFunction:
    return fourier_transform(f, method="fast", premultiplier=premultiplier, counter=counter)


def transform_cost(field: FiniteField, d: int, method: str) -> int:
    """Character products the given method performs on a q^d table."""
    size = field.q ** d
    if method == "naive":
        return size * size
    if method == "fast":
        return size * d * field.n * field.p
    raise ValueError(f"unknown transform method {method!r}")


@dataclass
class PlancherelResult:
    spectral: CycloNum
    spatial: CycloNum
    passed: bool
    extras: dict = dc_field(default_factory=dict)


def plancherel_check(f: GridFunction, *, method: str = "fast") -> PlancherelResult:
    """Compare sum_k |f^(k)|^2 with q^{-d} sum_x |f(x)|^2 exactly.

    Individual |f^(k)|^2 usually lie in the real subfield of Q(zeta_p), not in
    Q, so the sums are formed first; for rational f both sides are rational.
    """
    p = f.field.p
    fhat = fourier_transform(f, method=method)
    spectral = cyclo_sum(p, (v.abs_sq() for v in fhat.values))
    spatial = cyclo_sum(p, (v.abs_sq() for v in f.values)) * Fraction(1, f.size)
    return PlancherelResult(spectral, spatial, spectral == spatial)

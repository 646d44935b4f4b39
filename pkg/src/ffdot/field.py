"""Finite fields F_{p^n}, vectors in F_q^d, point sets, and the additive character.

Elements are encoded as integers ``code = c_0 + c_1 p + ... + c_{n-1} p^{n-1}``
where ``c_0 + c_1 t + ... + c_{n-1} t^{n-1}`` is the canonical (fully reduced)
polynomial in the generator t.  Enumeration order of F_q is code order, so
F_4 enumerates as 0, 1, t, t+1.  A vector (x_1, ..., x_d) has canonical index
``sum_i code(x_i) * q^(d-1-i)``: an odometer whose last coordinate turns
fastest.

Scalar operations (``FiniteField.add``/``mul``/``trace`` ...) follow the
polynomial definitions directly.  The ``*_arr`` methods are vectorised numpy
counterparts used by the enumeration and character-sum cores; the test suite
checks the two routes against each other.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cyclo import CycloNum
from .errors import (CapExceeded, DegreeOutOfRange, DimensionMismatch,
                     DivisionByZero, FieldMismatch, NotIrreducible, NotPrime)

#: largest supported field order
MAX_ORDER = 1 << 20
#: largest q^d handed out by enumerate_vectors / PointSet.full
MAX_VECTORS = 1 << 22
#: multiplication tables are materialised up to this order (q^2 int32 entries)
TABLE_ORDER = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# -- polynomials over F_p, coefficient lists lowest degree first -----------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_rem(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    """Remainder of a modulo b over F_p; b must have a nonzero leading term."""
    r = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    if not b:
        raise DivisionByZero("polynomial division by zero")
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        f = (r[-1] * inv_lead) % p
        for i, c in enumerate(b):
            r[shift + i] = (r[shift + i] - f * c) % p
        _trim(r)
    return r


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    poly = _trim([c % p for c in poly])
    n = len(poly) - 1
    if n < 1:
        return False
    for deg in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not poly_rem(poly, list(low) + [1], p):
                return False
    return True


def smallest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree n (low degree first)."""
    for low in itertools.product(range(p), repeat=n):
        cand = list(low) + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise NotIrreducible(f"no irreducible polynomial of degree {n} over F_{p}")  # pragma: no cover


class FiniteField:
    """The field F_p[t]/(modulus) with q = p^n elements.

    Instances compare equal when p and the modulus agree, and are immutable;
    derived tables are computed lazily and cached.
    """

    def __init__(self, p: int, n: int = 1, modulus: Sequence[int] | None = None):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if n < 1:
            raise DegreeOutOfRange(f"extension degree must be >= 1, got {n}")
        if p ** n > MAX_ORDER:
            raise CapExceeded(f"q = {p}^{n} exceeds the cap {MAX_ORDER}")
        if n == 1:
            modulus = (0, 1)
        elif modulus is None:
            modulus = smallest_irreducible(p, n)
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != n + 1 or modulus[-1] != 1:
                raise NotIrreducible(f"modulus must be monic of degree {n}")
            if not is_irreducible(modulus, p):
                raise NotIrreducible(f"{modulus} is reducible over F_{p}")
        self.p = p
        self.n = n
        self.q = p ** n
        self.modulus = tuple(modulus)

    def __eq__(self, other):
        return (isinstance(other, FiniteField) and self.p == other.p
                and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        if self.n == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.n})"

    def __getstate__(self):
        return {"p": self.p, "n": self.n, "modulus": self.modulus}

    def __setstate__(self, state):
        self.__init__(state["p"], state["n"], state["modulus"])

    # -- element construction ------------------------------------------
    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch(f"{value!r} is not in {self}")
            return value
        if isinstance(value, (list, tuple)):
            return FieldElement(self, self.from_coeffs(value))
        # prime fields take any integer residue; extension fields take codes
        return FieldElement(self, int(value) % self.p if self.n == 1 else self._check_code(int(value)))

    def _check_code(self, code: int) -> int:
        if not 0 <= code < self.q:
            raise ValueError(f"element code {code} outside [0, {self.q})")
        return code

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    @property
    def gen(self) -> "FieldElement":
        """The class of t in F_p[t]/(modulus); zero when n = 1 (modulus t)."""
        return FieldElement(self, self.from_coeffs([0, 1]))

    @property
    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self, c) for c in range(self.q)]

    def to_coeffs(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            code, r = divmod(code, self.p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        red = poly_rem(list(coeffs), self.modulus, self.p)
        code = 0
        for c in reversed(red):
            code = code * self.p + c
        return code

    # -- scalar reference arithmetic on codes --------------------------
    def add(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a + b) % self.p
        ca, cb = self.to_coeffs(a), self.to_coeffs(b)
        return self.from_coeffs([(x + y) % self.p for x, y in zip(ca, cb)])

    def neg(self, a: int) -> int:
        if self.n == 1:
            return (-a) % self.p
        return self.from_coeffs([(-x) % self.p for x in self.to_coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a * b) % self.p
        ca, cb = self.to_coeffs(a), self.to_coeffs(b)
        prod = [0] * (2 * self.n - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] += x * y
        return self.from_coeffs(prod)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in {self}")
        if self.n == 1:
            return pow(a, -1, self.p)
        return self.pow(a, self.q - 2)

    def trace(self, a: int) -> int:
        """Tr(a) = a + a^p + ... + a^(p^(n-1)), as a residue mod p."""
        acc, term = 0, a
        for _ in range(self.n):
            acc = self.add(acc, term)
            term = self.pow(term, self.p)
        coeffs = self.to_coeffs(acc)
        if any(coeffs[1:]):  # pragma: no cover - would mean a broken modulus
            raise ArithmeticError(f"trace of {a} left the prime field")
        return coeffs[0]

    # -- vectorised arithmetic on int64 code arrays --------------------
    def _digits(self, a: np.ndarray) -> list[np.ndarray]:
        out = []
        a = np.asarray(a, dtype=np.int64)
        for _ in range(self.n):
            a, r = np.divmod(a, self.p)
            out.append(r)
        return out

    def _undigits(self, digits: Sequence[np.ndarray]) -> np.ndarray:
        code = np.zeros_like(np.asarray(digits[0]), dtype=np.int64)
        for r in reversed(digits):
            code = code * self.p + r
        return code

    def add_arr(self, a, b) -> np.ndarray:
        if self.n == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.p
        da, db = self._digits(a), self._digits(b)
        return self._undigits([(x + y) % self.p for x, y in zip(da, db)])

    def neg_arr(self, a) -> np.ndarray:
        if self.n == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p
        return self._undigits([(-x) % self.p for x in self._digits(a)])

    def sub_arr(self, a, b) -> np.ndarray:
        return self.add_arr(a, self.neg_arr(b))

    def _mul_digits(self, a, b) -> np.ndarray:
        p, n = self.p, self.n
        da, db = self._digits(a), self._digits(b)
        shape = np.broadcast_shapes(da[0].shape, db[0].shape)
        prod = [np.zeros(shape, dtype=np.int64) for _ in range(2 * n - 1)]
        for i in range(n):
            for j in range(n):
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p
        # t^n = -(m_0 + m_1 t + ... + m_{n-1} t^{n-1})
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k]
            for j in range(n):
                if self.modulus[j]:
                    prod[k - n + j] = (prod[k - n + j] - c * self.modulus[j]) % p
        return self._undigits(prod[:n])

    @cached_property
    def mul_table(self) -> np.ndarray | None:
        if self.n == 1 or self.q > TABLE_ORDER:
            return None
        codes = np.arange(self.q, dtype=np.int64)
        return self._mul_digits(codes[:, None], codes[None, :]).astype(np.int32)

    def mul_arr(self, a, b) -> np.ndarray:
        if self.n == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        table = self.mul_table
        if table is not None:
            return table[np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)].astype(np.int64)
        return self._mul_digits(a, b)

    @cached_property
    def trace_basis(self) -> np.ndarray:
        """Tr(t^j) for j = 0..n-1; the trace is F_p-linear in the coefficients."""
        return np.array([self.trace(self.from_coeffs([0] * j + [1])) for j in range(self.n)],
                        dtype=np.int64)

    def trace_arr(self, a) -> np.ndarray:
        if self.n == 1:
            return np.asarray(a, dtype=np.int64) % self.p
        acc = None
        for r, t in zip(self._digits(a), self.trace_basis):
            term = r * int(t)
            acc = term if acc is None else acc + term
        return acc % self.p

    @cached_property
    def trace_table(self) -> np.ndarray:
        return self.trace_arr(np.arange(self.q, dtype=np.int64))

    def trace_form(self, premultiplier: int = 1) -> np.ndarray:
        """Matrix M[j, l] = Tr(c * t^j * t^l) of the F_p-bilinear form Tr(c x y)."""
        basis = [self.from_coeffs([0] * j + [1]) for j in range(self.n)]
        m = np.zeros((self.n, self.n), dtype=np.int64)
        for j, bj in enumerate(basis):
            for l, bl in enumerate(basis):
                m[j, l] = self.trace(self.mul(premultiplier, self.mul(bj, bl)))
        return m

    @cached_property
    def nonzero_sum_table(self) -> np.ndarray:
        """H[u, e] = #{s in F_q^* : Tr(s u) = e}.

        Row u is the exponent histogram of sum_{s != 0} chi(s u); every
        incomplete character sum over F_q^* in this package is a
        multiplicity-weighted combination of these rows.
        """
        if self.q > 4096:
            raise CapExceeded(f"character tables need q <= 4096, got {self.q}")
        s = np.arange(1, self.q, dtype=np.int64)
        table = np.zeros((self.q, self.p), dtype=np.int64)
        for u in range(self.q):
            ex = self.trace_arr(self.mul_arr(s, u))
            table[u] = np.bincount(ex, minlength=self.p)
        return table


def make_field(p: int, n: int = 1, modulus: Sequence[int] | None = None) -> FiniteField:
    return FiniteField(p, n, modulus)


@dataclass(frozen=True)
class FieldElement:
    field: FiniteField
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.to_coeffs(self.code)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.code
        if isinstance(other, int):
            return self.field(other).code
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.code, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.code, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._other(other), self.code))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.code, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.code))

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.code))

    def __truediv__(self, other):
        return self * FieldElement(self.field, self.field.inv(self._other(other)))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.code, e))

    def __bool__(self):
        return self.code != 0

    def trace(self) -> int:
        return self.field.trace(self.code)

    def __repr__(self):
        if self.field.n == 1:
            return f"{self.field}({self.code})"
        terms = []
        for j, c in enumerate(self.coeffs):
            if c:
                mono = "1" if j == 0 else ("t" if j == 1 else f"t^{j}")
                terms.append(mono if c == 1 and j else f"{c}" if j == 0 else f"{c}{mono}")
        return f"{self.field}({' + '.join(terms) or '0'})"


def trace(x: FieldElement) -> int:
    return x.trace()


def additive_character(x: FieldElement, premultiplier: FieldElement | int | None = None) -> CycloNum:
    """chi_a(x) = zeta_p^{Tr(a x)}; the default a = 1 gives the canonical chi."""
    f = x.field
    code = x.code
    if premultiplier is not None:
        a = f(premultiplier).code
        code = f.mul(a, code)
    return CycloNum.zeta_power(f.p, f.trace(code))


# -- vectors ---------------------------------------------------------------

@dataclass(frozen=True)
class FieldVector:
    field: FiniteField
    codes: tuple[int, ...]

    def __post_init__(self):
        if len(self.codes) < 1:
            raise DimensionMismatch("vectors need d >= 1")
        for c in self.codes:
            if not 0 <= c < self.field.q:
                raise ValueError(f"entry code {c} outside [0, {self.field.q})")

    @classmethod
    def of(cls, field: FiniteField, entries: Iterable) -> "FieldVector":
        return cls(field, tuple(field(e).code for e in entries))

    @classmethod
    def from_index(cls, field: FiniteField, d: int, index: int) -> "FieldVector":
        codes = []
        for _ in range(d):
            index, r = divmod(index, field.q)
            codes.append(r)
        return cls(field, tuple(reversed(codes)))

    @property
    def d(self) -> int:
        return len(self.codes)

    @property
    def entries(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.field, c) for c in self.codes)

    @property
    def index(self) -> int:
        idx = 0
        for c in self.codes:
            idx = idx * self.field.q + c
        return idx

    def _check(self, other: "FieldVector"):
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if other.d != self.d:
            raise DimensionMismatch(f"d = {self.d} vs d = {other.d}")

    def __add__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(self.field, tuple(self.field.add(a, b) for a, b in zip(self.codes, other.codes)))

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(self.field, tuple(self.field.sub(a, b) for a, b in zip(self.codes, other.codes)))

    def __neg__(self) -> "FieldVector":
        return FieldVector(self.field, tuple(self.field.neg(a) for a in self.codes))

    def scale(self, c) -> "FieldVector":
        s = self.field(c).code
        return FieldVector(self.field, tuple(self.field.mul(s, a) for a in self.codes))

    def is_zero(self) -> bool:
        return not any(self.codes)

    def __repr__(self):
        return f"FieldVector({self.field}, {list(self.entries)})"


def dot(u: FieldVector, v: FieldVector) -> FieldElement:
    u._check(v)
    f = u.field
    acc = 0
    for a, b in zip(u.codes, v.codes):
        acc = f.add(acc, f.mul(a, b))
    return FieldElement(f, acc)


def norm(x: FieldVector) -> FieldElement:
    """||x|| = x_1^2 + ... + x_d^2 (literal definition; also used in characteristic 2)."""
    return dot(x, x)


def _check_vector_cap(field: FiniteField, d: int):
    if d < 1:
        raise DimensionMismatch(f"d must be >= 1, got {d}")
    if field.q ** d > MAX_VECTORS:
        raise CapExceeded(f"q^d = {field.q}^{d} exceeds the cap {MAX_VECTORS}")


def enumerate_vectors(field: FiniteField, d: int) -> Iterator[FieldVector]:
    """All of F_q^d in canonical odometer order (last coordinate fastest)."""
    _check_vector_cap(field, d)
    for codes in itertools.product(range(field.q), repeat=d):
        yield FieldVector(field, codes)


def all_vector_codes(field: FiniteField, d: int) -> np.ndarray:
    """(q^d, d) array of coordinate codes in canonical order."""
    _check_vector_cap(field, d)
    idx = np.arange(field.q ** d, dtype=np.int64)
    out = np.empty((idx.size, d), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        idx, out[:, i] = np.divmod(idx, field.q)
    return out


def dot_matrix(field: FiniteField, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Codes of x . y for every row x of xs and row y of ys, shape (len(xs), len(ys))."""
    xs = np.asarray(xs, dtype=np.int64).reshape(-1, np.shape(xs)[-1] if np.ndim(xs) else 1)
    ys = np.asarray(ys, dtype=np.int64).reshape(-1, np.shape(ys)[-1] if np.ndim(ys) else 1)
    if xs.shape[1] != ys.shape[1]:
        raise DimensionMismatch(f"d = {xs.shape[1]} vs d = {ys.shape[1]}")
    if field.n == 1:
        return (xs @ ys.T) % field.p
    acc = np.zeros((xs.shape[0], ys.shape[0]), dtype=np.int64)
    for i in range(xs.shape[1]):
        acc = field.add_arr(acc, field.mul_arr(xs[:, i][:, None], ys[:, i][None, :]))
    return acc


# -- point sets ------------------------------------------------------------

class PointSet:
    """An immutable, duplicate-free, ordered subset A of F_q^d.

    Doubles as the indicator function of A.  Membership is answered by a
    dict keyed on coordinate-code tuples.
    """

    def __init__(self, field: FiniteField, d: int, points: Iterable = ()):
        if d < 1:
            raise DimensionMismatch(f"d must be >= 1, got {d}")
        pts = []
        for pt in points:
            if isinstance(pt, FieldVector):
                if pt.field != field:
                    raise FieldMismatch(f"{pt.field} vs {field}")
                codes = pt.codes
            else:
                codes = tuple(int(c) for c in pt)
            if len(codes) != d:
                raise DimensionMismatch(f"point {codes} does not have {d} coordinates")
            if any(not 0 <= c < field.q for c in codes):
                raise ValueError(f"point {codes} has codes outside [0, {field.q})")
            pts.append(codes)
        index = {}
        for i, codes in enumerate(pts):
            if codes in index:
                raise ValueError(f"duplicate point {codes}")
            index[codes] = i
        self.field = field
        self.d = d
        self.points: tuple[tuple[int, ...], ...] = tuple(pts)
        self.index = index
        arr = np.array(pts, dtype=np.int64).reshape(len(pts), d)
        arr.setflags(write=False)
        self.array = arr

    @classmethod
    def full(cls, field: FiniteField, d: int) -> "PointSet":
        return cls.from_indices(field, d, range(field.q ** d))

    @classmethod
    def from_indices(cls, field: FiniteField, d: int, indices: Iterable[int]) -> "PointSet":
        return cls(field, d, (FieldVector.from_index(field, d, int(i)).codes for i in indices))

    @classmethod
    def empty(cls, field: FiniteField, d: int) -> "PointSet":
        return cls(field, d, ())

    def __len__(self):
        return len(self.points)

    def __iter__(self) -> Iterator[FieldVector]:
        return (FieldVector(self.field, c) for c in self.points)

    def __getitem__(self, i: int) -> FieldVector:
        return FieldVector(self.field, self.points[i])

    def __contains__(self, item) -> bool:
        if isinstance(item, FieldVector):
            return item.field == self.field and item.codes in self.index
        return tuple(item) in self.index

    def __eq__(self, other):
        return (isinstance(other, PointSet) and self.field == other.field
                and self.d == other.d and set(self.points) == set(other.points))

    def __hash__(self):
        return hash((self.field, self.d, frozenset(self.points)))

    def __repr__(self):
        return f"PointSet({self.field}, d={self.d}, |A|={len(self)})"

    @cached_property
    def indices(self) -> np.ndarray:
        q = self.field.q
        idx = np.zeros(len(self), dtype=np.int64)
        for i in range(self.d):
            idx = idx * q + self.array[:, i]
        return idx

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.field.q ** self.d, dtype=bool)
        out[self.indices] = True
        return out

    def subset(self, positions: Iterable[int]) -> "PointSet":
        return PointSet(self.field, self.d, (self.points[int(i)] for i in positions))

    def sorted(self) -> "PointSet":
        return PointSet(self.field, self.d, sorted(self.points))

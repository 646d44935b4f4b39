"""Incomplete character sums over F_q^* and the counting decompositions built on them.

Every sum here has the shape sum_{s != 0} chi(s u) weighted by how often a
field value u occurs, so it is evaluated as (histogram of u) @ H with
``H = field.nonzero_sum_table``, giving exponent counts for zeta_p and
then an exact CycloNum.  Inequalities are checked on squared magnitudes so
that right-hand sides stay rational; the left side is enclosed with
certified interval arithmetic and the precision doubles until the verdict
is decided or the cap is reached.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cyclo import CertifiedInterval, CycloNum, certified_abs, cyclo_sum, embed_certified
from .errors import (AlphaZero, DimensionMismatch, FieldMismatch, NotATree)
from .field import FieldVector, FiniteField, PointSet, all_vector_codes, dot_matrix
from .graphs import EdgeLabeling, Graph

PRECISION_START = 64
PRECISION_CAP = 512


class BoundVerdict(str, Enum):
    CONFIRMED = "CONFIRMED"
    VIOLATED = "VIOLATED"
    INDETERMINATE = "INDETERMINATE"


@dataclass
class BoundCheck:
    """Outcome of checking lhs <= rhs where lhs is a squared magnitude.

    ``tight`` records that the final enclosure of lhs contains rhs (equality
    when lhs is exact).
    """

    lhs: CertifiedInterval
    rhs: Fraction | CertifiedInterval
    verdict: BoundVerdict
    precision_used: int
    tight: bool = False
    value: CycloNum | None = None

    @property
    def confirmed(self) -> bool:
        return self.verdict is BoundVerdict.CONFIRMED


def _as_interval(x) -> CertifiedInterval:
    return x if isinstance(x, CertifiedInterval) else CertifiedInterval.point(x)


def certify_le(lhs: Callable[[int], CertifiedInterval], rhs: Callable[[int], CertifiedInterval | Fraction],
               precision_cap: int = PRECISION_CAP, value: CycloNum | None = None) -> BoundCheck:
    """Decide lhs <= rhs from enclosures, doubling precision from 64 bits up to the cap."""
    if precision_cap < PRECISION_START:
        raise ValueError(f"precision cap must be >= {PRECISION_START}")
    bits = PRECISION_START
    while True:
        lo_box = _as_interval(lhs(bits))
        raw_rhs = rhs(bits)
        hi_box = _as_interval(raw_rhs)
        tight = lo_box.lo <= hi_box.hi and hi_box.lo <= lo_box.hi
        if lo_box.hi <= hi_box.lo:
            verdict = BoundVerdict.CONFIRMED
        elif lo_box.lo > hi_box.hi:
            verdict = BoundVerdict.VIOLATED
        else:
            verdict = BoundVerdict.INDETERMINATE
        if verdict is not BoundVerdict.INDETERMINATE or bits * 2 > precision_cap:
            return BoundCheck(lo_box, raw_rhs, verdict, bits, tight, value)
        bits *= 2


def check_squared_bound(value: CycloNum, rhs_sq: Fraction, precision_cap: int = PRECISION_CAP) -> BoundCheck:
    """|value|^2 <= rhs_sq with an exact rational right side."""
    sq = value.abs_sq()
    return certify_le(lambda bits: embed_certified(sq, bits), lambda bits: Fraction(rhs_sq),
                      precision_cap, value)


# -- S_{A, alpha} -------------------------------------------------------------

def _alpha_code(field: FiniteField, alpha, theorem_mode: bool) -> int:
    code = field(alpha).code
    if theorem_mode and code == 0:
        raise AlphaZero("the bound requires a nonzero alpha")
    return code


def _same_space(*sets: PointSet):
    f, d = sets[0].field, sets[0].d
    for A in sets[1:]:
        if A.field != f:
            raise FieldMismatch(f"{A.field} vs {f}")
        if A.d != d:
            raise DimensionMismatch(f"dimension {A.d} vs {d}")


def s_sum_histograms(A: PointSet, alpha: int, xs: np.ndarray) -> np.ndarray:
    """Exponent counts of S_{A,alpha}(x) for each row x of `xs` (codes), shape (len(xs), p)."""
    f = A.field
    out = np.zeros((xs.shape[0], f.p), dtype=np.int64)
    if len(A) == 0 or xs.shape[0] == 0:
        return out
    H = f.nonzero_sum_table
    u = f.sub_arr(dot_matrix(f, xs, A.array), alpha)
    for row, us in enumerate(u):
        out[row] = np.bincount(us, minlength=f.q) @ H
    return out


def s_sum_values(A: PointSet, alpha, xs: np.ndarray) -> list[CycloNum]:
    f = A.field
    hist = s_sum_histograms(A, f(alpha).code, np.asarray(xs, dtype=np.int64).reshape(-1, A.d))
    return [CycloNum.from_exponent_counts(f.p, h) for h in hist]


def s_sum(A: PointSet, alpha, x: FieldVector) -> CycloNum:
    """S_{A,alpha}(x) = sum_{s != 0} sum_{y in A} chi(s (x.y - alpha))."""
    if x.field != A.field:
        raise FieldMismatch(f"{x.field} vs {A.field}")
    if x.d != A.d:
        raise DimensionMismatch(f"vector of dimension {x.d} against a set in dimension {A.d}")
    return s_sum_values(A, alpha, np.array([x.codes]))[0]


def v_sum(A: PointSet, B: PointSet, alpha, *, theorem_mode: bool = True,
          precision_cap: int = PRECISION_CAP) -> tuple[CycloNum, BoundCheck]:
    """v(alpha) = sum_{x in B} S_{A,alpha}(x), checked against |v|^2 <= |A||B| q^(d+1)."""
    _same_space(A, B)
    f = A.field
    a = _alpha_code(f, alpha, theorem_mode)
    hist = s_sum_histograms(A, a, B.array).sum(axis=0) if len(B) else np.zeros(f.p, np.int64)
    v = CycloNum.from_exponent_counts(f.p, hist)
    rhs = Fraction(len(A) * len(B) * f.q ** (A.d + 1))
    return v, check_squared_bound(v, rhs, precision_cap)


def s_sum_energy(A: PointSet, alpha) -> CycloNum:
    """sum over all x in F_q^d of |S_{A,alpha}(x)|^2 (the left side before the dilate count)."""
    codes = all_vector_codes(A.field, A.d)
    return cyclo_sum(A.field.p, (z.abs_sq() for z in s_sum_values(A, alpha, codes)))


def dilate_energy(A: PointSet, alpha, *, theorem_mode: bool = True,
                  precision_cap: int = PRECISION_CAP) -> tuple[CycloNum, BoundCheck]:
    """sum_{s,s' != 0} sum_{y,y' in A, s y = s' y'} chi(alpha (s' - s)), checked against |A| q.

    Pairs (y, y') with s y = s' y' are counted as |sA n s'A|, using that
    scaling by a nonzero s is injective.
    """
    f = A.field
    a = _alpha_code(f, alpha, theorem_mode)
    counts = np.zeros(f.p, dtype=np.int64)
    if len(A):
        size = f.q ** A.d
        units = np.arange(1, f.q, dtype=np.int64)
        member = np.zeros((units.size, size), dtype=np.int64)
        for r, s in enumerate(units):
            scaled = f.mul_arr(A.array, s)
            idx = np.zeros(len(A), dtype=np.int64)
            for i in range(A.d):
                idx = idx * f.q + scaled[:, i]
            member[r, idx] = 1
        overlap = member @ member.T
        expo = f.trace_arr(f.mul_arr(f.sub_arr(units[None, :], units[:, None]), a))
        np.add.at(counts, expo.ravel(), overlap.ravel())
    value = CycloNum.from_exponent_counts(f.p, counts)
    rhs = Fraction(len(A) ** 2 * f.q ** 2)
    return value, check_squared_bound(value, rhs, precision_cap)


# -- counting decompositions --------------------------------------------------

@dataclass
class RDecomposition:
    """Split of N_G(alpha) by the number m of nonzero frequencies.

    ``subset_terms`` maps each edge subset (tuple of edge ids) to its
    contribution, already scaled by q^-k.
    """

    graph: Graph
    labeling: tuple[int, ...]
    terms: list[CycloNum]
    total: Fraction
    subset_terms: dict = dc_field(default_factory=dict)

    @property
    def term_sum(self) -> CycloNum:
        return cyclo_sum(self.terms[0].p, self.terms)


def path2_decomposition(A1: PointSet, A2: PointSet, A3: PointSet, alpha1, alpha2, *,
                        theorem_mode: bool = True) -> RDecomposition:
    """N(alpha1, alpha2) for the path 1-2-3 as I + II + III.

    I has s = t = 0, II exactly one of s, t nonzero, III both nonzero.  With
    S1 = S_{A1,alpha1} and S3 = S_{A3,alpha2} evaluated on A2:
    I = q^-2 |A1||A2||A3|, II = q^-2 (|A3| sum S1 + |A1| sum S3),
    III = q^-2 sum S1 S3.
    """
    _same_space(A1, A2, A3)
    f = A1.field
    p, q = f.p, f.q
    a1 = _alpha_code(f, alpha1, theorem_mode)
    a2 = _alpha_code(f, alpha2, theorem_mode)
    scale = Fraction(1, q * q)
    s1 = [CycloNum.from_exponent_counts(p, h) for h in s_sum_histograms(A1, a1, A2.array)]
    s3 = [CycloNum.from_exponent_counts(p, h) for h in s_sum_histograms(A3, a2, A2.array)]
    term1 = CycloNum.rational(p, scale * len(A1) * len(A2) * len(A3))
    term2 = (cyclo_sum(p, s1) * len(A3) + cyclo_sum(p, s3) * len(A1)) * scale
    term3 = cyclo_sum(p, (x * y for x, y in zip(s1, s3))) * scale
    terms = [term1, term2, term3]
    total = cyclo_sum(p, terms).as_rational()
    return RDecomposition(Graph.path(3), (a1, a2), terms, total)


def _edge_kernel(f: FiniteField, alpha: int) -> np.ndarray:
    """g[u] = sum_{s != 0} chi(s (u - alpha)) for every field code u."""
    H = f.nonzero_sum_table
    rows = H[f.sub_arr(np.arange(f.q, dtype=np.int64), alpha)]
    return np.array([int(CycloNum.from_exponent_counts(f.p, r).as_rational()) for r in rows],
                    dtype=np.int64)


def _forest_sum(sets: Sequence[PointSet], edges: Sequence[tuple[int, int]],
                kernels: dict, dtype) -> int:
    """sum over x at touched vertices of prod_e kernel_e(x_i . x_j) for a forest of edges."""
    f = sets[0].field
    adj: dict[int, list[tuple[int, int]]] = {}
    for e, (i, j) in zip(kernels, edges):
        adj.setdefault(i, []).append((j, e))
        adj.setdefault(j, []).append((i, e))
    seen: set[int] = set()
    total = 1
    for root in sorted(adj):
        if root in seen:
            continue
        # iterative post-order from the root
        order, parent, stack = [], {root: (None, None)}, [root]
        seen.add(root)
        while stack:
            v = stack.pop()
            order.append(v)
            for w, e in adj[v]:
                if w not in seen:
                    seen.add(w)
                    parent[w] = (v, e)
                    stack.append(w)
        message = {v: np.ones(len(sets[v - 1]), dtype=dtype) for v in order}
        for v in reversed(order[1:]):
            u, e = parent[v]
            K = kernels[e][dot_matrix(f, sets[u - 1].array, sets[v - 1].array)].astype(dtype)
            message[u] = message[u] * (K @ message[v])
        total *= int(message[root].sum())
    return total


def r_decomposition(G: Graph, A_list: Sequence[PointSet], alpha, *,
                    theorem_mode: bool = False) -> RDecomposition:
    """R_m = q^-k sum over s-vectors with exactly m nonzero coordinates, for a tree G.

    Each edge subset T contributes q^-k (prod of |A_i| off T) times the sum
    over the vertices of T of prod_{e in T} g_e(x_i . x_j), where g_e is the
    edge's nonzero-frequency character sum; the latter is evaluated by
    passing messages along each tree component of T.
    """
    if not G.is_tree:
        raise NotATree(f"{G!r} is not a tree")
    if len(A_list) != G.k:
        raise DimensionMismatch(f"{len(A_list)} sets for a graph on {G.k} vertices")
    _same_space(*A_list)
    f = A_list[0].field
    p, q, k = f.p, f.q, G.num_edges
    codes = alpha.codes if isinstance(alpha, EdgeLabeling) else tuple(f(a).code for a in alpha)
    if len(codes) != k:
        raise DimensionMismatch(f"{len(codes)} labels for {k} edges")
    if theorem_mode and 0 in codes:
        raise AlphaZero("tree decomposition in theorem mode needs nonzero labels")
    kernels = [_edge_kernel(f, a) for a in codes]
    sizes = [len(A) for A in A_list]
    bound = (q - 1) ** k
    for s in sizes:
        bound *= max(s, 1)
    dtype = np.int64 if bound < (1 << 62) else object
    scale = Fraction(1, q ** k)
    sums = [Fraction(0)] * (k + 1)
    subset_terms = {}
    for m in range(k + 1):
        for T in itertools.combinations(range(k), m):
            touched = {v for e in T for v in G.edges[e]}
            rest = 1
            for v in range(1, G.k + 1):
                if v not in touched:
                    rest *= sizes[v - 1]
            inner = _forest_sum(A_list, [G.edges[e] for e in T], {e: kernels[e] for e in T}, dtype) if T else 1
            term = scale * rest * inner
            subset_terms[T] = term
            sums[m] += term
    terms = [CycloNum.rational(p, s) for s in sums]
    return RDecomposition(G, codes, terms, sum(sums, Fraction(0)), subset_terms)


# -- bilinear and star bounds -------------------------------------------------

def _abs_box(z: CycloNum, bits: int) -> CertifiedInterval:
    return _as_interval(certified_abs(z, bits))


def _real_box(z: CycloNum, bits: int) -> CertifiedInterval:
    return embed_certified(z, bits)


def _sum_boxes(boxes) -> CertifiedInterval:
    lo = hi = Fraction(0)
    for b in boxes:
        lo += b.lo
        hi += b.hi
    return CertifiedInterval(lo, hi)


def _max_boxes(boxes) -> CertifiedInterval:
    boxes = list(boxes)
    if not boxes:
        return CertifiedInterval.point(0)
    return CertifiedInterval(max(b.lo for b in boxes), max(b.hi for b in boxes))


def _mul_nonneg(*boxes: CertifiedInterval) -> CertifiedInterval:
    lo = hi = Fraction(1)
    for b in boxes:
        lo *= max(b.lo, Fraction(0))
        hi *= b.hi
    return CertifiedInterval(lo, hi)


def _to_cyclo(p: int, x) -> CycloNum:
    return x if isinstance(x, CycloNum) else CycloNum.rational(p, x)


def schur_bound_check(c, z, y, *, p: int | None = None,
                      precision_cap: int = PRECISION_CAP) -> BoundCheck:
    """|sum_{j,k} c_jk z_j y_k|^2 <= R C (sum |z_j|^2)(sum |y_k|^2).

    R is the largest absolute row sum of c and C the largest absolute column
    sum (over j = 1..m).  Entries may be CycloNums or rationals; absolute
    values of irrational entries are enclosed with certified arithmetic.
    """
    rows = [list(r) for r in c]
    m = len(rows)
    n = len(rows[0]) if m else 0
    if any(len(r) != n for r in rows):
        raise DimensionMismatch("ragged coefficient matrix")
    if len(z) != m or len(y) != n:
        raise DimensionMismatch(f"matrix is {m}x{n} but |z| = {len(z)}, |y| = {len(y)}")
    if p is None:
        p = next((v.p for v in itertools.chain(itertools.chain.from_iterable(rows), z, y)
                  if isinstance(v, CycloNum)), 2)
    C = [[_to_cyclo(p, v) for v in r] for r in rows]
    Z = [_to_cyclo(p, v) for v in z]
    Y = [_to_cyclo(p, v) for v in y]
    form = cyclo_sum(p, (C[j][k] * Z[j] * Y[k] for j in range(m) for k in range(n)))
    lhs_sq = form.abs_sq()
    z_norm = cyclo_sum(p, (v.abs_sq() for v in Z))
    y_norm = cyclo_sum(p, (v.abs_sq() for v in Y))

    def rhs(bits: int) -> CertifiedInterval | Fraction:
        absval = [[_abs_box(v, bits) for v in r] for r in C]
        R = _max_boxes(_sum_boxes(r) for r in absval)
        Cmax = _max_boxes(_sum_boxes(absval[j][k] for j in range(m)) for k in range(n))
        box = _mul_nonneg(R, Cmax, _real_box(z_norm, bits), _real_box(y_norm, bits))
        return box.lo if box.is_point() else box

    return certify_le(lambda bits: embed_certified(lhs_sq, bits), rhs, precision_cap, form)


def star_character_sum(A_center: PointSet, A_leaves: Sequence[PointSet], alphas) -> CycloNum:
    """sum_{x_w in A_center} prod_l S_{A_{u_l}, alpha_l}(x_w)."""
    _same_space(A_center, *A_leaves)
    f = A_center.field
    if len(alphas) != len(A_leaves):
        raise DimensionMismatch(f"{len(alphas)} labels for {len(A_leaves)} leaves")
    per_leaf = [s_sum_values(L, a, A_center.array) for L, a in zip(A_leaves, alphas)]
    one = CycloNum.rational(f.p, 1)
    prods = []
    for i in range(len(A_center)):
        acc = one
        for vals in per_leaf:
            acc = acc * vals[i]
        prods.append(acc)
    return cyclo_sum(f.p, prods)


def star_term_bound(A_center: PointSet, A_leaves: Sequence[PointSet], alphas, *,
                    theorem_mode: bool = True, precision_cap: int = PRECISION_CAP) -> BoundCheck:
    """Check the star character sum against prod_l |A_{u_l}|^(1/2) q^((d+1)/2), squared.

    With one leaf the inner Hoelder step is unavailable and the bound is the
    aggregate one, |A_u||A_center| q^(d+1).
    """
    f = A_center.field
    if not A_leaves:
        raise DimensionMismatch("a star needs at least one leaf")
    for a in alphas:
        _alpha_code(f, a, theorem_mode)
    value = star_character_sum(A_center, A_leaves, alphas)
    rhs = Fraction(1)
    for L in A_leaves:
        rhs *= len(L) * f.q ** (A_center.d + 1)
    if len(A_leaves) == 1:
        rhs *= len(A_center)
    return check_squared_bound(value, rhs, precision_cap)

"""Dot-product sets, fiber counts, and graph images Pi_G(S).

Labelings alpha: E -> F_q are encoded as integers by an odometer over the
canonical (sorted) edge order, first edge most significant:
``code = sum_e alpha_e * q^(|E|-1-e)``.  The same encoding, with arity l in
place of |E|, indexes tuples (t_1, ..., t_l) for Pi_{x_1..x_l}(A).

Graph images and realization counts come from one search routine.  Vertices
are placed in a connectivity-respecting order; each step extends the current
frontier of partial assignments by the candidates for the new vertex, applies
the edge constraints to already placed neighbours at once, and then merges
states that can no longer be told apart (same partial labeling, same choices
at vertices that still have unplaced neighbours).  Merged states carry
multiplicities, so the same pass yields N_G(alpha) for every alpha.
"""
from __future__ import annotations

import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (ArityError, CapExceeded, DimensionMismatch, Disconnected, EmptyQuery,
                     FieldMismatch, FormatError, PrefixNotInProjection)
from .field import FieldElement, FieldVector, FiniteField, PointSet, dot_matrix

#: tuple visits allowed for one search (candidate expansions, before merging)
ENUMERATION_CAP = 10 ** 8
#: largest label space q^|E| materialised as a bitset
LABEL_CAP = 1 << 28


class Graph:
    """A simple graph on vertices 1..k with a canonical sorted edge list."""

    def __init__(self, k: int, edges: Iterable[Sequence[int]]):
        if k < 1:
            raise ValueError(f"a graph needs at least one vertex, got k = {k}")
        norm = []
        for e in edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if not (1 <= i <= k and 1 <= j <= k):
                raise ValueError(f"edge {{{i}, {j}}} outside 1..{k}")
            norm.append((min(i, j), max(i, j)))
        if len(set(norm)) != len(norm):
            raise ValueError("repeated edge")
        self.k = k
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(norm))
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        adj: dict[int, list[int]] = {v: [] for v in range(1, k + 1)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        self.adjacency = {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def __eq__(self, other):
        return isinstance(other, Graph) and (self.k, self.edges) == (other.k, other.edges)

    def __hash__(self):
        return hash((self.k, self.edges))

    def __repr__(self):
        return f"Graph(k={self.k}, edges={list(self.edges)})"

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def is_connected(self) -> bool:
        seen = {1}
        todo = [1]
        while todo:
            v = todo.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == self.k

    @property
    def is_tree(self) -> bool:
        return self.is_connected and self.num_edges == self.k - 1

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(min(u, v), max(u, v))]

    def processing_order(self, order: Sequence[int] | None = None) -> tuple[int, ...]:
        """A vertex order in which every vertex after the first has an earlier neighbour.

        Defaults to breadth-first order from vertex 1.  A supplied order is
        validated.
        """
        if not self.is_connected:
            raise Disconnected(f"{self!r} is not connected")
        if order is None:
            out, seen, todo = [], {1}, deque([1])
            while todo:
                v = todo.popleft()
                out.append(v)
                for w in self.adjacency[v]:
                    if w not in seen:
                        seen.add(w)
                        todo.append(w)
            return tuple(out)
        order = tuple(int(v) for v in order)
        if sorted(order) != list(range(1, self.k + 1)):
            raise ValueError(f"{order} is not a permutation of 1..{self.k}")
        placed = {order[0]}
        for v in order[1:]:
            if not placed.intersection(self.adjacency[v]):
                raise ValueError(f"vertex {v} has no earlier neighbour in {order}")
            placed.add(v)
        return order

    # -- presets ----------------------------------------------------------
    @classmethod
    def path(cls, num_vertices: int) -> "Graph":
        return cls(num_vertices, [(i, i + 1) for i in range(1, num_vertices)])

    @classmethod
    def complete(cls, num_vertices: int) -> "Graph":
        return cls(num_vertices, itertools.combinations(range(1, num_vertices + 1), 2))

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        """K_{1,leaves} with centre 1."""
        return cls(leaves + 1, [(1, j) for j in range(2, leaves + 2)])

    @classmethod
    def paw(cls) -> "Graph":
        """Triangle 1-2-3 with a pendant vertex 4 attached to 3."""
        return cls(4, [(1, 2), (1, 3), (2, 3), (3, 4)])

    @classmethod
    def preset(cls, name: str) -> "Graph":
        """K2, K3, P3, P4, K13 (or K1,3), paw, or parametrised Pn / Kn / K1,n."""
        key = name.strip().upper().replace("_", "").replace(",", "")
        if key == "PAW":
            return cls.paw()
        if key.startswith("K1") and len(key) > 2:
            return cls.star(int(key[2:]))
        if key.startswith("P") and key[1:].isdigit():
            return cls.path(int(key[1:]))
        if key.startswith("K") and key[1:].isdigit():
            return cls.complete(int(key[1:]))
        raise ValueError(f"unknown graph preset {name!r}")

    # -- text format: "k" then one "i j" per line ------------------------
    def to_text(self) -> str:
        lines = [str(self.k)] + [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
        rows = [r for r in rows if r]
        if not rows or len(rows[0]) != 1:
            raise FormatError("graph file must start with a line holding k")
        try:
            k = int(rows[0][0])
            edges = [(int(a), int(b)) for a, b in rows[1:]]
        except ValueError as exc:
            raise FormatError(f"bad graph file: {exc}") from None
        return cls(k, edges)


@dataclass(frozen=True)
class EdgeLabeling:
    """alpha: E -> F_q as a row vector indexed by the canonical edge order."""

    graph: Graph
    labels: tuple[FieldElement, ...]

    def __post_init__(self):
        if len(self.labels) != self.graph.num_edges:
            raise DimensionMismatch(f"{len(self.labels)} labels for {self.graph.num_edges} edges")
        fields = {lab.field for lab in self.labels}
        if len(fields) > 1:
            raise FieldMismatch("labels from different fields")

    @classmethod
    def of(cls, graph: Graph, field: FiniteField, values: Iterable) -> "EdgeLabeling":
        return cls(graph, tuple(field(v) for v in values))

    @classmethod
    def from_code(cls, graph: Graph, field: FiniteField, code: int) -> "EdgeLabeling":
        return cls(graph, tuple(field(c) if field.n == 1 else FieldElement(field, c)
                                for c in decode_labels(code, field.q, graph.num_edges)))

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(lab.code for lab in self.labels)

    @property
    def code(self) -> int:
        q = self.labels[0].field.q if self.labels else 1
        return encode_labels(self.codes, q)

    def __getitem__(self, edge) -> FieldElement:
        if isinstance(edge, int):
            return self.labels[edge]
        return self.labels[self.graph.edge_id(*edge)]


def encode_labels(codes: Sequence[int], q: int) -> int:
    out = 0
    for c in codes:
        out = out * q + int(c)
    return out


def decode_labels(code: int, q: int, arity: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        code, r = divmod(code, q)
        out.append(r)
    return tuple(reversed(out))


class LabelSet:
    """A subset of F_q^arity stored as a bitset over odometer-encoded tuples."""

    def __init__(self, q: int, arity: int, bits: np.ndarray | None = None, graph: Graph | None = None):
        if graph is not None and graph.num_edges != arity:
            raise ArityError(f"arity {arity} does not match {graph.num_edges} edges")
        size = q ** arity
        if size > LABEL_CAP:
            raise CapExceeded(f"label space q^{arity} = {size} exceeds the cap {LABEL_CAP}")
        if bits is None:
            bits = np.zeros(size, dtype=bool)
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (size,):
            raise ValueError(f"bitset must have {size} entries")
        self.q = q
        self.arity = arity
        self.graph = graph
        self.bits = bits

    @property
    def size(self) -> int:
        return self.bits.size

    def popcount(self) -> int:
        return int(self.bits.sum())

    __len__ = popcount

    def __contains__(self, item) -> bool:
        if isinstance(item, EdgeLabeling):
            item = item.codes
        if isinstance(item, (int, np.integer)):
            return bool(self.bits[int(item)])
        return bool(self.bits[encode_labels([getattr(c, "code", c) for c in item], self.q)])

    def codes(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def tuples(self) -> Iterator[tuple[int, ...]]:
        for c in self.codes():
            yield decode_labels(int(c), self.q, self.arity)

    def _same_space(self, other: "LabelSet"):
        if (self.q, self.arity) != (other.q, other.arity):
            raise ArityError("label sets over different spaces")

    def __or__(self, other: "LabelSet") -> "LabelSet":
        self._same_space(other)
        return LabelSet(self.q, self.arity, self.bits | other.bits, self.graph)

    def issubset(self, other: "LabelSet") -> bool:
        self._same_space(other)
        return not np.any(self.bits & ~other.bits)

    def __le__(self, other):
        return self.issubset(other)

    def __eq__(self, other):
        return (isinstance(other, LabelSet) and (self.q, self.arity) == (other.q, other.arity)
                and np.array_equal(self.bits, other.bits))

    __hash__ = None

    def __repr__(self):
        return f"LabelSet(q={self.q}, arity={self.arity}, popcount={self.popcount()})"

    def nonzero_coverage(self) -> Fraction:
        """Fraction of (F_q^*)^arity that is present."""
        mask = np.ones(self.size, dtype=bool)
        codes = np.arange(self.size, dtype=np.int64)
        for _ in range(self.arity):
            codes, r = np.divmod(codes, self.q)
            mask &= r != 0
        total = int(mask.sum())
        return Fraction(int((self.bits & mask).sum()), total) if total else Fraction(0)

    # -- serialisation ----------------------------------------------------
    def to_hex(self) -> str:
        """Bit i of the labeling order is bit i of the string, most significant first."""
        if self.size == 0:
            return ""
        packed = np.packbits(self.bits, bitorder="big")
        return packed.tobytes().hex()

    def to_text(self) -> str:
        edges = " ".join(f"{i}-{j}" for i, j in self.graph.edges) if self.graph else "-"
        return (f"# ffdot labelset v1\nq {self.q}\narity {self.arity}\nedges {edges}\n"
                f"bits {self.size}\n{self.to_hex()}\n")

    @classmethod
    def from_text(cls, text: str, graph: Graph | None = None) -> "LabelSet":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        try:
            header = dict(ln.split(None, 1) for ln in lines[:4])
            q, arity, nbits = int(header["q"]), int(header["arity"]), int(header["bits"])
            hexstr = lines[4] if len(lines) > 4 else ""
        except (KeyError, ValueError, IndexError) as exc:
            raise FormatError(f"bad labelset file: {exc}") from None
        if graph is None and header["edges"] != "-":
            pairs = [tuple(int(v) for v in e.split("-")) for e in header["edges"].split()]
            graph = Graph(max(max(e) for e in pairs), pairs)
        raw = np.frombuffer(bytes.fromhex(hexstr), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="big")[:nbits].astype(bool)
        return cls(q, arity, bits, graph)


# -- product subsets ---------------------------------------------------------

class ProductSubset:
    """S inside A_1 x ... x A_m, either FULL or an explicit set of index tuples.

    Explicit tuples index into the component PointSets and are kept sorted
    and duplicate-free.
    """

    def __init__(self, sets: Sequence[PointSet], tuples: np.ndarray | Iterable | None = None):
        sets = tuple(sets)
        if not sets:
            raise ArityError("a product subset needs at least one component")
        f, d = sets[0].field, sets[0].d
        for A in sets:
            if A.field != f:
                raise FieldMismatch("components over different fields")
            if A.d != d:
                raise DimensionMismatch("components of different dimension")
        self.sets = sets
        if tuples is not None:
            arr = np.asarray(list(tuples) if not isinstance(tuples, np.ndarray) else tuples,
                             dtype=np.int64).reshape(-1, len(sets))
            for i, A in enumerate(sets):
                if arr.size and (arr[:, i].min() < 0 or arr[:, i].max() >= len(A)):
                    raise IndexError(f"tuple index out of range for component {i + 1}")
            arr = np.unique(arr, axis=0) if arr.size else arr
            arr.setflags(write=False)
            tuples = arr
        self.tuples = tuples

    @classmethod
    def full(cls, sets: Sequence[PointSet]) -> "ProductSubset":
        return cls(sets, None)

    @property
    def is_full(self) -> bool:
        return self.tuples is None

    @property
    def arity(self) -> int:
        return len(self.sets)

    @property
    def field(self) -> FiniteField:
        return self.sets[0].field

    @property
    def d(self) -> int:
        return self.sets[0].d

    @property
    def product_size(self) -> int:
        return reduce(lambda a, b: a * b, (len(A) for A in self.sets), 1)

    def __len__(self):
        return self.product_size if self.is_full else int(self.tuples.shape[0])

    def index_tuples(self) -> np.ndarray:
        """All member tuples as an (|S|, m) array, FULL materialised in odometer order."""
        if not self.is_full:
            return np.asarray(self.tuples)
        if self.product_size > ENUMERATION_CAP:
            raise CapExceeded(f"|S| = {self.product_size} exceeds the cap {ENUMERATION_CAP}")
        sizes = [len(A) for A in self.sets]
        if 0 in sizes:
            return np.zeros((0, self.arity), dtype=np.int64)
        return np.indices(sizes, dtype=np.int64).reshape(self.arity, -1).T

    def __contains__(self, item) -> bool:
        item = tuple(int(i) for i in item)
        if len(item) != self.arity:
            return False
        if self.is_full:
            return all(0 <= i < len(A) for i, A in zip(item, self.sets))
        return bool(np.any(np.all(self.tuples == np.asarray(item), axis=1)))

    def __repr__(self):
        kind = "FULL" if self.is_full else f"|S|={len(self)}"
        return f"ProductSubset(arity={self.arity}, {kind})"

    def points(self, item: Sequence[int]) -> tuple[FieldVector, ...]:
        return tuple(A[int(i)] for A, i in zip(self.sets, item))


def random_product_subset(sets: Sequence[PointSet], density, seed: int) -> ProductSubset:
    """Keep each tuple of the product independently with probability `density`.

    Uses numpy's PCG64 seeded with `seed`; tuple t (odometer order) is kept
    iff the t-th draw of ``integers(0, den)`` is below ``num`` where
    density = num/den.  Density 1 returns FULL.
    """
    density = Fraction(density)
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    S = ProductSubset.full(sets)
    if density == 1:
        return S
    total = S.product_size
    if total > ENUMERATION_CAP:
        raise CapExceeded(f"product size {total} exceeds the cap {ENUMERATION_CAP}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(0, density.denominator, size=total, dtype=np.int64)
    keep = np.flatnonzero(draws < density.numerator)
    sizes = [len(A) for A in sets]
    tuples = np.stack(np.unravel_index(keep, sizes), axis=1) if total else np.zeros((0, len(sets)), np.int64)
    return ProductSubset(sets, tuples)


def project_prefix(S: ProductSubset, length: int) -> ProductSubset:
    """S' = prefixes of length `length` that extend to a member of S."""
    if not 1 <= length < S.arity:
        raise ArityError(f"prefix length must lie in [1, {S.arity - 1}], got {length}")
    if S.is_full:
        return ProductSubset.full(S.sets[:length])
    return ProductSubset(S.sets[:length], S.tuples[:, :length])


def _prefix_indices(S: ProductSubset, prefix: Sequence) -> tuple[int, ...]:
    out = []
    for A, item in zip(S.sets, prefix):
        if isinstance(item, FieldVector):
            if item not in A:
                raise PrefixNotInProjection(f"{item!r} is not in its component set")
            out.append(A.index[item.codes])
        else:
            out.append(int(item))
    return tuple(out)


def fiber_of(S: ProductSubset, prefix: Sequence) -> PointSet:
    """S(x_1..x_l) = last-coordinate points completing the prefix inside S.

    `prefix` holds either component indices or FieldVectors and must have
    length arity - 1.
    """
    if len(prefix) != S.arity - 1:
        raise ArityError(f"prefix must have length {S.arity - 1}")
    idx = _prefix_indices(S, prefix)
    last = S.sets[-1]
    if any(not 0 <= i < len(A) for i, A in zip(idx, S.sets)):
        raise PrefixNotInProjection(f"{idx} is not a valid prefix")
    if S.is_full:
        if len(last) == 0:
            raise PrefixNotInProjection(f"{idx} has no extension")
        return last
    rows = S.tuples[np.all(S.tuples[:, :-1] == np.asarray(idx, dtype=np.int64), axis=1)]
    if rows.shape[0] == 0:
        raise PrefixNotInProjection(f"{idx} is not in the projection")
    return last.subset(rows[:, -1])


# -- dot-product sets and fibers -----------------------------------------------

def dot_product_set(A: PointSet) -> set[FieldElement]:
    """Pi(A) = {x.y : x, y in A} over ordered pairs, x = y included."""
    if len(A) == 0:
        return set()
    codes = np.unique(dot_matrix(A.field, A.array, A.array))
    return {FieldElement(A.field, int(c)) for c in codes}


def distance_set(A: PointSet) -> set[FieldElement]:
    """Delta(A) = {||x - y|| : x, y in A} with ||z|| = sum z_i^2."""
    if len(A) == 0:
        return set()
    f = A.field
    diff = f.sub_arr(A.array[:, None, :], A.array[None, :, :])
    acc = np.zeros(diff.shape[:2], dtype=np.int64)
    for i in range(A.d):
        acc = f.add_arr(acc, f.mul_arr(diff[..., i], diff[..., i]))
    return {FieldElement(f, int(c)) for c in np.unique(acc)}


def _vectors_array(field: FiniteField, d: int, xs: Sequence[FieldVector]) -> np.ndarray:
    if len(xs) == 0:
        raise EmptyQuery("need at least one vector x_i")
    for x in xs:
        if x.field != field:
            raise FieldMismatch(f"{x.field} vs {field}")
        if x.d != d:
            raise DimensionMismatch(f"vector of dimension {x.d} against sets in dimension {d}")
    return np.array([x.codes for x in xs], dtype=np.int64)


def fiber_codes(A: PointSet, xs: Sequence[FieldVector]) -> np.ndarray:
    """Odometer code of (x_1.y, ..., x_l.y) for each y in A."""
    X = _vectors_array(A.field, A.d, xs)
    if len(A) == 0:
        return np.zeros(0, dtype=np.int64)
    dots = dot_matrix(A.field, X, A.array)
    codes = np.zeros(len(A), dtype=np.int64)
    for row in dots:
        codes = codes * A.field.q + row
    return codes


def fiber_histogram(A: PointSet, xs: Sequence[FieldVector]) -> np.ndarray:
    """Pi^A_{x_1..x_l}(t) for every t in F_q^l, in odometer order."""
    q, ell = A.field.q, len(xs)
    if q ** ell > LABEL_CAP:
        raise CapExceeded(f"q^l = {q ** ell} exceeds the cap {LABEL_CAP}")
    return np.bincount(fiber_codes(A, xs), minlength=q ** ell)


def pi_fiber_count(A: PointSet, xs: Sequence[FieldVector], ts: Sequence) -> int:
    """|{y in A : x_i . y = t_i for all i}|."""
    if len(ts) != len(xs):
        raise DimensionMismatch(f"{len(xs)} vectors but {len(ts)} targets")
    X = _vectors_array(A.field, A.d, xs)
    if len(A) == 0:
        return 0
    t = np.array([A.field(v).code for v in ts], dtype=np.int64)
    dots = dot_matrix(A.field, X, A.array)
    return int(np.all(dots == t[:, None], axis=0).sum())


def pi_image(A: PointSet, xs: Sequence[FieldVector]) -> LabelSet:
    """Pi_{x_1..x_l}(A) = {(x_1.y, ..., x_l.y) : y in A}."""
    out = LabelSet(A.field.q, len(xs))
    out.bits[fiber_codes(A, xs)] = True
    return out


# -- graph search ---------------------------------------------------------------

def _check_family(G: Graph, sets: Sequence[PointSet]):
    if not G.is_connected:
        raise Disconnected(f"{G!r} is not connected")
    if len(sets) != G.k:
        raise DimensionMismatch(f"{len(sets)} sets for a graph on {G.k} vertices")
    f, d = sets[0].field, sets[0].d
    for A in sets:
        if A.field != f:
            raise FieldMismatch("sets over different fields")
        if A.d != d:
            raise DimensionMismatch("sets of different dimension")


@dataclass
class _Trie:
    """Children of each prefix node at one depth: parent -> (child id, vertex index)."""

    start: np.ndarray
    count: np.ndarray
    child: np.ndarray
    vidx: np.ndarray


def _full_trie(size: int) -> _Trie:
    return _Trie(np.array([0]), np.array([size]), np.zeros(size, dtype=np.int64),
                 np.arange(size, dtype=np.int64))


def _explicit_tries(tuples: np.ndarray, order: Sequence[int]) -> list[_Trie]:
    cols = tuples[:, [v - 1 for v in order]]
    if cols.shape[0]:
        cols = cols[np.lexsort(cols.T[::-1])]
    m, k = cols.shape
    tries = []
    parent_ids = np.zeros(m, dtype=np.int64)
    num_parents = 1
    for t in range(k):
        if m:
            new = np.ones(m, dtype=bool)
            new[1:] = np.any(cols[1:, :t + 1] != cols[:-1, :t + 1], axis=1)
            ids = np.cumsum(new) - 1
        else:
            new = np.zeros(0, dtype=bool)
            ids = np.zeros(0, dtype=np.int64)
        heads = np.flatnonzero(new)
        par = parent_ids[heads]
        count = np.bincount(par, minlength=num_parents)
        start = np.concatenate([[0], np.cumsum(count)[:-1]]).astype(np.int64)
        tries.append(_Trie(start, count, ids[heads], cols[heads, t]))
        parent_ids, num_parents = ids, len(heads)
    return tries


def _merge(keys: np.ndarray, mult: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if keys.shape[0] == 0:
        return keys, mult
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    out = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(out, inv.reshape(-1), mult)
    return uniq, out


def _search(G: Graph, S: ProductSubset, order: Sequence[int] | None = None,
            target: Sequence[int] | None = None, first: np.ndarray | None = None,
            ) -> tuple[np.ndarray, np.ndarray, int]:
    """Frontier search over S.

    Returns (label codes, multiplicities, tuple visits).  With `target` the
    edge labels are pinned, the codes column is all zeros, and the
    multiplicity sum is N_G(target).
    """
    sets = S.sets
    _check_family(G, sets)
    order = G.processing_order(order)
    pos = {v: t for t, v in enumerate(order)}
    k, q, m = G.k, S.field.q, G.num_edges
    if target is None and q ** m > LABEL_CAP:
        raise CapExceeded(f"label space q^|E| = {q ** m} exceeds the cap {LABEL_CAP}")
    weights = [q ** (m - 1 - e) for e in range(m)]
    last_use = {v: max((pos[w] for w in G.adjacency[v]), default=-1) for v in order}
    back = [[(G.edge_id(u, v), u) for u in G.adjacency[v] if pos[u] < t]
            for t, v in enumerate(order)]
    tables = {}
    for t, v in enumerate(order):
        for e, u in back[t]:
            tables[(u, v)] = dot_matrix(S.field, sets[u - 1].array, sets[v - 1].array)

    tries = _explicit_tries(S.tuples, order) if not S.is_full else None
    # state columns: prefix id, partial label code, one index column per vertex
    state = np.zeros((1, 2 + k), dtype=np.int64)
    mult = np.ones(1, dtype=np.int64)
    visits = 0
    for t, v in enumerate(order):
        trie = tries[t] if tries is not None else _full_trie(len(sets[v - 1]))
        if t == 0 and first is not None:
            keep = np.isin(trie.vidx, first)
            trie = _Trie(np.array([0]), np.array([int(keep.sum())]), trie.child[keep], trie.vidx[keep])
        pid = state[:, 0]
        cnt = trie.count[pid]
        total = int(cnt.sum())
        visits += total
        if visits > ENUMERATION_CAP:
            raise CapExceeded(f"search exceeded {ENUMERATION_CAP} tuple visits")
        rows = np.repeat(np.arange(state.shape[0]), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        slot = trie.start[pid][rows] + offs
        new = state[rows]
        new[:, 0] = trie.child[slot]
        new[:, 1 + v] = trie.vidx[slot]
        nm = mult[rows]
        keep = np.ones(new.shape[0], dtype=bool)
        for e, u in back[t]:
            lab = tables[(u, v)][new[:, 1 + u], new[:, 1 + v]]
            if target is not None:
                keep &= lab == target[e]
            else:
                new[:, 1] += lab * weights[e]
        if target is not None:
            new, nm = new[keep], nm[keep]
        for w in order[:t + 1]:
            if last_use[w] <= t:
                new[:, 1 + w] = 0
        state, mult = _merge(new, nm)
    return state[:, 1].copy(), mult, visits


def _search_chunk(args):
    G, S, order, first = args
    codes, mult, visits = _search(G, S, order, first=first)
    return codes, mult, visits


def realization_histogram(G: Graph, S: ProductSubset, order: Sequence[int] | None = None,
                          workers: int = 1) -> np.ndarray:
    """N_G(alpha) restricted to S for every labeling code alpha."""
    codes, mult = _run(G, S, order, workers)
    hist = np.zeros(S.field.q ** G.num_edges, dtype=np.int64)
    np.add.at(hist, codes, mult)
    return hist


def _run(G: Graph, S: ProductSubset, order, workers: int):
    if workers <= 1:
        codes, mult, _ = _search(G, S, order)
        return codes, mult
    order = G.processing_order(order)
    n_first = len(S.sets[order[0] - 1])
    parts = [c for c in np.array_split(np.arange(n_first), workers) if c.size]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_search_chunk, [(G, S, order, c) for c in parts]))
    codes = np.concatenate([r[0] for r in results]) if results else np.zeros(0, np.int64)
    mult = np.concatenate([r[1] for r in results]) if results else np.zeros(0, np.int64)
    return codes, mult


def graph_image(G: Graph, S: ProductSubset, order: Sequence[int] | None = None,
                workers: int = 1) -> LabelSet:
    """Pi_G(S): every labeling realised by some tuple of S.

    `workers` > 1 splits the first vertex's candidates across processes and
    ORs the partial bitsets.
    """
    codes, _ = _run(G, S, order, workers)
    out = LabelSet(S.field.q, G.num_edges, graph=G)
    out.bits[codes] = True
    return out


def count_realizations(G: Graph, sets: Sequence[PointSet] | ProductSubset, alpha,
                       order: Sequence[int] | None = None) -> int:
    """N_G(alpha): tuples (x_1..x_k) with x_i.x_j = alpha({i,j}) on every edge.

    Candidates violating an edge constraint are discarded as soon as both
    endpoints are placed.
    """
    S = sets if isinstance(sets, ProductSubset) else ProductSubset.full(sets)
    if isinstance(alpha, EdgeLabeling):
        target = alpha.codes
    else:
        target = tuple(S.field(a).code for a in alpha)
    if len(target) != G.num_edges:
        raise DimensionMismatch(f"{len(target)} labels for {G.num_edges} edges")
    _, mult, _ = _search(G, S, order, target=target)
    return int(mult.sum())

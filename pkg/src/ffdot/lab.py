"""Verification suites and coverage experiments.

Each entry point returns a :class:`~ffdot.report.Report`.  Randomness comes
from numpy's PCG64, seeded explicitly; a family of k sets drawn from base
seed ``b`` uses seed ``b + i`` for set i (0-based) and ``b + k`` for the
density draw of S, so every component has its own reproducible stream.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapExceeded, EmptyProjection
from .field import FieldElement, FieldVector, FiniteField, PointSet, dot_matrix, make_field
from .fourier import (GridFunction, OpCounter, fast_transform, fourier_transform, inverse_transform,
                      plancherel_check)
from .graphs import (Graph, ProductSubset, graph_image, random_product_subset,
                     realization_histogram)
from .io import read_point_set
from .report import Report, Verdict

#: cap on |prod A_i| * |A| for the moment-bound and average-image suites
SUITE_CAP = 1 << 24

SWEEP_COLUMNS = ("size", "trials", "mean_image_fraction", "min_image_fraction",
                 "mean_nonzero_coverage", "min_nonzero_coverage")
SWEEP_CSV_VERSION = 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def random_point_set(field: FiniteField, d: int, size: int, seed: int) -> PointSet:
    """`size` distinct points of F_q^d, returned in canonical index order."""
    total = field.q ** d
    if not 0 <= size <= total:
        raise ValueError(f"cannot draw {size} distinct points from {total}")
    idx = np.sort(make_rng(seed).choice(total, size=size, replace=False))
    return PointSet.from_indices(field, d, idx.tolist())


def random_family(field: FiniteField, d: int, sizes: Sequence[int], seed: int) -> list[PointSet]:
    return [random_point_set(field, d, s, seed + i) for i, s in enumerate(sizes)]


def resolve_set_spec(spec: str, field: FiniteField, d: int, seed: int) -> PointSet:
    """FULL, random:SIZE (drawn with `seed`), or a point-set file path."""
    if spec.upper() == "FULL":
        return PointSet.full(field, d)
    if spec.lower().startswith("random:"):
        return random_point_set(field, d, int(spec.split(":", 1)[1]), seed)
    A = read_point_set(spec, field)
    if A.d != d:
        raise ValueError(f"{spec} holds points of dimension {A.d}, expected {d}")
    return A


def parse_graph_spec(spec: str) -> Graph:
    """Preset name, family form (path:N, complete:N, star:N), or a graph file."""
    if ":" in spec:
        kind, num = spec.split(":", 1)
        builders = {"path": Graph.path, "complete": Graph.complete, "star": Graph.star}
        if kind.lower() in builders:
            return builders[kind.lower()](int(num))
    if Path(spec).is_file():
        return Graph.from_text(Path(spec).read_text())
    return Graph.preset(spec)


def theorem_constant(k: int) -> int:
    """(10 * k!)^2, the tree constant for k edges."""
    return (10 * math.factorial(k)) ** 2


@dataclass
class ExperimentConfig:
    p: int = 3
    n: int = 1
    d: int = 2
    graph: str = "P3"
    sets: list[str] = dc_field(default_factory=lambda: ["FULL"])
    density: Fraction = Fraction(1, 2)
    trials: int = 1
    seed: int = 0
    precision_cap: int = 512
    constant: Fraction | None = None
    tau: Fraction = Fraction(1, 2)

    @property
    def field(self) -> FiniteField:
        return make_field(self.p, self.n)

    def to_dict(self) -> dict:
        return asdict(self)


def _tuple_dot_codes(field: FiniteField, prefix_sets: Sequence[PointSet], target: PointSet,
                     tuples: np.ndarray) -> np.ndarray:
    """Odometer codes of (x_1.y, ..., x_l.y) for each prefix row and y in target, shape (rows, |target|)."""
    q = field.q
    codes = np.zeros((tuples.shape[0], len(target)), dtype=np.int64)
    for i, A in enumerate(prefix_sets):
        D = dot_matrix(field, A.array, target.array)
        codes = codes * q + D[tuples[:, i]]
    return codes


def _product_tuples(sets: Sequence[PointSet]) -> np.ndarray:
    return ProductSubset.full(sets).index_tuples()


# -- second moment of fiber counts ---------------------------------------------------

def moment_lhs(A_list: Sequence[PointSet], A: PointSet) -> int:
    """sum over prefixes in prod A_i and t in F_q^l of (Pi^A_x(t))^2."""
    f = A.field
    ell = len(A_list)
    size = math.prod(len(B) for B in A_list) * max(len(A), 1)
    if size > SUITE_CAP:
        raise CapExceeded(f"moment computation needs {size} entries, cap {SUITE_CAP}")
    tuples = _product_tuples(A_list)
    if tuples.shape[0] == 0 or len(A) == 0:
        return 0
    codes = _tuple_dot_codes(f, A_list, A, tuples)
    offset = np.arange(tuples.shape[0], dtype=np.int64)[:, None] * f.q ** ell
    counts = np.bincount((codes + offset).ravel())
    return int((counts.astype(object) ** 2).sum())


def moment_rhs(A_list: Sequence[PointSet], A: PointSet) -> Fraction:
    f = A.field
    prod = math.prod(len(B) for B in A_list)
    ell = len(A_list)
    return (Fraction(len(A) ** 2 * prod, f.q ** ell)
            + f.q ** A.d * len(A) * prod * sum(Fraction(1, len(B)) for B in A_list))


def verify_lemma_moment_bound(A_list: Sequence[PointSet], A: PointSet) -> Report:
    rep = Report("verify lemma31", {"l": len(A_list), "sizes": [len(B) for B in A_list],
                                    "target_size": len(A)})
    t0 = time.perf_counter()
    if not A_list:
        raise ValueError("need at least one set A_i")
    if any(len(B) == 0 for B in A_list):
        rep.add("moment_bound", Verdict.SKIPPED, note="some |A_j| = 0; the right side is undefined")
    else:
        lhs, rhs = moment_lhs(A_list, A), moment_rhs(A_list, A)
        rep.add("moment_bound", Verdict.PASS if lhs <= rhs else Verdict.FAIL, lhs=lhs, rhs=rhs)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- Fourier form of the fiber count ------------------------------------------------

def fiber_function(A: PointSet, xs: Sequence[FieldVector]) -> GridFunction:
    """t -> Pi^A_{x_1..x_l}(t) as a function on F_q^l."""
    f = A.field
    ell = len(xs)
    counts = np.zeros(f.q ** ell, dtype=np.int64)
    if len(A):
        X = np.array([x.codes for x in xs], dtype=np.int64)
        D = dot_matrix(f, X, A.array)
        codes = np.zeros(len(A), dtype=np.int64)
        for row in D:
            codes = codes * f.q + row
        counts = np.bincount(codes, minlength=f.q ** ell)
    return GridFunction.from_rationals(f, ell, counts.tolist())


def verify_fourier_fiber_identity(A: PointSet, xs: Sequence[FieldVector],
                                  s_list: Sequence[Sequence] | None = None) -> Report:
    """Compare the transform of t -> Pi^A_x(t) at s with q^(d-l) A^(sum s_i x_i).

    The left side is a naive transform on F_q^l, the right side a fast
    transform of the indicator of A on F_q^d.  All s in F_q^l when `s_list`
    is None.
    """
    f = A.field
    ell = len(xs)
    rep = Report("verify eq3", {"l": ell, "size": len(A), "q": f.q, "d": A.d})
    t0 = time.perf_counter()
    left = fourier_transform(fiber_function(A, xs), method="naive")
    right = fast_transform(GridFunction.indicator(A))
    scale = Fraction(f.q ** A.d, f.q ** ell)
    if s_list is None:
        s_iter = itertools.product(range(f.q), repeat=ell)
    else:
        s_iter = ([f(v).code for v in s] for s in s_list)
    mismatches = 0
    checked = 0
    for s in s_iter:
        combo = FieldVector(f, tuple([0] * A.d))
        for coeff, x in zip(s, xs):
            combo = combo + x.scale(FieldElement(f, int(coeff)))
        idx_s = 0
        for c in s:
            idx_s = idx_s * f.q + c
        checked += 1
        if left[idx_s] != right[combo] * scale:
            mismatches += 1
    rep.add("fiber_fourier_identity", Verdict.PASS if mismatches == 0 else Verdict.FAIL,
            frequencies=checked, mismatches=mismatches)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- average image over prefixes ----------------------------------------------------

def prefix_image_sizes(S: ProductSubset, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """(prefix tuples of S', |Pi_prefix(S(prefix))| for each), prefixes in sorted order."""
    if S.arity != ell + 1:
        raise ValueError(f"S has arity {S.arity}, expected {ell + 1}")
    if len(S) > SUITE_CAP:
        raise CapExceeded(f"|S| = {len(S)} exceeds the cap {SUITE_CAP}")
    tuples = S.index_tuples()
    if tuples.shape[0] == 0:
        raise EmptyProjection("S is empty, so S' is empty")
    f = S.field
    prefixes, inv = np.unique(tuples[:, :ell], axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    last = S.sets[ell]
    codes = np.zeros(tuples.shape[0], dtype=np.int64)
    for i in range(ell):
        D = dot_matrix(f, S.sets[i].array, last.array)
        codes = codes * f.q + D[tuples[:, i], tuples[:, ell]]
    pairs = np.unique(np.stack([inv, codes], axis=1), axis=0)
    sizes = np.bincount(pairs[:, 0], minlength=prefixes.shape[0])
    return prefixes, sizes


def verify_avg_image_bound(S: ProductSubset, ell: int | None = None, *, constant=None,
                           tau=Fraction(1, 2)) -> Report:
    """Average of |Pi_x(S(x))| over x in S', with the Cauchy-Schwarz lower bound checked exactly.

    ``constant`` defaults to l.  ``tau`` drives the share of prefixes whose
    image reaches tau q^l.
    """
    ell = S.arity - 1 if ell is None else ell
    d, q = S.d, S.field.q
    C = Fraction(ell if constant is None else constant)
    tau = Fraction(tau)
    sizes_A = [len(A) for A in S.sets]
    rep = Report("verify thm32", {"l": ell, "q": q, "d": d, "sizes": sizes_A, "constant": C,
                                  "tau": tau, "full": S.is_full, "S_size": len(S)})
    t0 = time.perf_counter()
    prefixes, images = prefix_image_sizes(S, ell)
    total = int(images.sum())
    avg = Fraction(total, prefixes.shape[0])
    qell = q ** ell
    rep.add("average_image", Verdict.INFO, average=avg, ratio=avg / qell, prefixes=prefixes.shape[0],
            image_total=total)
    hyp = all(sizes_A[i] * sizes_A[ell] >= C * q ** (d + ell) for i in range(ell))
    rep.add("hypothesis", Verdict.INFO, holds=hyp, constant=C,
            note="|A_i||A_{l+1}| >= C q^(d+l) for every i <= l; reported, not enforced")
    lemma = moment_rhs(S.sets[:ell], S.sets[ell]) if all(sizes_A[:ell]) else None
    if lemma is None:
        rep.add("cauchy_schwarz", Verdict.SKIPPED, note="an empty prefix component")
    else:
        lhs = Fraction(len(S) ** 2)
        rhs = total * lemma
        rep.add("cauchy_schwarz", Verdict.PASS if lhs <= rhs else Verdict.FAIL,
                S_squared=lhs, image_total_times_moment=rhs)
    reached = int((np.asarray(images, dtype=object) >= tau * qell).sum())
    rep.add("large_image_share", Verdict.INFO, tau=tau,
            fraction=Fraction(reached, prefixes.shape[0]))
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- coverage experiments -----------------------------------------------------------

def _hypothesis_checks(rep: Report, G: Graph, sizes: Sequence[int], q: int, d: int,
                       constant: Fraction | None):
    k_vertices = G.k
    exp_general = d + k_vertices - 1
    edges = G.edges
    checks = {}
    if constant is not None:
        checks["configured"] = (Fraction(constant), exp_general)
    if G.is_tree:
        k = G.num_edges
        checks["tree_constant"] = (Fraction(theorem_constant(k)), d + k - 1)
        if k == 2:
            checks["path2_constant"] = (Fraction(100), d + 1)
    for name, (C, exponent) in checks.items():
        holds = all(sizes[i - 1] * sizes[j - 1] >= C * q ** exponent for i, j in edges)
        rep.add(f"hypothesis_{name}", Verdict.INFO, holds=holds, constant=C, exponent=exponent)
    rep.add("vertex_range", Verdict.INFO, holds=2 <= k_vertices <= d + 1,
            note="2 <= k <= d+1 for the general-graph statement; recorded, not enforced")


def coverage_experiment(G: Graph, A_list: Sequence[PointSet], density=1, seed: int = 0, *,
                        constant=None, count: bool = False, workers: int = 1) -> Report:
    """Build S, compute Pi_G(S) and report its share of F_q^E and of (F_q^*)^E."""
    f = A_list[0].field
    d = A_list[0].d
    density = Fraction(density)
    sizes = [len(A) for A in A_list]
    rep = Report("cover", {"graph": G.to_text(), "q": f.q, "d": d, "sizes": sizes,
                           "density": density, "seed": seed})
    t0 = time.perf_counter()
    S = random_product_subset(A_list, density, seed + len(A_list))
    labels = graph_image(G, S, workers=workers)
    m = G.num_edges
    rep.add("image_fraction", Verdict.INFO, fraction=Fraction(labels.popcount(), f.q ** m),
            popcount=labels.popcount(), S_size=len(S))
    cov = labels.nonzero_coverage()
    if G.is_tree:
        rep.add("nonzero_coverage", Verdict.PASS if cov == 1 else Verdict.INFO, fraction=cov,
                note="share of (F_q^*)^E in the image")
    else:
        rep.add("nonzero_coverage", Verdict.INFO, fraction=cov)
    _hypothesis_checks(rep, G, sizes, f.q, d, None if constant is None else Fraction(constant))
    if count:
        hist = realization_histogram(G, S)
        total = int(hist.sum())
        ok = total == len(S) and np.array_equal(hist > 0, labels.bits)
        rep.add("count_sanity", Verdict.PASS if ok else Verdict.FAIL, realizations=total, S_size=len(S))
    rep.wall_time = time.perf_counter() - t0
    rep.counters["labels"] = f.q ** m
    return rep


@dataclass
class SweepRow:
    size: int
    trials: int
    image: list[Fraction]
    coverage: list[Fraction]

    def as_csv(self) -> list[str]:
        def r(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator}"
        return [str(self.size), str(self.trials), r(sum(self.image, Fraction(0)) / self.trials),
                r(min(self.image)), r(sum(self.coverage, Fraction(0)) / self.trials), r(min(self.coverage))]


def threshold_sweep(G: Graph, field: FiniteField, d: int, sizes: Sequence[int], trials: int,
                    seed: int, density=1) -> tuple[Report, str]:
    """Coverage versus set size; returns the report and the CSV text.

    Trial t at grid position g draws its family from base seed
    ``seed + (g * trials + t) * (k + 1)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    k = G.k
    rep = Report("sweep", {"graph": G.to_text(), "q": field.q, "d": d, "sizes": list(sizes),
                           "trials": trials, "seed": seed, "density": Fraction(density)})
    t0 = time.perf_counter()
    rows = []
    for g, size in enumerate(sizes):
        row = SweepRow(size, trials, [], [])
        for t in range(trials):
            base = seed + (g * trials + t) * (k + 1)
            fam = random_family(field, d, [size] * k, base)
            S = random_product_subset(fam, density, base + k)
            labels = graph_image(G, S)
            row.image.append(Fraction(labels.popcount(), field.q ** G.num_edges))
            row.coverage.append(labels.nonzero_coverage())
        rows.append(row)
        rep.add(f"size_{size}", Verdict.INFO, mean_image_fraction=sum(row.image, Fraction(0)) / trials,
                mean_nonzero_coverage=sum(row.coverage, Fraction(0)) / trials)
    means = [sum(r.coverage, Fraction(0)) for r in rows]
    monotone = all(a <= b for a, b in zip(means, means[1:]))
    rep.add("mean_coverage_monotone", Verdict.INFO, holds=monotone, note="reported, not asserted")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(r.as_csv())
    rep.wall_time = time.perf_counter() - t0
    return rep, buf.getvalue()


# -- transform self-test --------------------------------------------------------------

def random_grid_function(field: FiniteField, d: int, rng: np.random.Generator,
                         kind: str = "rational") -> GridFunction:
    size = field.q ** d
    if kind == "indicator":
        return GridFunction.from_rationals(field, d, rng.integers(0, 2, size=size).tolist())
    nums = rng.integers(-9, 10, size=size)
    dens = rng.integers(1, 7, size=size)
    return GridFunction.from_rationals(field, d, [Fraction(int(a), int(b)) for a, b in zip(nums, dens)])


def fourier_selftest(field: FiniteField, d: int, trials: int, seed: int) -> Report:
    """Inversion, Plancherel and naive/fast agreement on random functions."""
    rep = Report("fourier selftest", {"p": field.p, "n": field.n, "d": d, "trials": trials, "seed": seed})
    rng = make_rng(seed)
    naive_ops, fast_ops = OpCounter(), OpCounter()
    t0 = time.perf_counter()
    bad = {"inversion": 0, "plancherel": 0, "fast_vs_naive": 0}
    for t in range(trials):
        f = random_grid_function(field, d, rng, "indicator" if t % 2 == 0 else "rational")
        slow = fourier_transform(f, method="naive", counter=naive_ops)
        fast = fourier_transform(f, method="fast", counter=fast_ops)
        bad["fast_vs_naive"] += slow != fast
        bad["inversion"] += inverse_transform(fast, method="fast") != f
        bad["plancherel"] += not plancherel_check(f).passed
    for name, count in bad.items():
        rep.add(name, Verdict.PASS if count == 0 else Verdict.FAIL, failures=int(count), trials=trials)
    rep.counters.update(naive_multiplications=naive_ops.multiplications,
                        fast_multiplications=fast_ops.multiplications)
    rep.wall_time = time.perf_counter() - t0
    return rep

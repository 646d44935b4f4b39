"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned here: every identity is exact, every bound check must
come back CONFIRMED with the 512-bit cap, runtime limits are wall-clock seconds.
"""
from __future__ import annotations

import itertools
import shutil
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from ffdot.charsums import (PRECISION_CAP, BoundVerdict, dilate_energy, path2_decomposition,
                            r_decomposition, s_sum, schur_bound_check, v_sum)
from ffdot.cyclo import CycloNum, cyclo_sum
from ffdot.field import FieldElement, FieldVector, PointSet, make_field
from ffdot.fourier import fast_transform, fourier_transform, inverse_transform
from ffdot.graphs import (Graph, ProductSubset, count_realizations, graph_image, pi_fiber_count,
                          random_product_subset)
from ffdot.lab import (make_rng, random_family, random_grid_function, verify_fourier_fiber_identity,
                       verify_lemma_moment_bound)
from ffdot.report import Verdict

from conftest import brute_dot, random_set, random_vector

FOURIER_TIME_LIMIT = 60.0
COVERAGE_TIME_LIMIT = 600.0
PRODUCT_LIMIT = 10 ** 6

SWEEP_ARGS = ["sweep", "--graph", "P3", "--p", "3", "--d", "2", "--sizes", "3,5,7,9",
              "--trials", "20", "--seed", "11"]


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_01_fourier_suite(verdict):
    settings = [(3, 1, 1), (3, 1, 2), (2, 2, 1), (5, 1, 1), (5, 1, 2), (7, 1, 1)]
    per_setting = 34
    rng = make_rng(101)
    t0 = time.perf_counter()
    checked = failures = 0
    for p, n, d in settings:
        field = make_field(p, n)
        for t in range(per_setting):
            f = random_grid_function(field, d, rng, "indicator" if t % 2 == 0 else "rational")
            slow = fourier_transform(f, method="naive")
            fast = fast_transform(f)
            spectral = cyclo_sum(p, (v.abs_sq() for v in fast.values)).as_rational()
            spatial = Fraction(sum(v.abs_sq().as_rational() for v in f.values), field.q ** d)
            ok = (slow == fast and inverse_transform(fast, method="fast") == f
                  and inverse_transform(slow, method="naive") == f and spectral == spatial)
            checked += 1
            failures += not ok
    elapsed = time.perf_counter() - t0
    verdict(1, checked >= 200 and failures == 0 and elapsed <= FOURIER_TIME_LIMIT,
            f"{checked} functions, {failures} failures, {elapsed:.1f}s (limit {FOURIER_TIME_LIMIT:.0f}s)")


def test_criterion_02_fiber_fourier_identity(verdict):
    rng = make_rng(202)
    runs = bad = 0
    for q, ell in itertools.product((3, 5), (1, 2)):
        field = make_field(q)
        for _ in range(50):
            A = random_set(field, 2, rng)
            xs = [random_vector(field, 2, rng) for _ in range(ell)]
            rep = verify_fourier_fiber_identity(A, xs)
            chk = rep.checks[0]
            runs += 1
            bad += not (chk.verdict is Verdict.PASS and chk.values["frequencies"] == q ** ell)
    verdict(2, bad == 0 and runs == 200, f"{runs} sets, exhaustive over s, {bad} failures")


def test_criterion_03_moment_lemma(verdict):
    runs = bad = 0
    for q, d, ell in itertools.product((3, 5), (1, 2), (1, 2)):
        field = make_field(q)
        rng = make_rng(300 + 10 * q + 3 * d + ell)
        for _ in range(100):
            sizes = [int(rng.integers(1, q ** d + 1)) for _ in range(ell)]
            A_list = [random_set(field, d, rng, s) for s in sizes]
            A = random_set(field, d, rng)
            chk = verify_lemma_moment_bound(A_list, A).checks[0]
            runs += 1
            bad += not (chk.verdict is Verdict.PASS and isinstance(chk.values["lhs"], int)
                        and chk.values["lhs"] <= chk.values["rhs"])
    verdict(3, bad == 0 and runs == 800, f"{runs} instances over 8 settings, {bad} failures")


def test_criterion_04_incomplete_sum(verdict):
    rng = make_rng(404)
    fields = [make_field(3), make_field(5), make_field(2, 2), make_field(7), make_field(3, 2)]
    closed = vanish = 0
    for i in range(200):
        f = fields[i % len(fields)]
        d = int(rng.integers(1, 3))
        A = random_set(f, d, rng)
        x = random_vector(f, d, rng)
        alpha = FieldElement(f, int(rng.integers(f.q)))
        closed += s_sum(A, alpha, x) == f.q * pi_fiber_count(A, [x], [alpha]) - len(A)
        if i < 50:
            total = cyclo_sum(f.p, (s_sum(A, a, x) for a in f.elements))
            vanish += total.is_zero()
    verdict(4, closed == 200 and vanish == 50, f"closed form {closed}/200, vanishing sum {vanish}/50")


def test_criterion_05_aggregate_and_energy_bounds(verdict):
    rng = make_rng(505)
    runs = confirmed = 0
    worst_bits = 0
    for q, d in itertools.product((3, 5), (1, 2)):
        f = make_field(q)
        for _ in range(25):
            A, B = random_set(f, d, rng), random_set(f, d, rng)
            alpha = FieldElement(f, int(rng.integers(1, q)))
            _, vb = v_sum(A, B, alpha, precision_cap=PRECISION_CAP)
            _, eb = dilate_energy(A, alpha, precision_cap=PRECISION_CAP)
            runs += 1
            confirmed += vb.verdict is BoundVerdict.CONFIRMED and eb.verdict is BoundVerdict.CONFIRMED
            worst_bits = max(worst_bits, vb.precision_used, eb.precision_used)
    analytic = True
    for q, d in itertools.product((3, 5), (1, 2)):
        f = make_field(q)
        full = PointSet.full(f, d)
        v, _ = v_sum(full, full, f(1))
        analytic &= v.abs_sq() == q ** (2 * d) and v == -(q ** d)
    verdict(5, confirmed == runs == 100 and analytic,
            f"{confirmed}/{runs} CONFIRMED (max {worst_bits} bits), full-set |v| = q^d: {analytic}")


def test_criterion_06_r_decomposition(verdict):
    f = make_field(3)
    cases = mismatches = 0
    path_terms_ok = True
    for G in (Graph.path(3), Graph.star(3)):
        for d in (1, 2):
            families = [[PointSet.full(f, d)] * G.k]
            families += [random_family(f, d, [int(s) for s in make_rng(seed).integers(1, 3 ** d + 1, size=G.k)],
                                       600 + seed) for seed in range(10)]
            for sets in families:
                for alphas in itertools.product((1, 2), repeat=G.num_edges):
                    dec = r_decomposition(G, sets, alphas)
                    cases += 1
                    mismatches += dec.term_sum.as_rational() != count_realizations(G, sets, alphas)
                    if G.num_edges == 2:
                        p2 = path2_decomposition(*sets, f(alphas[0]), f(alphas[1]))
                        path_terms_ok &= p2.terms == dec.terms and p2.total == dec.total
    verdict(6, mismatches == 0 and path_terms_ok,
            f"{cases} (graph, family, alpha) cases, {mismatches} mismatches, path2 term-by-term {path_terms_ok}")


def _label_codes_all_tuples(G: Graph, field, d: int) -> np.ndarray:
    """Every labeling realised by F_q^d tuples, by direct enumeration of the full product."""
    q = field.q
    vecs = [FieldVector.from_index(field, d, i) for i in range(q ** d)]
    table = np.array([[brute_dot(u, v) for v in vecs] for u in vecs], dtype=np.int64)
    grids = np.indices((q ** d,) * G.k).reshape(G.k, -1)
    codes = np.zeros(grids.shape[1], dtype=np.int64)
    for i, j in G.edges:
        codes = codes * q + table[grids[i - 1], grids[j - 1]]
    return np.unique(codes)


def test_criterion_07_tree_coverage_full_sets(verdict):
    t0 = time.perf_counter()
    results = []
    for q in (3, 5):
        f = make_field(q)
        full = PointSet.full(f, 2)
        for name, G in (("P3", Graph.path(3)), ("P4", Graph.path(4)), ("K13", Graph.star(3))):
            labels = graph_image(G, ProductSubset([full] * G.k), workers=2)
            brute = _label_codes_all_tuples(G, f, 2)
            nonzero = [c for c in range(q ** G.num_edges)
                       if all((c // q ** e) % q for e in range(G.num_edges))]
            brute_cov = Fraction(len(set(nonzero) & set(brute.tolist())), len(nonzero))
            same = np.array_equal(labels.codes(), brute)
            results.append((name, q, labels.nonzero_coverage(), brute_cov, same))
    elapsed = time.perf_counter() - t0
    ok = all(c == 1 and b == 1 and s for _, _, c, b, s in results) and elapsed <= COVERAGE_TIME_LIMIT
    detail = ", ".join(f"{n}@q={q}:{c}" for n, q, c, _, _ in results)
    verdict(7, ok, f"{detail}; {elapsed:.1f}s (limit {COVERAGE_TIME_LIMIT:.0f}s)")


def _naive_image(G: Graph, S: ProductSubset) -> set[int]:
    field = S.field
    q = field.q
    tables = {}
    for i, j in G.edges:
        A, B = S.sets[i - 1], S.sets[j - 1]
        tables[(i, j)] = np.array([[brute_dot(u, v) for v in B] for u in A], dtype=np.int64)
    if S.is_full:
        tuples = np.indices([len(A) for A in S.sets]).reshape(S.arity, -1).T
    else:
        tuples = np.asarray(S.tuples).reshape(-1, S.arity)
    codes = np.zeros(tuples.shape[0], dtype=np.int64)
    for i, j in G.edges:
        codes = codes * q + tables[(i, j)][tuples[:, i - 1], tuples[:, j - 1]]
    return set(np.unique(codes).tolist())


def test_criterion_08_image_matches_naive_loop(verdict):
    rng = make_rng(808)
    graphs = [Graph.path(2), Graph.path(3), Graph.complete(3), Graph.path(4), Graph.star(3),
              Graph.preset("paw"), Graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)]), Graph.complete(4)]
    fields = [(make_field(3), 2), (make_field(5), 2), (make_field(7), 2), (make_field(3), 3), (make_field(2, 2), 2)]
    agree = 0
    biggest = 0
    for c in range(20):
        G = graphs[c % len(graphs)]
        f, d = fields[c % len(fields)]
        cap = min(f.q ** d, int(PRODUCT_LIMIT ** (1 / G.k)))
        sizes = [int(s) for s in rng.integers(max(1, 3 * cap // 4), cap + 1, size=G.k)]
        sets = random_family(f, d, sizes, 8000 + 10 * c)
        density = Fraction(1) if c % 3 == 0 else Fraction(int(rng.integers(1, 4)), 4)
        S = random_product_subset(sets, density, 8000 + 10 * c + G.k)
        biggest = max(biggest, S.product_size)
        agree += set(graph_image(G, S).codes().tolist()) == _naive_image(G, S)
    verdict(8, agree == 20 and biggest <= PRODUCT_LIMIT,
            f"{agree}/20 configurations agree, largest product {biggest}")


def test_criterion_09_sweep_determinism(verdict, tmp_path):
    exe = shutil.which("ffdot")
    cmd = [exe] if exe else [sys.executable, "-m", "ffdot.cli"]
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        proc = subprocess.run(cmd + SWEEP_ARGS + ["--out", str(path)], capture_output=True)
        outs.append((proc.returncode, path.read_bytes() if path.exists() else b""))
    ok = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1] and len(outs[0][1]) > 0
    verdict(9, ok, f"two runs, {len(outs[0][1])} bytes each, identical: {outs[0][1] == outs[1][1]}")


def _random_entry(rng, p: int, cyclotomic: bool):
    if cyclotomic:
        return CycloNum(p, [Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(p - 1)])
    return Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))


def test_criterion_10_schur_suite(verdict):
    rng = make_rng(1010)
    confirmed = 0
    for t in range(100):
        m, n = (int(v) for v in rng.integers(1, 9, size=2))
        cyc = t % 4 == 3
        c = [[_random_entry(rng, 5, cyc) for _ in range(n)] for _ in range(m)]
        z = [_random_entry(rng, 5, cyc) for _ in range(m)]
        y = [_random_entry(rng, 5, cyc) for _ in range(n)]
        confirmed += schur_bound_check(c, z, y, p=5 if cyc else None).verdict is BoundVerdict.CONFIRMED
    tight = schur_bound_check([[1] * 8] * 8, [1] * 8, [1] * 8)
    tight_ok = (tight.verdict is BoundVerdict.CONFIRMED and tight.tight and tight.lhs.contains(tight.rhs)
                and tight.rhs == 8 ** 4)
    verdict(10, confirmed == 100 and tight_ok,
            f"{confirmed}/100 random CONFIRMED, all-ones 8x8 equality detected: {tight_ok}")

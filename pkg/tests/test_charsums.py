from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from ffdot.charsums import (BoundVerdict, certify_le, check_squared_bound, dilate_energy, path2_decomposition,
                            r_decomposition, s_sum, s_sum_energy, schur_bound_check, star_character_sum,
                            star_term_bound, v_sum)
from ffdot.cyclo import CertifiedInterval, CycloNum, cyclo_sum
from ffdot.errors import AlphaZero, DimensionMismatch, NotATree
from ffdot.field import FieldVector, PointSet, additive_character, dot, make_field
from ffdot.graphs import Graph, count_realizations, pi_fiber_count

from conftest import elem, random_set, random_vector

FIELDS = [(3, 1), (5, 1), (2, 2), (7, 1)]


def scalar_s_sum(A, alpha, x):
    f = A.field
    terms = []
    for s in f.elements[1:]:
        for y in A:
            terms.append(additive_character(s * (dot(x, y) - alpha)))
    return cyclo_sum(f.p, terms)


def scalar_energy(A, alpha):
    f = A.field
    pts = list(A)
    terms = []
    for s, t in itertools.product(f.elements[1:], repeat=2):
        for y, z in itertools.product(pts, repeat=2):
            if y.scale(s) == z.scale(t):
                terms.append(additive_character(alpha * (t - s)))
    return cyclo_sum(f.p, terms)


def scalar_r_terms(G, sets, alphas):
    """R_m straight from the definition: sum over every s-vector and every tuple."""
    f = sets[0].field
    k = G.num_edges
    out = [CycloNum(f.p)] * (k + 1)
    tuples = list(itertools.product(*[list(A) for A in sets]))
    for s in itertools.product(f.elements, repeat=k):
        m = sum(1 for v in s if v)
        terms = []
        for xs in tuples:
            expo = f.zero
            for (i, j), se, a in zip(G.edges, s, alphas):
                expo = expo + se * (dot(xs[i - 1], xs[j - 1]) - a)
            terms.append(additive_character(expo))
        out[m] = out[m] + cyclo_sum(f.p, terms)
    return [z * Fraction(1, f.q ** k) for z in out]


# -- S_{A, alpha} ------------------------------------------------------------------

def test_s_sum_full_at_zero():
    for p, n in FIELDS:
        f = make_field(p, n)
        A = PointSet.full(f, 2)
        x = FieldVector(f, (0, 0))
        for a in range(1, f.q):
            assert s_sum(A, elem(f, a), x) == -(f.q ** 2)


def test_s_sum_empty(f3):
    assert s_sum(PointSet.empty(f3, 2), f3(1), FieldVector.of(f3, [1, 1])).is_zero()


@pytest.mark.parametrize("p,n", FIELDS[:3])
def test_s_sum_matches_scalar_definition(p, n, rng):
    f = make_field(p, n)
    for _ in range(8):
        A = random_set(f, 2, rng)
        x = random_vector(f, 2, rng)
        a = elem(f, rng.integers(f.q))
        got = s_sum(A, a, x)
        assert got == scalar_s_sum(A, a, x)
        assert got == f.q * pi_fiber_count(A, [x], [a]) - len(A)


def test_s_sum_dimension_check(f3):
    with pytest.raises(DimensionMismatch):
        s_sum(PointSet.full(f3, 2), f3(1), FieldVector.of(f3, [1]))


# -- aggregate and energy bounds ------------------------------------------------------

def test_v_sum_full_sets():
    for p, n, d in [(3, 1, 1), (3, 1, 2), (5, 1, 2), (2, 2, 2)]:
        f = make_field(p, n)
        A = PointSet.full(f, d)
        v, bc = v_sum(A, A, elem(f, 1))
        assert v == -(f.q ** d)
        assert bc.verdict is BoundVerdict.CONFIRMED
        assert bc.lhs.lo == f.q ** (2 * d) and bc.rhs == f.q ** (3 * d + 1)


def test_v_sum_empty_and_alpha_zero(f3):
    A = PointSet.full(f3, 2)
    v, bc = v_sum(A, PointSet.empty(f3, 2), f3(2))
    assert v.is_zero() and bc.confirmed
    with pytest.raises(AlphaZero):
        v_sum(A, A, f3(0))
    v, _ = v_sum(A, A, f3(0), theorem_mode=False)
    # q * #{x.y = 0} - |A||B| = 3 * 33 - 81
    assert v == 18


def test_energy_single_zero_point():
    for p, n in FIELDS:
        f = make_field(p, n)
        A = PointSet(f, 2, [(0, 0)])
        for a in range(1, f.q):
            val, bc = dilate_energy(A, elem(f, a))
            assert val == scalar_energy(A, elem(f, a)) == 1
            assert bc.confirmed


def test_energy_empty(f5):
    val, bc = dilate_energy(PointSet.empty(f5, 2), f5(3))
    assert val.is_zero() and bc.confirmed


@pytest.mark.parametrize("p,n,d", [(3, 1, 1), (3, 1, 2), (5, 1, 1), (2, 2, 2)])
def test_energy_matches_scalar_and_parseval_identity(p, n, d, rng):
    f = make_field(p, n)
    for _ in range(4):
        A = random_set(f, d, rng)
        a = elem(f, rng.integers(1, f.q))
        val, bc = dilate_energy(A, a)
        assert val == scalar_energy(A, a)
        assert s_sum_energy(A, a) == val * f.q ** d
        assert bc.confirmed


# -- decompositions --------------------------------------------------------------------

def test_path2_full_f3():
    f = make_field(3)
    A = PointSet.full(f, 1)
    dec = path2_decomposition(A, A, A, f(1), f(1))
    assert dec.total == 2 == count_realizations(Graph.path(3), [A] * 3, [1, 1])
    assert dec.terms[0] == 3


def test_path2_empty_middle(f3):
    A = PointSet.full(f3, 2)
    dec = path2_decomposition(A, PointSet.empty(f3, 2), A, f3(1), f3(2))
    assert all(t.is_zero() for t in dec.terms) and dec.total == 0


@pytest.mark.parametrize("p", [3, 5])
def test_path2_random_matches_count(p, rng):
    f = make_field(p)
    for _ in range(10):
        sets = [random_set(f, 2, rng) for _ in range(3)]
        a1, a2 = (elem(f, rng.integers(1, p)) for _ in range(2))
        dec = path2_decomposition(*sets, a1, a2)
        assert dec.total == count_realizations(Graph.path(3), sets, [a1, a2])
        assert dec.terms[0] == Fraction(len(sets[0]) * len(sets[1]) * len(sets[2]), p * p)


def test_r_decomposition_matches_definition(f3):
    G = Graph.star(3)
    A = PointSet.full(f3, 1)
    sets = [A] * 4
    alphas = [f3(1)] * 3
    dec = r_decomposition(G, sets, alphas)
    assert dec.terms == scalar_r_terms(G, sets, alphas)
    assert dec.total == count_realizations(G, sets, alphas)


def test_r_decomposition_random_sets_definition(rng):
    f = make_field(3)
    G = Graph.path(3)
    sets = [random_set(f, 2, rng, 4) for _ in range(3)]
    alphas = [f(2), f(1)]
    assert r_decomposition(G, sets, alphas).terms == scalar_r_terms(G, sets, alphas)


@pytest.mark.parametrize("G", [Graph.path(3), Graph.star(3), Graph.path(4), Graph(5, [(1, 2), (2, 3), (2, 4), (4, 5)])])
def test_r_decomposition_totals(G, rng):
    f = make_field(3)
    for _ in range(3):
        sets = [random_set(f, 2, rng, int(rng.integers(1, 7))) for _ in range(G.k)]
        for alphas in itertools.product([1, 2], repeat=G.num_edges):
            dec = r_decomposition(G, sets, alphas)
            assert dec.term_sum.as_rational() == dec.total == count_realizations(G, sets, alphas)
            prod = 1
            for A in sets:
                prod *= len(A)
            assert dec.terms[0] == Fraction(prod, 3 ** G.num_edges)


def test_r_decomposition_agrees_with_path2(rng):
    f = make_field(5)
    sets = [random_set(f, 2, rng, 9) for _ in range(3)]
    for a1, a2 in [(1, 1), (2, 4), (3, 2)]:
        assert r_decomposition(Graph.path(3), sets, [a1, a2]).terms == path2_decomposition(*sets, f(a1), f(a2)).terms


def test_r_decomposition_empty_vertex(f3):
    sets = [PointSet.full(f3, 2), PointSet.empty(f3, 2), PointSet.full(f3, 2), PointSet.full(f3, 2)]
    dec = r_decomposition(Graph.star(3), sets, [1, 1, 1])
    assert all(t.is_zero() for t in dec.terms)


def test_r_decomposition_errors(f3):
    A = PointSet.full(f3, 1)
    with pytest.raises(NotATree):
        r_decomposition(Graph.complete(3), [A] * 3, [1, 1, 1])
    with pytest.raises(AlphaZero):
        r_decomposition(Graph.path(3), [A] * 3, [1, 0], theorem_mode=True)
    assert r_decomposition(Graph.path(3), [A] * 3, [1, 0]).total == count_realizations(Graph.path(3), [A] * 3, [1, 0])


# -- Schur test ----------------------------------------------------------------------

def test_schur_one_by_one_tight():
    bc = schur_bound_check([[Fraction(3)]], [Fraction(-2)], [Fraction(5)])
    assert bc.verdict is BoundVerdict.CONFIRMED and bc.tight
    assert bc.lhs.lo == bc.rhs == 900


def test_schur_all_ones_tight():
    bc = schur_bound_check([[1, 1], [1, 1]], [1, 1], [1, 1])
    assert bc.lhs == CertifiedInterval.point(16) and bc.rhs == 16
    assert bc.confirmed and bc.tight


def test_schur_rectangular_column_sum():
    # 1x3 row: R = 3, C = 1, bound 3 * |z|^2 * |y|^2 = 3*1*3 = 9, lhs = 9
    bc = schur_bound_check([[1, 1, 1]], [1], [1, 1, 1])
    assert bc.rhs == 9 and bc.lhs.lo == 9 and bc.tight


def test_schur_cyclotomic_entries():
    z = CycloNum.zeta_power(5, 1)
    c = [[z, 1 + z], [z * z, CycloNum.rational(5, 2)]]
    bc = schur_bound_check(c, [1 + z, z], [CycloNum.rational(5, 1), z])
    assert bc.confirmed and isinstance(bc.rhs, CertifiedInterval)


def test_schur_dimension_check():
    with pytest.raises(DimensionMismatch):
        schur_bound_check([[1, 2]], [1, 2], [1, 2])


# -- star bound -------------------------------------------------------------------------

def test_star_single_leaf_is_aggregate_bound(rng):
    f = make_field(3)
    for _ in range(5):
        A, B = random_set(f, 2, rng), random_set(f, 2, rng)
        v, vbc = v_sum(A, B, f(1))
        bc = star_term_bound(B, [A], [f(1)])
        assert bc.value == v and bc.rhs == vbc.rhs and bc.verdict == vbc.verdict


def test_star_empty_centre(f3):
    bc = star_term_bound(PointSet.empty(f3, 2), [PointSet.full(f3, 2)] * 2, [1, 2])
    assert bc.value.is_zero() and bc.confirmed


def test_star_two_and_three_leaves(rng):
    f = make_field(3)
    for m in (2, 3):
        for _ in range(3):
            centre = random_set(f, 2, rng)
            leaves = [random_set(f, 2, rng) for _ in range(m)]
            alphas = [f(int(a)) for a in rng.integers(1, 3, size=m)]
            bc = star_term_bound(centre, leaves, alphas)
            assert bc.confirmed
            # the star sum equals the corresponding R-term contribution scaled by q^k
            assert star_character_sum(centre, leaves, alphas).is_rational()


def test_star_sum_matches_r_subset_term(rng):
    f = make_field(3)
    sets = [random_set(f, 2, rng, 5) for _ in range(4)]
    alphas = [f(1), f(2), f(1)]
    dec = r_decomposition(Graph.star(3), sets, alphas)
    star = star_character_sum(sets[0], sets[1:], alphas)
    assert dec.subset_terms[(0, 1, 2)] == star.as_rational() / 27


# -- bound certification --------------------------------------------------------------

def test_violated_and_indeterminate_paths():
    z = CycloNum.zeta_power(5, 1) + 1  # |z|^2 = 2 + 2cos(2pi/5), irrational
    assert check_squared_bound(z, Fraction(2)).verdict is BoundVerdict.VIOLATED
    assert check_squared_bound(z, Fraction(3)).verdict is BoundVerdict.CONFIRMED
    stuck = certify_le(lambda bits: CertifiedInterval(Fraction(0), Fraction(2)), lambda bits: Fraction(1))
    assert stuck.verdict is BoundVerdict.INDETERMINATE and stuck.precision_used == 512
    assert certify_le(lambda b: CertifiedInterval(Fraction(0), Fraction(2)), lambda b: Fraction(1),
                      precision_cap=128).precision_used == 128


def test_precision_escalates_when_close():
    z = CycloNum.zeta_power(5, 1) + 1
    sq = z.abs_sq()
    # rhs within 2^-70 of the true value forces more than 64 bits
    import mpmath
    mpmath.mp.prec = 200
    true = 2 + 2 * mpmath.cos(2 * mpmath.pi / 5)
    rhs = Fraction(int(mpmath.floor(true * 2 ** 80)) + 1, 2 ** 80)
    bc = check_squared_bound(z, rhs)
    assert bc.verdict is BoundVerdict.CONFIRMED and bc.precision_used > 64
    assert sq.is_rational() is False

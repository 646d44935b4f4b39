from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import settings

from ffdot.field import FieldElement, FieldVector, PointSet, make_field

settings.register_profile("ffdot", deadline=None, max_examples=60)
settings.load_profile("ffdot")


def random_set(field, d, rng, size=None):
    total = field.q ** d
    if size is None:
        size = int(rng.integers(0, total + 1))
    idx = np.sort(rng.choice(total, size=size, replace=False))
    return PointSet.from_indices(field, d, idx.tolist())


def random_vector(field, d, rng):
    return FieldVector.from_index(field, d, int(rng.integers(field.q ** d)))


def elem(field, code):
    return FieldElement(field, int(code))


def brute_dot(u, v):
    f = u.field
    acc = 0
    for a, b in zip(u.codes, v.codes):
        acc = f.add(acc, f.mul(a, b))
    return acc


def brute_image(G, sets, tuples=None):
    """All labelings realised by the given tuples (default: whole product), by direct loop."""
    pts = [list(A) for A in sets]
    if tuples is None:
        tuples = itertools.product(*[range(len(A)) for A in sets])
    out = set()
    for t in tuples:
        xs = [pts[i][j] for i, j in enumerate(t)]
        out.add(tuple(brute_dot(xs[i - 1], xs[j - 1]) for i, j in G.edges))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def f3():
    return make_field(3)


@pytest.fixture(scope="session")
def f4():
    return make_field(2, 2)


@pytest.fixture(scope="session")
def f5():
    return make_field(5)

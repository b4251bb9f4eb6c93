from fractions import Fraction

import numpy as np
import pytest

from tightbell import fixtures
from tightbell.core import CoeffTensor, Scenario
from tightbell.polytope import (
    TightnessCertificate, affine_rank, full_dimension_rank, integer_rank, lhs_extremes,
    lr_vertices, tightness, vertex_matrix,
)

S333 = Scenario((3, 3, 3))


def test_vertex_counts():
    assert len(lr_vertices(S333, dedup=False)) == 512
    assert len(lr_vertices(S333)) == 128
    assert len(lr_vertices(Scenario((3, 3)), dedup=False)) == 64
    assert len(lr_vertices(Scenario((3, 3)))) == 32
    assert vertex_matrix((2, 4, 4)).shape == (256, 32)


def test_full_dimensionality():
    assert full_dimension_rank(S333) == 27
    assert full_dimension_rank(Scenario((3, 3))) == 9
    assert full_dimension_rank(Scenario((2, 4, 4))) == 32


def test_lhs_extremes_examples():
    assert lhs_extremes(fixtures.tensor("three_setting")) == (1, -1)
    assert lhs_extremes(CoeffTensor.from_terms(S333, {(0, 0, 0): 1})) == (1, -1)
    g = CoeffTensor.from_terms(S333, {(0, 0, 0): 1, (1, 1, 1): 1})
    assert lhs_extremes(g)[0] == 2


def test_lhs_extremes_with_explicit_vertices():
    g = fixtures.tensor("mabk")
    verts = lr_vertices(S333, dedup=False)
    assert lhs_extremes(g, verts) == lhs_extremes(g)


@pytest.mark.parametrize("name", fixtures.SIGN_FIXTURE_NAMES + ("trivial3", "two_four_four"))
def test_three_party_fixtures_are_facets(name):
    g = fixtures.tensor(name)
    cert = tightness(g)
    assert cert.max_value == 1
    assert cert.affine_rank == g.scenario.n_coefficients - 1
    assert cert.is_facet


@pytest.mark.parametrize("name", ["chsh", "trivial2"])
def test_two_party_facets(name):
    cert = tightness(fixtures.tensor(name))
    assert cert.is_facet and cert.affine_rank == 8 and cert.ambient_dim == 9


def test_non_admissible_direction_is_not_a_facet():
    g = CoeffTensor.from_terms(S333, {(0, 0, 0): Fraction(1, 2), (1, 1, 1): Fraction(1, 2)})
    cert = tightness(g)
    assert cert.max_value == 1
    assert not cert.is_facet
    assert cert.affine_rank < 26


def test_certificate_record_round_trip():
    cert = tightness(fixtures.tensor("three_setting"))
    assert TightnessCertificate.from_record(cert.to_record()) == cert


def test_integer_rank_matches_numpy(rng):
    for _ in range(30):
        r, c = rng.integers(1, 9, size=2)
        k = rng.integers(1, min(r, c) + 1)
        m = rng.integers(-3, 4, size=(r, k)) @ rng.integers(-3, 4, size=(k, c))
        assert integer_rank(m) == np.linalg.matrix_rank(m)


def test_integer_rank_exact_on_large_entries():
    big = 10**15
    m = [[big, big + 1], [big + 1, big + 2]]
    assert integer_rank(m) == 2
    assert integer_rank([[big, 2 * big], [1, 2]]) == 1


def test_affine_rank_small_cases():
    assert affine_rank([[0, 0], [1, 0], [0, 1]]) == 2
    assert affine_rank([[1, 1], [2, 2], [3, 3]]) == 1
    assert affine_rank([[5, 5]]) == 0
    assert affine_rank([]) == -1

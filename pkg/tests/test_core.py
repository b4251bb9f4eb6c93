from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tightbell import fixtures
from tightbell.core import (
    CoeffTensor, DeltaPoly, Scenario, SignTable, admissible_mask, all_assignments,
    coefficients_from_sign, delta, eval_sign, is_admissible, norm_conditions,
    pointwise_delta_structure, pointwise_mask, reconstruct_sign, row_deltas, sign_table,
)
from tightbell.symmetry import apply_symmetry, random_symmetry

S333 = Scenario((3, 3, 3))
S33 = Scenario((3, 3))
PLUS = ((1, 1, 1), (1, 1, 1), (1, 1, 1))


def unit(idx, value=1, scenario=S333):
    return CoeffTensor.from_terms(scenario, {idx: value})


# -- construction ---------------------------------------------------------

def test_scenario_counts():
    assert S333.n_assignments == 512
    assert S333.n_coefficients == 27
    assert S333.denom_exp == 2
    assert S33.denom_exp == 1
    assert Scenario((2, 4, 4)).n_assignments == 1024


def test_coeff_tensor_record_round_trip():
    g = fixtures.tensor("three_setting")
    rec = g.to_record()
    assert rec["denom_exp"] == 2
    assert CoeffTensor.from_record(rec) == g


def test_coeff_tensor_rejects_wrong_denominator():
    with pytest.raises(ValueError):
        CoeffTensor(S333, np.zeros((3, 3, 3)), denom_exp=0)


def test_from_terms_rejects_off_lattice_value():
    with pytest.raises(ValueError):
        CoeffTensor.from_terms(S333, {(0, 0, 0): Fraction(1, 8)})


# -- eval_sign ------------------------------------------------------------

def test_eval_sign_two_delta_ii_example():
    g = CoeffTensor.from_terms(S333, {(0, 0, 0): Fraction(1, 2), (0, 0, 1): Fraction(1, 2),
                                      (1, 0, 0): Fraction(1, 2), (1, 0, 1): Fraction(-1, 2)})
    assert eval_sign(g, PLUS) == 1


def test_eval_sign_single_term_is_product():
    g = unit((0, 0, 0))
    for a in all_assignments(S333)[::37]:
        assert eval_sign(g, a) == a[0][0] * a[1][0] * a[2][0]


def test_eval_sign_uniform_quarter():
    g = CoeffTensor(S333, np.ones((3, 3, 3)))
    assert eval_sign(g, PLUS) == Fraction(27, 4)


def test_eval_sign_rejects_bad_assignment():
    g = unit((0, 0, 0))
    with pytest.raises(ValueError):
        eval_sign(g, ((1, 1), (1, 1, 1), (1, 1, 1)))
    with pytest.raises(ValueError):
        eval_sign(g, ((1, 0, 1), (1, 1, 1), (1, 1, 1)))


def test_sign_table_matches_eval_sign():
    g = fixtures.tensor("three_setting")
    table = sign_table(g)
    for i, a in enumerate(all_assignments(S333)):
        assert table.value(i) == eval_sign(g, a)


# -- admissibility --------------------------------------------------------

def test_is_admissible_examples():
    assert is_admissible(fixtures.tensor("three_setting"))
    assert is_admissible(unit((0, 0, 0)))
    assert not is_admissible(CoeffTensor.zeros(S333))


@pytest.mark.parametrize("name", fixtures.SIGN_FIXTURE_NAMES)
def test_fixture_sign_function_matches_inequality(name):
    fx = fixtures.fixture(name)
    S = fx.sign_table()
    assert S.is_admissible()
    g = coefficients_from_sign(S)
    assert g == fx.inequality
    assert sign_table(g) == S
    assert is_admissible(g)
    assert norm_conditions(g)[2]
    assert pointwise_delta_structure(g)


@pytest.mark.parametrize("name", ["mabk", "three_setting", "three_setting_a0a2",
                                  "three_setting_a1a2"])
def test_printed_transcriptions_are_inconsistent(name):
    """The printed forms of these fixtures cannot all be right; the corrected ones are."""
    fx = fixtures.fixture(name)
    assert fx.erratum
    printed_S = fx.sign_table(printed=True)
    printed_g = fx.printed_inequality
    if printed_S.is_admissible():
        assert coefficients_from_sign(printed_S) != printed_g
    else:
        with pytest.raises(ValueError):
            coefficients_from_sign(printed_S)
    if printed_g != fx.inequality:
        assert not (is_admissible(printed_g) and norm_conditions(printed_g)[2])


def test_two_four_four_admissible():
    g = fixtures.tensor("two_four_four")
    assert g.scenario.settings == (2, 4, 4)
    assert is_admissible(g)
    assert norm_conditions(g)[2]


# -- coefficients_from_sign ------------------------------------------------

def test_coefficients_from_sign_single_product():
    S = SignTable.from_function(S333, lambda a, b, c: a[0] * b[0] * c[0])
    assert coefficients_from_sign(S) == unit((0, 0, 0))


def test_coefficients_from_sign_three_setting_positions():
    g = coefficients_from_sign(fixtures.fixture("three_setting").sign_table())
    plus = ["011", "021", "101", "102", "110", "111", "122", "210", "212", "221"]
    minus = ["012", "022", "120", "201", "202", "220"]
    expect = np.zeros((3, 3, 3), dtype=int)
    for s in plus:
        expect[tuple(int(ch) for ch in s)] = 1
    for s in minus:
        expect[tuple(int(ch) for ch in s)] = -1
    assert np.array_equal(g.numerators, expect)


def test_coefficients_from_sign_mabk():
    g = coefficients_from_sign(fixtures.fixture("mabk").sign_table())
    half = Fraction(1, 2)
    assert g.coefficient((0, 0, 0)) == half
    assert g.coefficient((0, 1, 1)) == half
    assert g.coefficient((1, 0, 1)) == half
    assert g.coefficient((1, 1, 0)) == -half
    assert int(np.count_nonzero(g.numerators)) == 4


def test_coefficients_from_sign_rejects_non_sign_table():
    vals = np.ones(512, dtype=int)
    vals[0] = 0
    with pytest.raises(ValueError):
        coefficients_from_sign(SignTable(S333, vals))


def test_coefficients_from_sign_rejects_same_party_products():
    S = SignTable.from_function(S333, lambda a, b, c: a[0] * a[1])
    with pytest.raises(ValueError):
        coefficients_from_sign(S)


# -- deltas ---------------------------------------------------------------

def test_delta_of_product():
    S = SignTable.from_function(S333, lambda a, b, c: a[0] * b[0] * c[0])
    d = delta(S, [(0, 0)])
    assert d.order == 1
    assert d.numerators[0, 0] == 4 and np.count_nonzero(d.numerators) == 1
    assert d.value_set() == {Fraction(1), Fraction(-1)}
    full = delta(S, [(0, 0), (1, 0), (2, 0)])
    assert full.order == 3
    assert Fraction(int(full.numerators), 4) == 1


def test_delta_three_setting_a0():
    S = fixtures.fixture("three_setting").sign_table()
    d = delta(S, [(0, 0)])
    expect = np.array([[0, 0, 0], [0, 1, -1], [0, 1, -1]])
    assert np.array_equal(d.numerators, expect)
    assert d == row_deltas(fixtures.tensor("three_setting"))[0]


def test_third_order_deltas_equal_coefficients():
    g = fixtures.tensor("three_setting")
    S = sign_table(g)
    for idx in [(0, 1, 1), (2, 0, 1), (1, 2, 0), (0, 0, 0)]:
        d = delta(S, [(0, idx[0]), (1, idx[1]), (2, idx[2])])
        assert int(d.numerators) == g.numerators[idx]


def test_delta_rejects_two_variables_of_one_party():
    S = SignTable.from_function(S333, lambda a, b, c: a[0] * b[0] * c[0])
    with pytest.raises(ValueError):
        delta(S, [(0, 0), (0, 1)])


def test_reconstruct_from_product_deltas():
    d0 = DeltaPoly.from_terms(S333, ((0, 0),), {(0, 0): 1})
    d1 = DeltaPoly.from_terms(S333, ((0, 1),), {})
    d2 = DeltaPoly.from_terms(S333, ((0, 2),), {})
    S = reconstruct_sign([d0, d1, d2])
    assert S == SignTable.from_function(S333, lambda a, b, c: a[0] * b[0] * c[0])


def test_reconstruct_round_trip_three_setting():
    S = fixtures.fixture("three_setting").sign_table()
    deltas = [delta(S, [(0, i)]) for i in range(3)]
    assert reconstruct_sign(deltas) == S


def test_reconstruct_two_party_chsh():
    half = Fraction(1, 2)
    d0 = DeltaPoly.from_terms(S33, ((0, 0),), {(0,): half, (1,): half})
    d1 = DeltaPoly.from_terms(S33, ((0, 1),), {(0,): half, (1,): -half})
    d2 = DeltaPoly.from_terms(S33, ((0, 2),), {})
    S = reconstruct_sign([d0, d1, d2])
    assert S.is_admissible()
    assert coefficients_from_sign(S) == fixtures.tensor("chsh")


def test_reconstruct_needs_every_setting():
    d0 = DeltaPoly.from_terms(S333, ((0, 0),), {(0, 0): 1})
    with pytest.raises(ValueError):
        reconstruct_sign([d0])


# -- norm conditions and delta structure ------------------------------------

def test_norm_conditions_examples():
    assert norm_conditions(fixtures.tensor("three_setting")) == (1, 1, True)
    assert norm_conditions(unit((0, 0, 0))) == (1, 1, True)
    g = CoeffTensor.from_terms(S333, {(0, 0, 0): 1, (1, 1, 1): 1})
    assert norm_conditions(g) == (2, 2, False)


def test_pointwise_examples():
    assert pointwise_delta_structure(fixtures.tensor("three_setting"))
    half = Fraction(1, 2)
    g = CoeffTensor.from_terms(S333, {(0, 0, 0): half, (1, 1, 1): half})
    assert not pointwise_delta_structure(g)
    assert pointwise_delta_structure(fixtures.tensor("chsh"))


@pytest.mark.parametrize("name", fixtures.SIGN_FIXTURE_NAMES)
def test_parseval(name):
    S = sign_table(fixtures.tensor(name))
    assert S.sum_of_squares() == 512


def test_values_of_admissible_tensors_lie_on_the_quarter_lattice():
    g = fixtures.tensor("three_setting_a0a2")
    allowed = {-4, -2, -1, 0, 1, 2, 4}
    assert set(np.unique(g.numerators)) <= allowed


# -- property tests -------------------------------------------------------

small_numerators = st.lists(st.integers(-4, 4), min_size=27, max_size=27)


@settings(max_examples=300, deadline=None)
@given(small_numerators)
def test_admissible_iff_pointwise_random(values):
    g = CoeffTensor(S333, np.array(values))
    assert is_admissible(g) == pointwise_delta_structure(g)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(fixtures.SIGN_FIXTURE_NAMES), st.integers(0, 2**32 - 1),
       st.integers(0, 2))
def test_pointwise_holds_for_every_party_on_symmetry_images(name, seed, party):
    g = fixtures.tensor(name)
    h = apply_symmetry(g, random_symmetry(S333, np.random.default_rng(seed)))
    assert is_admissible(h)
    assert pointwise_delta_structure(h, party)
    assert norm_conditions(h)[2]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(fixtures.SIGN_FIXTURE_NAMES), st.integers(0, 2**32 - 1))
def test_sign_round_trip_on_symmetry_images(name, seed):
    h = apply_symmetry(fixtures.tensor(name), random_symmetry(S333, np.random.default_rng(seed)))
    assert coefficients_from_sign(sign_table(h)) == h


def test_batch_masks_agree_with_scalar_checks(rng):
    batch = rng.integers(-1, 2, size=(400, 3, 3, 3))
    batch[:10] = fixtures.tensor("three_setting").numerators
    adm = admissible_mask(batch, S333)
    pw = pointwise_mask(batch, S333)
    assert np.array_equal(adm, pw)
    for i in range(0, 400, 40):
        assert adm[i] == is_admissible(CoeffTensor(S333, batch[i]))

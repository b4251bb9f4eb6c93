import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

from tightbell import fixtures
from tightbell import quantum as Q
from tightbell.core import CoeffTensor, Scenario

X, Y, Z = np.eye(3)
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def T_ghz():
    return Q.correlation_tensor(Q.ghz())


# -- states and tensors ---------------------------------------------------

def test_basis_state_tensor():
    T = Q.correlation_tensor(Q.basis_state("000"))
    expect = np.zeros((3, 3, 3))
    expect[2, 2, 2] = 1
    assert np.allclose(T, expect, atol=1e-12)


def test_ghz_tensor(T_ghz):
    expect = np.zeros((3, 3, 3))
    expect[0, 0, 0] = 1
    expect[0, 1, 1] = expect[1, 0, 1] = expect[1, 1, 0] = -1
    assert np.allclose(T_ghz, expect, atol=1e-12)


def test_maximally_mixed_tensor():
    assert np.allclose(Q.correlation_tensor(Q.ThreeQubitState.maximally_mixed()), 0)


def test_state_validation():
    with pytest.raises(ValueError):
        Q.ThreeQubitState(np.eye(8))
    with pytest.raises(ValueError):
        Q.ThreeQubitState.pure(np.ones(8))
    bad = np.eye(8) / 8
    bad = bad.astype(complex)
    bad[0, 1] = 0.1j
    with pytest.raises(ValueError):
        Q.ThreeQubitState(bad)
    neg = np.diag([1.5, -0.5, 0, 0, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        Q.ThreeQubitState(neg)


def _su2(rotvec):
    th = np.linalg.norm(rotvec)
    n = rotvec / th
    return expm(-0.5j * th * np.einsum("i,iab->ab", n, Q.PAULI))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_frame_covariance(seed):
    rng = np.random.default_rng(seed)
    state = Q.random_pure_state(rng)
    vecs = rng.normal(size=(3, 3))
    U = np.kron(np.kron(_su2(vecs[0]), _su2(vecs[1])), _su2(vecs[2]))
    rotated = Q.ThreeQubitState(U @ state.rho @ U.conj().T)
    R = [Rotation.from_rotvec(v).as_matrix() for v in vecs]
    assert np.allclose(Q.correlation_tensor(rotated),
                       Q.rotate_tensor(Q.correlation_tensor(state), *R), atol=1e-9)


def test_state_file_round_trip(tmp_path):
    state = Q.noisy_state(Q.ghz(), 0.7)
    back = Q.parse_state(Q.format_state(state))
    assert np.allclose(back.rho, state.rho)
    pure = Q.parse_state("\n".join(["0.7071067811865476 0"] + ["0 0"] * 6
                                   + ["0.7071067811865476 0"]))
    assert np.allclose(pure.rho, Q.ghz().rho)


def test_state_file_errors_name_the_line():
    with pytest.raises(ValueError, match="line 2"):
        Q.parse_state("1 0\n1 0 0\n")
    with pytest.raises(ValueError, match="line 1"):
        Q.parse_state("one 0\n")
    with pytest.raises(ValueError, match="8 or 64"):
        Q.parse_state("1 0\n")


# -- Bell values and see-saw -----------------------------------------------

def test_mabk_closed_form(T_ghz):
    g = fixtures.tensor("mabk")
    assert Q.bell_value(g, T_ghz, Q.mabk_settings()) == pytest.approx(2.0, abs=1e-12)


def test_mabk_seesaw(T_ghz):
    res = Q.seesaw_maximize(fixtures.tensor("mabk"), T_ghz, restarts=20, seed=0)
    assert res.value == pytest.approx(2.0, abs=1e-6)
    assert Q.bell_value(fixtures.tensor("mabk"), T_ghz, res.settings) == pytest.approx(res.value)


def test_product_state_all_z_gives_sum_of_coefficients():
    T = Q.correlation_tensor(Q.basis_state("000"))
    m = Q.MeasurementSettings((np.tile(Z, (3, 1)),) * 3)
    for name in fixtures.SIGN_FIXTURE_NAMES:
        g = fixtures.tensor(name)
        assert Q.bell_value(g, T, m) == pytest.approx(float(g.as_float().sum()))
        assert abs(Q.bell_value(g, T, m)) <= 1 + 1e-12


@pytest.mark.parametrize("name", fixtures.SIGN_FIXTURE_NAMES)
def test_maximally_mixed_gives_zero(name):
    T = Q.correlation_tensor(Q.ThreeQubitState.maximally_mixed())
    assert Q.seesaw_maximize(fixtures.tensor(name), T, restarts=2).value == 0.0


def test_seesaw_monotone(T_ghz, rng):
    g = fixtures.tensor("three_setting")
    for _ in range(10):
        start = [Q.random_unit_vectors(rng, 3) for _ in range(3)]
        hist = np.array(Q.seesaw_run(g, T_ghz, start).history)
        assert np.all(np.diff(hist) >= -1e-12)


def test_seesaw_is_seeded(T_ghz):
    g = fixtures.tensor("three_setting_a0a2")
    a = Q.seesaw_maximize(g, T_ghz, restarts=4, seed=7)
    b = Q.seesaw_maximize(g, T_ghz, restarts=4, seed=7)
    assert a.value == b.value and a.restart == b.restart
    with pytest.raises(ValueError):
        Q.seesaw_maximize(g, T_ghz, restarts=0)


def test_chsh_extension_on_ghz(T_ghz):
    g = fixtures.tensor("chsh_ab")
    value = Q.seesaw_maximize(g, T_ghz, restarts=16).value
    grid, _ = Q.planar_grid_search(g, T_ghz, 10.0)
    assert value == pytest.approx(np.sqrt(2), abs=1e-6)
    assert abs(grid - value) < 1e-3


def test_three_setting_violates_on_ghz(T_ghz):
    g = fixtures.tensor("three_setting")
    value = Q.seesaw_maximize(g, T_ghz, restarts=32).value
    grid, _ = Q.planar_grid_search(g, T_ghz, 10.0)
    assert value > 1
    assert abs(value - grid) < 1e-3


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from(fixtures.SIGN_FIXTURE_NAMES))
def test_product_states_respect_the_classical_bound(seed, name):
    rng = np.random.default_rng(seed)
    a, b, c = Q.random_unit_vectors(rng, 3)
    T = Q.correlation_tensor(Q.product_state(a, b, c))
    assert Q.seesaw_maximize(fixtures.tensor(name), T, restarts=3, seed=seed).value <= 1 + 1e-9


def test_bell_value_shape_checks(T_ghz):
    g = CoeffTensor(Scenario((2, 4, 4)), np.zeros((2, 4, 4)))
    with pytest.raises(ValueError):
        Q.bell_value(g, T_ghz, Q.mabk_settings())


# -- angle form and state conditions -----------------------------------------

def test_settings_from_angle_examples():
    frame = np.eye(3)
    v1, v2 = Q.settings_from_angle(0.0, frame)
    assert np.allclose(v1, X) and np.allclose(v2, X)
    v1, v2 = Q.settings_from_angle(np.pi / 2, frame)
    assert np.allclose(v1, Y) and np.allclose(v2, -Y)
    v1, v2 = Q.settings_from_angle(np.pi / 4, frame)
    assert np.allclose(v1 + v2, np.sqrt(2) * X) and np.allclose(v1 - v2, np.sqrt(2) * Y)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_fivevector_identity(seed):
    rng = np.random.default_rng(seed)
    T = Q.correlation_tensor(Q.random_pure_state(rng))
    frames = Q.LocalFrames.from_euler(rng.uniform(0, 2 * np.pi, 9))
    a0, b0, c0 = Q.random_unit_vectors(rng, 3)
    alpha, beta, gamma = rng.uniform(0, 2 * np.pi, 3)
    m = Q.angle_settings(frames, a0, b0, c0, alpha, beta, gamma)
    lhs = Q.fivevector_lhs(T, frames, a0, b0, c0, alpha, beta, gamma)
    assert lhs == pytest.approx(Q.bell_value(fixtures.tensor("three_setting"), T, m), abs=1e-9)


def test_fivevector_special_cases(T_ghz):
    frames = Q.LocalFrames.standard()
    assert Q.fivevector_lhs(T_ghz, frames, X, X, X, 0, 0, 0) == pytest.approx(1.0)
    assert Q.fivevector_lhs(np.zeros((3, 3, 3)), frames, X, Y, Z, 0.3, 0.2, 0.1) == 0.0


def test_condition_examples(T_ghz):
    z_frames = Q.frames_with_e1([Z, Z, Z])
    T000 = Q.correlation_tensor(Q.basis_state("000"))
    assert Q.condition_three_setting(T000, z_frames) == pytest.approx(1.0, abs=1e-9)
    assert Q.condition_three_setting(T_ghz, Q.LocalFrames.standard()) == pytest.approx(4.0, abs=1e-9)
    zero = np.zeros((3, 3, 3))
    assert Q.condition_three_setting(zero, z_frames) == 0.0
    assert Q.condition_two_three(zero, z_frames) == 0.0
    assert Q.condition_two_three(T000, z_frames) == pytest.approx(1.0, abs=1e-9)


def test_condition_two_three_matches_brute_force(T_ghz, rng):
    frames = Q.LocalFrames.standard()
    ea, eb, ec = frames.triads
    best = 0.0
    for c0 in Q.random_unit_vectors(rng, 2000):
        first = sum(np.einsum("ijk,i,j,k->", T_ghz, ea[0], eb[k], c0) ** 2 for k in range(3))
        rest = sum(np.einsum("ijk,i,j,k->", T_ghz, ea[1], eb[i], ec[j]) ** 2
                   for i in range(2) for j in range(2))
        best = max(best, first + rest)
        assert Q.condition_two_three(T_ghz, frames, c0=c0) == pytest.approx(first + rest)
    assert Q.condition_two_three(T_ghz, frames) >= best - 1e-12
    assert Q.condition_two_three(T_ghz, frames) == pytest.approx(best, abs=1e-3)
    assert Q.condition_two_three(T_ghz, frames, mode="frobenius") >= Q.condition_two_three(T_ghz, frames)


def test_condition_maxima(T_ghz):
    T000 = Q.correlation_tensor(Q.basis_state("000"))
    assert Q.condition_three_setting_max(T000, restarts=4) == pytest.approx(1.0, abs=1e-6)
    assert Q.condition_three_setting_grid(T000) == pytest.approx(1.0, abs=1e-6)
    assert Q.condition_three_setting_max(T_ghz, restarts=4) >= 4.0 - 1e-6
    mixed = Q.correlation_tensor(Q.ThreeQubitState.maximally_mixed())
    assert Q.condition_three_setting_max(mixed) == 0.0


def test_frames_validation():
    with pytest.raises(ValueError):
        Q.LocalFrames((np.eye(3), np.eye(3), np.diag([1, 1, -1])))
    with pytest.raises(ValueError):
        Q.LocalFrames((np.eye(3), np.eye(3), 2 * np.eye(3)))
    f = Q.frames_with_e1([X + Y, Z, Y])
    assert np.allclose(f.triads[0][0], (X + Y) / np.sqrt(2))

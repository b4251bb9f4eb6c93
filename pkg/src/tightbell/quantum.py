"""Three-qubit states, correlation tensors and quantum values of inequalities.

A measurement of qubit ``p`` along unit vector ``v`` gives ``E = T(v_A, v_B, v_C)``
where ``T_ijk = Tr rho (sigma_i x sigma_j x sigma_k)``. The Bell value of a
coefficient tensor ``g`` is ``sum g_ijk T(A_i, B_j, C_k)``. It is linear in each
party's vectors, which makes alternating (see-saw) maximization exact per step.

Tolerances used throughout are collected below.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from .core import CoeffTensor

# tolerances
NORM_TOL = 1e-12      # unit vectors, pure-state normalization, frame orthonormality
HERM_TOL = 1e-10      # hermiticity, trace, positivity of density matrices
EQ_TOL = 1e-9         # identities checked by callers
CONVERGENCE = 1e-10   # see-saw stopping threshold
MAX_SWEEPS = 500
DEFAULT_RESTARTS = 32

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


@dataclass(frozen=True)
class ThreeQubitState:
    """Density matrix on three qubits (A is the most significant qubit)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (8, 8):
            raise ValueError(f"density matrix must be 8x8, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > HERM_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > HERM_TOL:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -HERM_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, amplitudes) -> "ThreeQubitState":
        psi = np.asarray(amplitudes, dtype=complex).ravel()
        if psi.shape != (8,):
            raise ValueError(f"state vector must have 8 amplitudes, got {psi.size}")
        if abs(np.linalg.norm(psi) - 1) > NORM_TOL:
            raise ValueError("state vector is not normalized")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls) -> "ThreeQubitState":
        return cls(np.eye(8) / 8)


def ghz() -> ThreeQubitState:
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    return ThreeQubitState.pure(psi)


def basis_state(bits: str = "000") -> ThreeQubitState:
    psi = np.zeros(8, dtype=complex)
    psi[int(bits, 2)] = 1
    return ThreeQubitState.pure(psi)


def bloch_state(v) -> np.ndarray:
    """2x2 density matrix with Bloch vector ``v`` (|v| <= 1)."""
    v = np.asarray(v, dtype=float)
    return 0.5 * (np.eye(2) + np.einsum("i,ijk->jk", v, PAULI))


def product_state(a, b, c) -> ThreeQubitState:
    return ThreeQubitState(np.kron(np.kron(bloch_state(a), bloch_state(b)), bloch_state(c)))


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_pure_state(rng: np.random.Generator) -> ThreeQubitState:
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    return ThreeQubitState.pure(psi / np.linalg.norm(psi))


def noisy_state(state: ThreeQubitState, visibility: float) -> ThreeQubitState:
    """Mixture ``visibility * rho + (1 - visibility) * I/8``."""
    return ThreeQubitState(visibility * state.rho + (1 - visibility) * np.eye(8) / 8)


def correlation_tensor(state: ThreeQubitState) -> np.ndarray:
    """Full-correlation tensor ``T_ijk = Tr rho sigma_i x sigma_j x sigma_k``."""
    ops = np.einsum("iab,jcd,kef->ijkacebdf", PAULI, PAULI, PAULI).reshape(3, 3, 3, 8, 8)
    T = np.einsum("ijkab,ba->ijk", ops, state.rho)
    if np.abs(T.imag).max() > HERM_TOL:
        raise ValueError("correlation tensor has an imaginary part")
    return np.ascontiguousarray(T.real)


def rotate_tensor(T: np.ndarray, ra, rb, rc) -> np.ndarray:
    """Components of T in rotated bases: rows of ``r`` are the new basis vectors."""
    return np.einsum("ijk,ai,bj,ck->abc", T, ra, rb, rc)


@dataclass(frozen=True)
class MeasurementSettings:
    """Per party, an ``(m, 3)`` array of unit Bloch vectors."""

    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.vectors:
            v = np.array(v, dtype=float).reshape(-1, 3)
            if np.abs(np.linalg.norm(v, axis=1) - 1).max() > NORM_TOL * 10:
                raise ValueError("measurement vectors must be unit length")
            v.setflags(write=False)
            vecs.append(v)
        object.__setattr__(self, "vectors", tuple(vecs))

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vectors)

    def to_record(self) -> list:
        return [v.tolist() for v in self.vectors]


@dataclass(frozen=True)
class LocalFrames:
    """One right-handed orthonormal triad per party, stored as rows ``(e1, e2, e3)``."""

    triads: tuple[np.ndarray, ...]

    def __post_init__(self):
        out = []
        for r in self.triads:
            r = np.array(r, dtype=float)
            if r.shape != (3, 3) or np.abs(r @ r.T - np.eye(3)).max() > 1e-12 * 100:
                raise ValueError("frame is not orthonormal")
            if np.linalg.det(r) < 0:
                raise ValueError("frame is not right-handed")
            r.setflags(write=False)
            out.append(r)
        if len(out) != 3:
            raise ValueError("need one frame per party")
        object.__setattr__(self, "triads", tuple(out))

    @classmethod
    def standard(cls) -> "LocalFrames":
        return cls((np.eye(3),) * 3)

    @classmethod
    def from_euler(cls, angles) -> "LocalFrames":
        """Frames from three ZYZ Euler angles per party."""
        angles = np.asarray(angles, dtype=float).reshape(3, 3)
        return cls(tuple(Rotation.from_euler("ZYZ", a).as_matrix().T for a in angles))

    def tensor(self, T: np.ndarray) -> np.ndarray:
        return rotate_tensor(T, *self.triads)


def frames_with_e1(e1_vectors: Sequence) -> LocalFrames:
    """Right-handed frames whose first axis is the given vector per party."""
    triads = []
    for e1 in e1_vectors:
        e1 = np.asarray(e1, dtype=float)
        e1 = e1 / np.linalg.norm(e1)
        helper = np.eye(3)[np.argmin(np.abs(e1))]
        e2 = helper - (helper @ e1) * e1
        e2 /= np.linalg.norm(e2)
        triads.append(np.stack([e1, e2, np.cross(e1, e2)]))
    return LocalFrames(tuple(triads))


def bell_value(g: CoeffTensor, T: np.ndarray, m: MeasurementSettings) -> float:
    if m.settings != g.scenario.settings:
        raise ValueError(f"settings {m.settings} do not match scenario {g.scenario.settings}")
    if np.shape(T) != (3, 3, 3):
        raise ValueError("correlation tensor must be 3x3x3")
    A, B, C = m.vectors
    return float(np.einsum("ijk,xyz,ix,jy,kz->", g.as_float(), T, A, B, C))


def _contract_party(G: np.ndarray, T: np.ndarray, vecs, party: int) -> np.ndarray:
    """Vectors that each setting of ``party`` is paired with in the Bell value."""
    A, B, C = vecs
    if party == 0:
        return np.einsum("ijk,xyz,jy,kz->ix", G, T, B, C)
    if party == 1:
        return np.einsum("ijk,xyz,ix,kz->jy", G, T, A, C)
    return np.einsum("ijk,xyz,ix,jy->kz", G, T, A, B)


def _normalize_rows(M: np.ndarray, previous: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=1)
    out = previous.copy()
    ok = norms > 1e-300
    out[ok] = M[ok] / norms[ok, None]
    return out


@dataclass(frozen=True)
class SeesawResult:
    value: float
    settings: MeasurementSettings
    history: tuple[float, ...]
    restart: int


def seesaw_run(g: CoeffTensor, T: np.ndarray, start: Sequence[np.ndarray],
               tol: float = CONVERGENCE, max_sweeps: int = MAX_SWEEPS) -> SeesawResult:
    """One see-saw run from the given starting vectors.

    Each party update replaces every vector by the normalized vector it is
    contracted with, which maximizes the value for fixed other parties; a
    vanishing contraction keeps the previous vector.
    """
    G = g.as_float()
    vecs = [np.array(v, dtype=float) for v in start]
    history = []
    value = float(np.einsum("ijk,xyz,ix,jy,kz->", G, T, *vecs))
    history.append(value)
    for _ in range(max_sweeps):
        for p in range(3):
            vecs[p] = _normalize_rows(_contract_party(G, T, vecs, p), vecs[p])
        new = float(np.einsum("ijk,xyz,ix,jy,kz->", G, T, *vecs))
        history.append(new)
        if new - value < tol:
            value = new
            break
        value = new
    return SeesawResult(value, MeasurementSettings(tuple(vecs)), tuple(history), 0)


def seesaw_maximize(g: CoeffTensor, T: np.ndarray, restarts: int = DEFAULT_RESTARTS,
                    seed: int = 0) -> SeesawResult:
    """Best see-saw value over random restarts (ties go to the earliest restart)."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    best: Optional[SeesawResult] = None
    for r in range(restarts):
        start = [random_unit_vectors(rng, m) for m in g.scenario.settings]
        res = seesaw_run(g, T, start)
        if best is None or res.value > best.value:
            best = SeesawResult(res.value, res.settings, res.history, r)
    return best


def settings_from_angle(angle: float, frame) -> tuple[np.ndarray, np.ndarray]:
    """Pair of unit vectors with sum ``2 cos(angle) e1`` and difference ``2 sin(angle) e2``."""
    e1, e2 = np.asarray(frame, dtype=float)[:2]
    return np.cos(angle) * e1 + np.sin(angle) * e2, np.cos(angle) * e1 - np.sin(angle) * e2


def angle_settings(frames: LocalFrames, a0, b0, c0, alpha: float, beta: float,
                   gamma: float) -> MeasurementSettings:
    """Settings ``(X_0, X_1, X_2)`` per party with ``X_1, X_2`` from :func:`settings_from_angle`."""
    out = []
    for x0, angle, frame in zip((a0, b0, c0), (alpha, beta, gamma), frames.triads):
        v1, v2 = settings_from_angle(angle, frame)
        out.append(np.stack([np.asarray(x0, dtype=float), v1, v2]))
    return MeasurementSettings(tuple(out))


def fivevector_lhs(T: np.ndarray, frames: LocalFrames, a0, b0, c0, alpha: float,
                   beta: float, gamma: float) -> float:
    """Value of the three-setting inequality written as a product of two 5-vectors."""
    ea, eb, ec = frames.triads
    t_a12 = np.einsum("ijk,i,j,k->", T, a0, eb[0], ec[1])
    t_2b1 = np.einsum("ijk,i,j,k->", T, ea[1], b0, ec[0])
    t_12c = np.einsum("ijk,i,j,k->", T, ea[0], eb[1], c0)
    Tf = frames.tensor(T)
    ts = np.array([t_a12, t_2b1, t_12c, Tf[0, 0, 0], Tf[1, 1, 1]])
    ca, sa, cb, sb, cg, sg = (np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta),
                              np.cos(gamma), np.sin(gamma))
    ws = np.array([cb * sg, sa * cg, ca * sb, ca * cb * cg, sa * sb * sg])
    return float(ts @ ws)


def condition_three_setting(T: np.ndarray, frames: LocalFrames) -> float:
    """Sufficient-condition functional for the three-setting inequality in given frames
    (the free vectors ``A_0, B_0, C_0`` already maximized out)."""
    return _three_setting_terms(frames.tensor(T))


def _three_setting_terms(Tf: np.ndarray) -> float:
    return float(Tf[0, 0, 0] ** 2 + Tf[1, 1, 1] ** 2 + (Tf[:, 0, 1] ** 2).sum()
                 + (Tf[1, :, 0] ** 2).sum() + (Tf[0, 1, :] ** 2).sum())


def _euler_frames(x: np.ndarray) -> np.ndarray:
    """Frames (rows e1, e2, e3) for three ZYZ angle triples; same convention as
    :meth:`LocalFrames.from_euler` without the validation overhead."""
    a, b, c = np.asarray(x, dtype=float).reshape(3, 3).T
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    rot = np.empty((3, 3, 3))
    rot[:, 0, 0] = ca * cb * cc - sa * sc
    rot[:, 0, 1] = -ca * cb * sc - sa * cc
    rot[:, 0, 2] = ca * sb
    rot[:, 1, 0] = sa * cb * cc + ca * sc
    rot[:, 1, 1] = -sa * cb * sc + ca * cc
    rot[:, 1, 2] = sa * sb
    rot[:, 2, 0] = -sb * cc
    rot[:, 2, 1] = sb * sc
    rot[:, 2, 2] = cb
    return np.transpose(rot, (0, 2, 1))


class _FastFrames:
    """Duck-typed stand-in for :class:`LocalFrames` inside optimizers."""

    __slots__ = ("triads",)

    def __init__(self, triads):
        self.triads = triads

    def tensor(self, T):
        return rotate_tensor(T, *self.triads)


def maximize_over_frames(func, T: np.ndarray, restarts: int = 8, seed: int = 0) -> float:
    """Maximize ``func(T, frames)`` over local frames (three ZYZ angles per party)
    by seeded multi-start L-BFGS-B with finite-difference gradients. The first
    start is the standard frame, the others are uniformly random angles."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    T = np.asarray(T, dtype=float)
    if np.abs(T).max() < 1e-15:
        return 0.0

    def neg(x):
        return -func(T, _FastFrames(tuple(_euler_frames(x))))

    rng = np.random.default_rng(seed)
    best = -np.inf
    starts = [np.zeros(9)] + [rng.uniform(0, 2 * np.pi, 9) for _ in range(restarts - 1)]
    for x0 in starts:
        res = minimize(neg, x0, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-10})
        best = max(best, -res.fun)
    return float(best)


def condition_three_setting_max(T: np.ndarray, restarts: int = 8, seed: int = 0) -> float:
    """Maximum of :func:`condition_three_setting` over local frames."""
    return maximize_over_frames(condition_three_setting, T, restarts, seed)


def condition_two_three_max(T: np.ndarray, restarts: int = 8, seed: int = 0) -> float:
    """Maximum of :func:`condition_two_three` (exact over ``C_0``) over local frames."""
    return maximize_over_frames(condition_two_three, T, restarts, seed)


def condition_three_setting_grid(T: np.ndarray, step_deg: float = 15.0, starts: int = 4,
                           seed: int = 0, sweeps: int = 6) -> float:
    """Block-coordinate grid search of :func:`condition_three_setting`: one party's three
    Euler angles run over a grid while the other frames are held fixed. Several
    seeded random starting frames are used, since every term couples all parties."""
    step = np.deg2rad(step_deg)
    ang = np.arange(0, 2 * np.pi, step)
    pol = np.arange(0, np.pi + 1e-12, step)
    grid = np.array(np.meshgrid(ang, pol, ang, indexing="ij")).reshape(3, -1).T
    mats = np.transpose(Rotation.from_euler("ZYZ", grid).as_matrix(), (0, 2, 1))
    rng = np.random.default_rng(seed)
    T = np.asarray(T, dtype=float)
    overall = 0.0
    for s in range(starts):
        current = list(Rotation.random(3, random_state=rng).as_matrix()) if s else [np.eye(3)] * 3
        best = condition_three_setting(T, LocalFrames(tuple(current)))
        for _ in range(sweeps):
            improved = False
            for p in range(3):
                frames = list(current)
                frames[p] = mats
                subs = ["nai", "nbj", "nck"]
                for q in range(3):
                    if q != p:
                        subs[q] = subs[q][1:]
                Tf = np.einsum(f"ijk,{subs[0]},{subs[1]},{subs[2]}->nabc", T, *frames)
                vals = (Tf[:, 0, 0, 0] ** 2 + Tf[:, 1, 1, 1] ** 2
                        + (Tf[:, :, 0, 1] ** 2).sum(axis=1) + (Tf[:, 1, :, 0] ** 2).sum(axis=1)
                        + (Tf[:, 0, 1, :] ** 2).sum(axis=1))
                n = int(np.argmax(vals))
                if vals[n] > best + 1e-12:
                    best = float(vals[n])
                    current[p] = mats[n]
                    improved = True
            if not improved:
                break
        overall = max(overall, best)
    return overall


def condition_two_three(T: np.ndarray, frames: LocalFrames, c0=None, mode: str = "max") -> float:
    """Sufficient-condition functional for the two-by-three-setting inequality.

    The first term is ``sum_k T(e1, f_k, C_0)**2`` (``B_0`` maximized out).
    With ``c0`` given it is evaluated as is. Otherwise ``mode="max"`` maximizes
    over ``C_0`` exactly (largest squared singular value of ``T(e1, ., .)``)
    and ``mode="frobenius"`` bounds it by the sum over both free indices.
    """
    ea, eb, ec = frames.triads
    Tf = frames.tensor(T)
    M = np.einsum("ijk,i,bj,ck->bc", T, ea[0], eb, ec)  # T(e1, f_b, f_c)
    if c0 is not None:
        c0 = np.asarray(c0, dtype=float)
        first = float(((M @ (ec @ c0)) ** 2).sum())
    elif mode == "max":
        first = float(np.linalg.svd(M, compute_uv=False)[0] ** 2)
    elif mode == "frobenius":
        first = float((M ** 2).sum())
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return first + float((Tf[1, :2, :2] ** 2).sum())


def two_three_angle_settings(frames: LocalFrames, b0, c0, alpha: float, beta: float,
                         gamma: float) -> MeasurementSettings:
    """Two settings for A and three for B, C matching the angle form of the
    two-setting inequality: ``A_0, A_1`` from the angle ``alpha``; ``B_0, C_0`` free;
    ``(B_1, B_2)`` and ``(C_1, C_2)`` from ``beta`` and ``gamma``."""
    ea, eb, ec = frames.triads
    a = np.stack(settings_from_angle(alpha, ea))
    b1, b2 = settings_from_angle(beta, eb)
    c1, c2 = settings_from_angle(gamma, ec)
    return MeasurementSettings((np.vstack([a, np.zeros((1, 3)) + ea[2]]),
                                np.stack([np.asarray(b0, float), b1, b2]),
                                np.stack([np.asarray(c0, float), c1, c2])))


def _planar(phi: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)


def planar_grid_search(g: CoeffTensor, T: np.ndarray, step_deg: float = 10.0,
                       fix_first: bool = True, polish: bool = True) -> tuple[float, MeasurementSettings]:
    """Maximize the Bell value with all vectors in the x-y plane.

    A's and B's azimuths run over a grid; for each grid point the C vectors
    are optimal in closed form (each is the normalized vector it multiplies,
    so the value is the sum of those vectors' lengths). With ``fix_first`` the
    azimuths of ``A_0`` and ``B_0`` are fixed at 0, which loses nothing for
    states invariant under opposite z-rotations of A and B relative to C
    (such as GHZ). Optionally the best grid point is refined with Nelder-Mead
    over all azimuths.
    """
    G = g.as_float()
    ma, mb, mc = g.scenario.settings
    Tp = np.asarray(T, dtype=float)[:2, :2, :2]
    ang = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    n_free_a = ma - 1 if fix_first else ma
    n_free_b = mb - 1 if fix_first else mb

    def value_for(phi_a, phi_b):
        """phi_a: (n, ma), phi_b: (n, mb) -> best value with optimal C."""
        A = _planar(phi_a)[..., :2]
        B = _planar(phi_b)[..., :2]
        V = np.einsum("ijk,xyz,nix,njy->nkz", G, Tp, A, B)
        return np.linalg.norm(V, axis=2).sum(axis=1)

    grids_a = np.array(np.meshgrid(*([ang] * n_free_a), indexing="ij")).reshape(n_free_a, -1).T
    grids_b = np.array(np.meshgrid(*([ang] * n_free_b), indexing="ij")).reshape(n_free_b, -1).T
    if fix_first:
        grids_a = np.hstack([np.zeros((len(grids_a), 1)), grids_a])
        grids_b = np.hstack([np.zeros((len(grids_b), 1)), grids_b])
    B_flat = _planar(grids_b)[..., :2].reshape(len(grids_b), -1)  # (n_b, mb*2)
    best_val, best_a, best_b = -np.inf, None, None
    for pa in grids_a:
        A = _planar(pa)[:, :2]
        M = np.einsum("ijk,xyz,ix->jykz", G, Tp, A).reshape(mb * 2, mc * 2)
        V = (B_flat @ M).reshape(len(grids_b), mc, 2)
        vals = np.linalg.norm(V, axis=2).sum(axis=1)
        n = int(np.argmax(vals))
        if vals[n] > best_val:
            best_val, best_a, best_b = float(vals[n]), pa.copy(), grids_b[n].copy()
    if polish:
        x0 = np.concatenate([best_a, best_b])
        res = minimize(lambda x: -value_for(x[None, :ma], x[None, ma:])[0], x0,
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000,
                                "adaptive": True})
        if -res.fun > best_val:
            best_val = float(-res.fun)
            best_a, best_b = res.x[:ma], res.x[ma:]
    A = _planar(np.asarray(best_a))
    B = _planar(np.asarray(best_b))
    V = np.einsum("ijk,xyz,ix,jy->kz", G, np.asarray(T, float), A, B)
    norms = np.linalg.norm(V, axis=1)
    C = np.where(norms[:, None] > 1e-300, V / np.where(norms > 0, norms, 1)[:, None], [[1, 0, 0]])
    settings = MeasurementSettings((A, B, C))
    return bell_value(g, T, settings), settings


def mabk_settings() -> MeasurementSettings:
    """Settings giving the maximal GHZ value of the two-setting MABK form:
    ``A_0 = B_0 = C_0 = x``, ``A_1 = B_1 = y``, ``C_1 = -y`` (third settings unused)."""
    x, y = np.eye(3)[0], np.eye(3)[1]
    return MeasurementSettings((np.stack([x, y, x]), np.stack([x, y, x]), np.stack([x, -y, x])))


def parse_state(text: str) -> ThreeQubitState:
    """Read a state from ``re im`` lines: 8 lines for a vector, 64 for a matrix (row-major)."""
    vals = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 're im', got {line!r}")
        try:
            vals.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: not a pair of numbers: {line!r}") from None
    if len(vals) == 8:
        return ThreeQubitState.pure(vals)
    if len(vals) == 64:
        return ThreeQubitState(np.array(vals).reshape(8, 8))
    raise ValueError(f"state file must have 8 or 64 entries, got {len(vals)}")


def format_state(state: ThreeQubitState) -> str:
    return "".join(f"{z.real:.17g} {z.imag:.17g}\n" for z in state.rho.ravel())

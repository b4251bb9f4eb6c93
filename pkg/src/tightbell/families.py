"""Families of order-1 deltas and their classification.

An order-1 delta of a three-party sign function is a multilinear form in the
other two parties' setting variables taking only the values 0 and +-1. Up to
setting permutations and sign flips of those parties (and a global sign)
every such form is equivalent to one of a short list of representatives.
Besides the twelve named families plus ``0``, two more orbits occur: the
single product ``b_j c_k`` (norm 1, used by trivially factorizable sign
functions) and the identically zero delta.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import DeltaPoly, Scenario, _table_numerators, local_signs

S333 = Scenario((3, 3, 3))
S33 = Scenario((3, 3))

# Representatives as numerator matrices G[j][k] (coefficient of b_j c_k, over 4).
_REPRESENTATIVES_3 = {
    "0": [[2, 2, 0], [2, -2, 0], [0, 0, 0]],
    "I": [[-3, 1, 0], [1, 1, 0], [0, 0, 0]],
    "II": [[2, 2, 0], [0, 0, 0], [0, 0, 0]],
    "III": [[2, 0, 0], [2, 0, 0], [0, 0, 0]],
    "IV": [[2, 0, 0], [0, 2, 0], [0, 0, 0]],
    "V": [[2, 1, 1], [0, 1, -1], [0, 0, 0]],
    "VI": [[1, 1, 0], [1, 1, 0], [0, 0, 0]],
    "VII": [[0, 1, -1], [1, -1, 0], [1, 0, -1]],
    "VIII": [[2, 1, 1], [1, -1, 0], [1, 0, -1]],
    "IX": [[2, 1, 1], [2, -1, -1], [0, 0, 0]],
    "X": [[2, 2, 0], [1, -1, 0], [1, -1, 0]],
    "XI": [[2, 0, 0], [1, 1, 0], [1, -1, 0]],
    "XII": [[2, 0, 0], [0, 1, 1], [0, 1, -1]],
    "product": [[4, 0, 0], [0, 0, 0], [0, 0, 0]],
    "zero": [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
}

# Norms listed alongside the named families (the two extra orbits appended).
TABLE_NORMS = {
    "0": Fraction(16, 16), "I": Fraction(12, 16), "II": Fraction(8, 16),
    "III": Fraction(8, 16), "IV": Fraction(8, 16), "V": Fraction(8, 16),
    "VI": Fraction(4, 16), "VII": Fraction(6, 16), "VIII": Fraction(10, 16),
    "IX": Fraction(12, 16), "X": Fraction(12, 16), "XI": Fraction(8, 16),
    "XII": Fraction(8, 16), "product": Fraction(1), "zero": Fraction(0),
}

NAMED_FAMILIES = tuple(k for k in _REPRESENTATIVES_3 if k not in ("product", "zero"))

# Two-party order-1 deltas are forms in Bob's variables over 2.
_REPRESENTATIVES_2 = {
    "two:product": [2, 0, 0],
    "two:half": [1, 1, 0],
    "two:zero": [0, 0, 0],
}


@dataclass(frozen=True)
class DeltaFamily:
    family_id: str
    representative: DeltaPoly

    @property
    def norm_sq(self) -> Fraction:
        return self.representative.norm_sq()


def _family(fid: str) -> DeltaFamily:
    if fid in _REPRESENTATIVES_3:
        rep = DeltaPoly(S333, ((0, 0),), np.array(_REPRESENTATIVES_3[fid]), S333.denom_exp)
    else:
        rep = DeltaPoly(S33, ((0, 0),), np.array(_REPRESENTATIVES_2[fid]), S33.denom_exp)
    return DeltaFamily(fid, rep)


FAMILIES: dict[str, DeltaFamily] = {fid: _family(fid)
                                    for fid in list(_REPRESENTATIVES_3) + list(_REPRESENTATIVES_2)}


@lru_cache(maxsize=None)
def _matrix_transforms(m: int, swap: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (row perm, col perm, row flips, col flips, transpose) actions on m x m matrices,
    encoded as gather indices into the flat matrix plus a sign per output entry."""
    flat = np.arange(m * m).reshape(m, m)
    src, sgn = [], []
    flips = np.array(list(itertools.product((1, -1), repeat=m)))
    for transpose in ((False, True) if swap else (False,)):
        base = flat.T if transpose else flat
        for rp in itertools.permutations(range(m)):
            for cp in itertools.permutations(range(m)):
                idx = base[np.ix_(rp, cp)].ravel()
                s = np.einsum("fj,gk->fgjk", flips, flips).reshape(-1, m * m)
                src.append(np.broadcast_to(idx, s.shape))
                sgn.append(s)
    return np.concatenate(src), np.concatenate(sgn)


def _order_code(x: np.ndarray) -> np.ndarray:
    return 2 * np.abs(x) - (x < 0)


def _canonical_matrix(mat: np.ndarray, swap: bool) -> tuple[int, ...]:
    """Minimum over setting permutations, flips and global sign of a square form."""
    m = mat.shape[0]
    src, sgn = _matrix_transforms(m, swap)
    flat = mat.ravel()
    imgs = sgn * flat[src]
    imgs = np.concatenate([imgs, -imgs])
    codes = _order_code(imgs)
    order = np.lexsort(codes.T[::-1])
    return tuple(int(v) for v in imgs[order[0]])


def _canonical_vector(vec: np.ndarray) -> tuple[int, ...]:
    best = None
    for perm in itertools.permutations(range(len(vec))):
        v = np.abs(vec[list(perm)])
        key = tuple(int(x) for x in sorted(v, reverse=True))
        if best is None or key < best:
            best = key
    return best


@lru_cache(maxsize=None)
def _lookup(swap: bool) -> dict:
    table = {}
    for fid, rep in _REPRESENTATIVES_3.items():
        key = _canonical_matrix(np.array(rep), swap)
        table.setdefault(key, fid)
    return table


def classify_delta(d: DeltaPoly, allow_party_swap: bool = False) -> Optional[str]:
    """Family of an order-1 delta, or ``None`` if it matches no representative.

    Three-party deltas are matched under setting permutations and sign flips
    of the two remaining parties plus a global sign; ``allow_party_swap`` also
    permits exchanging the two remaining parties.
    """
    if d.order != 1:
        raise ValueError(f"expected an order-1 delta, got order {d.order}")
    num = np.asarray(d.numerators)
    if d.remaining_settings == (3, 3):
        scale = 1 << (2 - d.denom_exp)
        key = _canonical_matrix(num * scale, allow_party_swap)
        return _lookup(allow_party_swap).get(key)
    if d.remaining_settings == (3,):
        scale = 1 << (1 - d.denom_exp)
        key = _canonical_vector(num * scale)
        for fid, rep in _REPRESENTATIVES_2.items():
            if key == _canonical_vector(np.array(rep)):
                return fid
        return None
    raise ValueError(f"unsupported delta shape {d.remaining_settings}")


def is_valid_delta(num: np.ndarray, denom: int) -> bool:
    """True if the form takes only the values 0 and +-1."""
    num = np.asarray(num)
    vals = _table_numerators(num, num.shape)
    return bool(np.all((vals == 0) | (np.abs(vals) == denom)))


@lru_cache(maxsize=None)
def valid_order1_forms(m_b: int = 3, m_c: int = 3) -> np.ndarray:
    """Every m_b x m_c numerator matrix (over 4) whose form takes only 0 and +-1.

    A matrix G is valid iff for every c the vector G c (one entry per b-setting)
    is a valid two-party form over 4, i.e. zero, a single +-4 entry or two +-2
    entries. G is recovered from its values on m_c independent c-assignments.
    """
    rows = [np.zeros(m_b, dtype=np.int64)]
    for j in range(m_b):
        for s in (4, -4):
            v = np.zeros(m_b, dtype=np.int64)
            v[j] = s
            rows.append(v)
    for j, k in itertools.combinations(range(m_b), 2):
        for s, t in itertools.product((2, -2), repeat=2):
            v = np.zeros(m_b, dtype=np.int64)
            v[j], v[k] = s, t
            rows.append(v)
    rows = np.array(rows)
    allowed = {tuple(r) for r in rows}
    csigns = local_signs(m_c)  # (2**m_c, m_c)
    basis = csigns[:m_c] if np.linalg.matrix_rank(csigns[:m_c]) == m_c else None
    if basis is None:  # pick independent assignments greedily
        chosen = []
        for r in csigns:
            if np.linalg.matrix_rank(np.array(chosen + [r])) == len(chosen) + 1:
                chosen.append(r)
            if len(chosen) == m_c:
                break
        basis = np.array(chosen)
    inv = np.linalg.inv(basis.T.astype(float))
    out = []
    for combo in itertools.product(range(len(rows)), repeat=m_c):
        M = rows[list(combo)].T  # column t = G @ basis[t]
        G = M @ inv
        Gr = np.rint(G)
        if np.abs(G - Gr).max() > 1e-9:
            continue
        Gr = Gr.astype(np.int64)
        vals = Gr @ csigns.T  # (m_b, 2**m_c)
        if all(tuple(vals[:, t]) in allowed for t in range(vals.shape[1])):
            out.append(Gr)
    out = np.array(out)
    out.setflags(write=False)
    return out


def family_census(swap: bool = False) -> dict[Optional[str], int]:
    """How many valid 3x3 forms fall in each family."""
    counts: dict[Optional[str], int] = {}
    for G in valid_order1_forms():
        key = _canonical_matrix(G, swap)
        fid = _lookup(swap).get(key)
        counts[fid] = counts.get(fid, 0) + 1
    return counts


def equivalent_families(swap: bool) -> list[set[str]]:
    """Groups of family labels whose representatives lie in the same orbit."""
    groups: dict[tuple, set[str]] = {}
    for fid, rep in _REPRESENTATIVES_3.items():
        groups.setdefault(_canonical_matrix(np.array(rep), swap), set()).add(fid)
    return [g for g in groups.values() if len(g) > 1]

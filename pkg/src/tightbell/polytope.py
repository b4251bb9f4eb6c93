"""Exact facet certification on the full-correlation local-realistic polytope.

Vertices are the deterministic correlation points ``E[i,j,k] = a_i b_j c_k``.
An inequality ``sum g E <= 1`` defines a facet when its maximum over the
vertices is exactly 1 and the vertices attaining it span an affine subspace
of dimension one less than the number of correlation coordinates. Ranks are
computed by fraction-free integer elimination.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import CoeffTensor, Scenario, as_scenario, local_signs


@dataclass(frozen=True)
class LRVertex:
    local_outcomes: tuple[tuple[int, ...], ...]
    correlations: np.ndarray


@dataclass(frozen=True)
class TightnessCertificate:
    max_value: Fraction
    saturating_count: int
    affine_rank: int
    ambient_dim: int
    is_facet: bool

    def to_record(self) -> dict:
        return {
            "max_num": self.max_value.numerator,
            "max_den": self.max_value.denominator,
            "saturating_count": self.saturating_count,
            "affine_rank": self.affine_rank,
            "ambient_dim": self.ambient_dim,
            "is_facet": self.is_facet,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TightnessCertificate":
        return cls(Fraction(rec["max_num"], rec["max_den"]), rec["saturating_count"],
                   rec["affine_rank"], rec["ambient_dim"], rec["is_facet"])


def _outer(vectors) -> np.ndarray:
    out = np.array(1, dtype=np.int64)
    for v in vectors:
        out = np.multiply.outer(out, np.asarray(v, dtype=np.int64))
    return out


def lr_vertices(scenario, dedup: bool = True) -> list[LRVertex]:
    """All deterministic outcome assignments, optionally collapsing those with equal
    correlations (they differ by flipping every outcome of an even number of parties)."""
    scenario = as_scenario(scenario)
    tables = [local_signs(m) for m in scenario.settings]
    out = []
    seen = set()
    for idx in np.ndindex(*(len(t) for t in tables)):
        outcomes = tuple(tuple(int(x) for x in t[i]) for t, i in zip(tables, idx))
        corr = _outer(outcomes)
        if dedup:
            key = corr.tobytes()
            if key in seen:
                continue
            seen.add(key)
        corr.setflags(write=False)
        out.append(LRVertex(outcomes, corr))
    return out


@lru_cache(maxsize=None)
def vertex_matrix(settings: tuple[int, ...], dedup: bool = True) -> np.ndarray:
    """Vertices as rows of flattened correlations."""
    mat = np.array([v.correlations.ravel() for v in lr_vertices(Scenario(settings), dedup)])
    mat.setflags(write=False)
    return mat


def lhs_extremes(g: CoeffTensor, vertices=None) -> tuple[Fraction, Fraction]:
    """Exact (max, min) of ``sum g E`` over the vertices."""
    if vertices is None:
        mat = vertex_matrix(g.scenario.settings)
    else:
        mat = np.array([np.asarray(v.correlations).ravel() for v in vertices])
        if mat.shape[1] != g.scenario.n_coefficients:
            raise ValueError("vertex shape does not match the coefficient tensor")
    vals = mat @ g.numerators.ravel()
    return Fraction(int(vals.max()), g.denominator), Fraction(int(vals.min()), g.denominator)


def integer_rank(rows) -> int:
    """Rank of an integer matrix by Bareiss fraction-free elimination (exact)."""
    m = [[int(x) for x in row] for row in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, n_rows):
            f = m[r][col]
            row_r = m[r]
            row_p = m[rank]
            for c in range(col, n_cols):
                # exact division is the Bareiss invariant
                row_r[c] = (p * row_r[c] - f * row_p[c]) // prev
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def affine_rank(points) -> int:
    """Dimension of the affine hull of a set of integer points."""
    pts = np.asarray(points, dtype=np.int64)
    if len(pts) == 0:
        return -1
    return integer_rank(pts[1:] - pts[0])


def tightness(g: CoeffTensor) -> TightnessCertificate:
    mat = vertex_matrix(g.scenario.settings)
    vals = mat @ g.numerators.ravel()
    max_value = Fraction(int(vals.max()), g.denominator)
    sat = mat[vals == vals.max()]
    rank = affine_rank(sat)
    ambient = g.scenario.n_coefficients
    return TightnessCertificate(max_value, len(sat), rank, ambient,
                                max_value == 1 and rank == ambient - 1)


def full_dimension_rank(scenario) -> int:
    """Affine rank of the whole vertex set (equals the coordinate count when full-dimensional)."""
    return affine_rank(vertex_matrix(as_scenario(scenario).settings))

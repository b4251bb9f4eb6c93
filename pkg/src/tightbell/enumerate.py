"""Enumeration of admissible correlation inequalities and setting reductions.

Two-party inequalities are enumerated exhaustively over the coefficient
lattice and, independently, by composing order-1 deltas. Three-party
inequalities with three settings each are produced by two strategies whose
class sets are cross-checked:

* ``delta``: order-1 deltas drawn from the symmetry orbits of the family
  representatives, combined in triples whose supports partition the
  assignments of the other two parties;
* ``dfs``: a depth-first search over integer numerators ``h = 4 g`` that
  fixes coefficients position by position (C fastest, then B, then A) and
  prunes on squared weight, on partial values over fully determined
  assignments, and on support overlaps.

Both searches accept node and time budgets and flag their results as
incomplete when a budget runs out.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import (CoeffTensor, Scenario, admissible_mask, as_scenario, is_admissible,
                   local_signs, norm_conditions, pointwise_mask, row_deltas)
from .families import FAMILIES, _REPRESENTATIVES_3, classify_delta, valid_order1_forms
from .polytope import TightnessCertificate, tightness
from .symmetry import canonical_classes, canonicalize, order_key

S33 = Scenario((3, 3))
S333 = Scenario((3, 3, 3))


@dataclass
class InequalityRecord:
    canonical: CoeffTensor
    orbit_size: int
    admissible: bool
    tight: Optional[TightnessCertificate] = None
    delta_profile: tuple[Optional[str], ...] = ()
    provenance: tuple[str, ...] = ()
    quantum: dict = field(default_factory=dict)

    @property
    def key(self) -> tuple:
        return (self.canonical.scenario.settings, order_key(self.canonical.numerators.ravel()))

    def to_record(self) -> dict:
        rec = self.canonical.to_record()
        rec.update({
            "orbit_size": self.orbit_size,
            "admissible": self.admissible,
            "tight": self.tight.to_record() if self.tight else None,
            "delta_profile": [d if d is not None else "none" for d in self.delta_profile],
            "provenance": list(self.provenance),
        })
        if self.quantum:
            rec["quantum"] = {k: float(f"{v:.12g}") for k, v in sorted(self.quantum.items())}
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "InequalityRecord":
        tight = TightnessCertificate.from_record(rec["tight"]) if rec.get("tight") else None
        profile = tuple(None if d == "none" else d for d in rec.get("delta_profile", ()))
        return cls(CoeffTensor.from_record(rec), int(rec["orbit_size"]), bool(rec["admissible"]),
                   tight, profile, tuple(rec.get("provenance", ())), dict(rec.get("quantum", {})))


@dataclass
class SearchStats:
    """Outcome of one enumeration strategy."""

    tensors: np.ndarray
    complete: bool
    nodes: int
    seconds: float


@dataclass
class EnumerationResult:
    records: list[InequalityRecord]
    complete: bool
    stats: dict[str, SearchStats]
    classes: dict[str, set[tuple[int, ...]]]

    @property
    def strategies_agree(self) -> bool:
        sets = list(self.classes.values())
        return all(s == sets[0] for s in sets[1:])


class _Budget:
    def __init__(self, nodes: Optional[int], secs: Optional[float]):
        self.max_nodes = nodes
        self.deadline = None if secs is None else time.monotonic() + secs
        self.nodes = 0
        self.exhausted = False

    def tick(self) -> bool:
        """Count a node; False once a budget has run out."""
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            self.exhausted = True
        elif self.deadline is not None and self.nodes % 1024 == 0 \
                and time.monotonic() > self.deadline:
            self.exhausted = True
        return not self.exhausted


def delta_profile(g: CoeffTensor, party: int = 0) -> tuple[Optional[str], ...]:
    return tuple(classify_delta(d) for d in row_deltas(g, party))


def _make_record(flat, scenario, size, provenance, certify) -> InequalityRecord:
    g = CoeffTensor(scenario, np.array(flat))
    return InequalityRecord(
        canonical=g,
        orbit_size=size,
        admissible=is_admissible(g),
        tight=tightness(g) if certify else None,
        delta_profile=delta_profile(g),
        provenance=tuple(sorted(provenance)),
    )


# -- two parties ----------------------------------------------------------

def _two_party_lattice() -> np.ndarray:
    """All 3x3 numerator arrays over 2 in {-2..2} that are admissible."""
    vals = np.arange(-2, 3, dtype=np.int8)
    grid = np.stack(np.meshgrid(*([vals] * 9), indexing="ij"), axis=-1).reshape(-1, 9)
    grid = grid[(grid.astype(np.int64) ** 2).sum(axis=1) == 4]
    grid = grid[np.abs(grid.sum(axis=1, dtype=np.int64)) == 2].astype(np.int64)
    return grid[admissible_mask(grid.reshape(-1, 3, 3), S33)].reshape(-1, 9)


def _two_party_forms() -> np.ndarray:
    """Order-1 deltas of a two-party sign function: forms over 2 in Bob's variables
    taking only 0 and +-1."""
    vals = np.arange(-2, 3)
    forms = np.array(list(itertools.product(vals, repeat=3)))
    v = forms @ local_signs(3).T
    ok = np.all((v == 0) | (np.abs(v) == 2), axis=1)
    return forms[ok]


def _compose_rows(forms: np.ndarray, values: np.ndarray, n_rows: int,
                  budget: _Budget) -> list[np.ndarray]:
    """All tuples of forms whose value supports partition the assignments."""
    n_points = values.shape[1]
    full = (1 << n_points) - 1
    by_mask: dict[int, list[int]] = {}
    for i, row in enumerate(values):
        mask = 0
        for b in np.nonzero(row)[0]:
            mask |= 1 << int(b)
        by_mask.setdefault(mask, []).append(i)
    masks = sorted(by_mask)
    out = []

    def rec(depth, used, chosen):
        if not budget.tick():
            return
        if depth == n_rows - 1:
            for i in by_mask.get(full & ~used, ()):
                out.append(np.stack([forms[j] for j in chosen + [i]]))
            return
        for mask in masks:
            if mask & used:
                continue
            for i in by_mask[mask]:
                rec(depth + 1, used | mask, chosen + [i])

    rec(0, 0, [])
    return out


def enumerate_two_party(method: str = "lattice", certify: bool = True) -> list[InequalityRecord]:
    """Every admissible 3x3 inequality up to symmetry.

    ``method="lattice"`` scans all of {0, +-1/2, +-1}^9; ``method="delta"``
    composes order-1 deltas (one per Alice setting) with disjoint supports.
    """
    if method == "lattice":
        batch = _two_party_lattice()
    elif method == "delta":
        forms = _two_party_forms()
        values = forms @ local_signs(3).T
        rows = _compose_rows(forms, values, 3, _Budget(None, None))
        batch = np.array([r.ravel() for r in rows])
        batch = batch[admissible_mask(batch.reshape(-1, 3, 3), S33)]
    else:
        raise ValueError(f"unknown method {method!r}")
    return [_make_record(flat, S33, size, ("two_party:" + method,), certify)
            for flat, size in canonical_classes(batch, S33)]


# -- three parties --------------------------------------------------------

_BC_SIGNS = local_signs(6)  # (64, 6): b-bits then c-bits, b most significant


def _form_values(forms: np.ndarray) -> np.ndarray:
    """Values (numerators over 4) of 3x3 forms at the 64 (b, c) assignments."""
    b = _BC_SIGNS[:, :3]
    c = _BC_SIGNS[:, 3:]
    return np.einsum("nj,fjk,nk->fn", b, forms.reshape(-1, 3, 3), c)


def _family_pool() -> np.ndarray:
    """Union of the orbits of the family representatives under setting permutations,
    sign flips of B and C, and the global sign."""
    pool = set()
    perms = list(itertools.permutations(range(3)))
    flips = list(itertools.product((1, -1), repeat=3))
    for rep in _REPRESENTATIVES_3.values():
        rep = np.array(rep)
        for rp in perms:
            for cp in perms:
                m = rep[np.ix_(rp, cp)]
                for fb in flips:
                    for fc in flips:
                        x = np.array(fb)[:, None] * m * np.array(fc)[None, :]
                        pool.add(x.tobytes())
                        pool.add((-x).tobytes())
    arr = np.array([np.frombuffer(b, dtype=np.int64) for b in sorted(pool)])
    return arr.reshape(-1, 3, 3)


def search_delta_composition(budget_nodes=None, budget_secs=None) -> SearchStats:
    t0 = time.monotonic()
    budget = _Budget(budget_nodes, budget_secs)
    forms = _family_pool()
    values = _form_values(forms)
    rows = _compose_rows(forms, values, 3, budget)
    batch = np.array([r.ravel() for r in rows]).reshape(-1, 27)
    if len(batch):
        keep = pointwise_mask(batch.reshape(-1, 3, 3, 3), S333)
        batch = batch[keep]
    return SearchStats(batch, not budget.exhausted, budget.nodes, time.monotonic() - t0)


def _order2_forms(budget: _Budget) -> list[np.ndarray]:
    """Vectors over C (numerators over 4) whose values are all in {0, +-2, +-4}."""
    csigns = local_signs(3)
    out = []

    def rec(k, acc, w):
        if not budget.tick():
            return
        if k == 3:
            v = csigns @ np.array(acc)
            if np.all(np.isin(v, (0, 2, -2, 4, -4))):
                out.append(np.array(acc))
            return
        for h in range(-4, 5):
            if w + h * h <= 16:
                rec(k + 1, acc + [h], w + h * h)

    rec(0, [], 0)
    return out


def _order1_rows(o2: list[np.ndarray], budget: _Budget) -> np.ndarray:
    """3x3 forms over 4 taking values in {0, +-4}; B rows chosen one at a time with
    the prefix bound sum_j |G_j . c| <= 4 at every c."""
    csigns = local_signs(3)
    o2_vals = [csigns @ x for x in o2]  # per c assignment
    o2_w = [int((x ** 2).sum()) for x in o2]
    out = []

    def rec(j, chosen, absum, w):
        if not budget.tick():
            return
        if j == 3:
            G = np.stack([o2[i] for i in chosen])
            v = local_signs(3) @ G @ csigns.T
            if np.all(np.isin(v, (0, 4, -4))):
                out.append(G)
            return
        for i, (x, vals) in enumerate(zip(o2, o2_vals)):
            if w + o2_w[i] > 16:
                continue
            nabs = absum + np.abs(vals)
            if np.any(nabs > 4):
                continue
            rec(j + 1, chosen + [i], nabs, w + o2_w[i])

    rec(0, [], np.zeros(len(csigns), dtype=np.int64), 0)
    return np.array(out).reshape(-1, 3, 3)


def search_lattice_dfs(budget_nodes=None, budget_secs=None) -> SearchStats:
    t0 = time.monotonic()
    budget = _Budget(budget_nodes, budget_secs)
    o2 = _order2_forms(budget)
    rows = _order1_rows(o2, budget) if not budget.exhausted else np.zeros((0, 3, 3), int)
    weights = (rows ** 2).sum(axis=(1, 2))
    values = _form_values(rows)
    full = (1 << 64) - 1
    masks = []
    for row in values:
        m = 0
        for b in np.nonzero(row)[0]:
            m |= 1 << int(b)
        masks.append(m)
    by_mask: dict[int, list[int]] = {}
    for i, m in enumerate(masks):
        by_mask.setdefault(m, []).append(i)
    mask_arr = np.array(masks, dtype=np.uint64)
    found = []

    def rec(a, used, chosen, w):
        if not budget.tick():
            return
        if a == 2:
            for i in by_mask.get(full & ~used, ()):
                if w + weights[i] == 16:
                    found.append(np.stack([rows[j] for j in chosen + [i]]).ravel())
            return
        free = ((mask_arr & np.uint64(used)) == 0) & (weights <= 16 - w)
        for i in np.nonzero(free)[0]:
            rec(a + 1, used | masks[i], chosen + [i], w + int(weights[i]))

    if not budget.exhausted:
        rec(0, 0, [], 0)
    batch = np.array(found).reshape(-1, 27)
    if len(batch):
        batch = batch[np.abs(batch.sum(axis=1)) == 4]
    return SearchStats(batch, not budget.exhausted, budget.nodes, time.monotonic() - t0)


STRATEGIES = {"delta": search_delta_composition, "dfs": search_lattice_dfs}


def enumerate_three_party(budget_nodes: Optional[int] = None, budget_secs: Optional[float] = None,
                          strategies: Iterable[str] = ("delta", "dfs"),
                          certify: bool = True, fixtures: Optional[dict] = None
                          ) -> EnumerationResult:
    """Admissible 3x3x3 inequalities up to symmetry, merged over strategies.

    Budgets apply to each strategy separately. ``fixtures`` maps names to
    tensors; a record whose class contains a fixture gets ``fixture:<name>``
    in its provenance.
    """
    stats = {}
    classes = {}
    provenance: dict[tuple[int, ...], set[str]] = {}
    sizes: dict[tuple[int, ...], int] = {}
    for name in strategies:
        st = STRATEGIES[name](budget_nodes, budget_secs)
        ok = admissible_mask(st.tensors.reshape(-1, 3, 3, 3), S333) if len(st.tensors) else []
        if len(st.tensors) and not np.all(ok):
            raise RuntimeError(f"strategy {name} produced non-admissible tensors")
        stats[name] = st
        found = canonical_classes(st.tensors, S333)
        classes[name] = {flat for flat, _ in found}
        for flat, size in found:
            provenance.setdefault(flat, set()).add("search:" + name)
            sizes[flat] = size
    for fname, g in (fixtures or {}).items():
        if g.scenario != S333:
            continue
        canon, size = canonicalize(g)
        flat = tuple(int(v) for v in canon.numerators.ravel())
        if flat in provenance:
            provenance[flat].add("fixture:" + fname)
    records = [_make_record(flat, S333, sizes[flat], provenance[flat], certify)
               for flat in sorted(provenance, key=order_key)]
    complete = all(st.complete for st in stats.values())
    return EnumerationResult(records, complete, stats, classes)


# -- reductions -----------------------------------------------------------

def identify_settings(g: CoeffTensor, party: int, drop: int, keep: int) -> CoeffTensor:
    """Set setting ``drop`` of ``party`` equal to setting ``keep``.

    The merged slice is the sum of the two slices and the dropped index is
    removed. The reduced sign function is a restriction of the original one,
    so admissibility is preserved; this is re-checked.
    """
    settings = g.scenario.settings
    if not 0 <= party < len(settings):
        raise ValueError(f"no party {party}")
    m = settings[party]
    if drop == keep or not (0 <= drop < m and 0 <= keep < m):
        raise ValueError(f"invalid merge {drop} -> {keep} for party {party} with {m} settings")
    if m == 1:
        raise ValueError("cannot merge the only setting of a party")
    x = np.array(g.numerators)
    x = np.moveaxis(x, party, 0)
    x[keep] = x[keep] + x[drop]
    x = np.delete(x, drop, axis=0)
    x = np.moveaxis(x, 0, party)
    new_settings = settings[:party] + (m - 1,) + settings[party + 1:]
    out = CoeffTensor(Scenario(new_settings), x, g.denom_exp)
    if is_admissible(g) and not is_admissible(out):
        raise RuntimeError("merging settings broke admissibility")
    return out


def reduce_support(g: CoeffTensor) -> CoeffTensor:
    """Drop settings whose coefficient slice is identically zero (keeping at least one)."""
    x = np.array(g.numerators)
    for p in range(x.ndim):
        other = tuple(q for q in range(x.ndim) if q != p)
        used = np.any(x != 0, axis=other)
        if not used.any():
            used[0] = True
        x = np.compress(used, x, axis=p)
    return CoeffTensor(Scenario(x.shape), x, g.denom_exp)


def embed(g: CoeffTensor, settings) -> CoeffTensor:
    """Pad with zero coefficients for unused extra settings."""
    settings = tuple(settings)
    if len(settings) != g.scenario.parties or any(
            a > b for a, b in zip(g.scenario.settings, settings)):
        raise ValueError(f"cannot embed {g.scenario} into {settings}")
    x = np.zeros(settings, dtype=np.int64)
    x[tuple(slice(0, m) for m in g.scenario.settings)] = g.numerators
    return CoeffTensor(Scenario(settings), x, g.denom_exp)


def comparable_form(g: CoeffTensor, settings=None) -> CoeffTensor:
    """Reduce to the used settings, embed in a square scenario and canonicalize."""
    r = reduce_support(g)
    if settings is None:
        m = max(r.scenario.settings)
        settings = (m,) * r.scenario.parties
    return canonicalize(embed(r, settings))[0]


def same_class(g: CoeffTensor, h: CoeffTensor) -> bool:
    """True if the two tensors agree up to unused settings and local symmetries."""
    rg, rh = reduce_support(g), reduce_support(h)
    if rg.scenario.parties != rh.scenario.parties:
        return False
    m = max(rg.scenario.settings + rh.scenario.settings)
    settings = (m,) * rg.scenario.parties
    return comparable_form(rg, settings) == comparable_form(rh, settings)


def sorted_records(records: Iterable[InequalityRecord]) -> list[InequalityRecord]:
    return sorted(records, key=lambda r: r.key)


def catalog(records: Iterable[InequalityRecord]) -> list[dict]:
    return [r.to_record() for r in sorted_records(records)]


def audit_record(rec: InequalityRecord) -> dict:
    """Exact checks a catalog entry must pass."""
    g = rec.canonical
    _, _, norms_ok = norm_conditions(g)
    return {
        "admissible": is_admissible(g),
        "norms": norms_ok,
        "canonical": canonicalize(g)[0] == g,
        "families": all(f is not None for p in range(g.scenario.parties)
                        for f in delta_profile(g, p)),
    }


__all__ = [
    "InequalityRecord", "EnumerationResult", "SearchStats", "FAMILIES",
    "enumerate_two_party", "enumerate_three_party", "identify_settings",
    "reduce_support", "embed", "comparable_form", "same_class", "catalog",
    "delta_profile", "valid_order1_forms",
]

"""Local symmetries of correlation inequalities and orbit canonicalization.

The group is generated by per-party setting permutations, per-setting sign
flips, permutations of parties with equal setting counts, and a global
sign. Its order is counted with every flip pattern as a separate element
(``prod(m!) * #party_perms * 2**sum(m) * 2``), even though flipping all
settings of two parties acts trivially; orbit sizes are computed as
``group_order / stabilizer_order`` with the same convention.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .core import CoeffTensor, Scenario, as_scenario


@dataclass(frozen=True)
class LocalSymmetry:
    """Setting ``s`` of party ``p`` becomes setting ``setting_perms[p][s]`` of party
    ``party_perm[p]``, with its sign multiplied by ``flips[p][s]``."""

    party_perm: tuple[int, ...]
    setting_perms: tuple[tuple[int, ...], ...]
    flips: tuple[tuple[int, ...], ...]
    global_sign: int = 1

    def check(self, scenario: Scenario) -> None:
        settings = scenario.settings
        n = len(settings)
        if sorted(self.party_perm) != list(range(n)):
            raise ValueError(f"party_perm {self.party_perm} is not a permutation of {n} parties")
        for p in range(n):
            if settings[self.party_perm[p]] != settings[p]:
                raise ValueError("party permutation must preserve setting counts")
            if sorted(self.setting_perms[p]) != list(range(settings[p])):
                raise ValueError(f"bad setting permutation for party {p}")
            if len(self.flips[p]) != settings[p] or any(f not in (1, -1) for f in self.flips[p]):
                raise ValueError(f"bad sign flips for party {p}")
        if self.global_sign not in (1, -1):
            raise ValueError("global_sign must be +-1")

    @classmethod
    def identity(cls, scenario) -> "LocalSymmetry":
        settings = as_scenario(scenario).settings
        return cls(tuple(range(len(settings))),
                   tuple(tuple(range(m)) for m in settings),
                   tuple((1,) * m for m in settings), 1)

    def then(self, other: "LocalSymmetry") -> "LocalSymmetry":
        """Composite that applies ``self`` first and ``other`` second."""
        n = len(self.party_perm)
        party_perm = tuple(other.party_perm[self.party_perm[p]] for p in range(n))
        setting_perms = []
        flips = []
        for p in range(n):
            q = self.party_perm[p]
            setting_perms.append(tuple(other.setting_perms[q][self.setting_perms[p][s]]
                                       for s in range(len(self.setting_perms[p]))))
            flips.append(tuple(self.flips[p][s] * other.flips[q][self.setting_perms[p][s]]
                               for s in range(len(self.flips[p]))))
        return LocalSymmetry(party_perm, tuple(setting_perms), tuple(flips),
                             self.global_sign * other.global_sign)

    def inverse(self) -> "LocalSymmetry":
        n = len(self.party_perm)
        party_perm = [0] * n
        setting_perms: list = [None] * n
        flips: list = [None] * n
        for p in range(n):
            q = self.party_perm[p]
            party_perm[q] = p
            sp = self.setting_perms[p]
            inv = [0] * len(sp)
            for s, t in enumerate(sp):
                inv[t] = s
            setting_perms[q] = tuple(inv)
            flips[q] = tuple(self.flips[p][inv[t]] for t in range(len(sp)))
        return LocalSymmetry(tuple(party_perm), tuple(setting_perms), tuple(flips),
                             self.global_sign)


def apply_symmetry(g: CoeffTensor, t: LocalSymmetry) -> CoeffTensor:
    t.check(g.scenario)
    x = np.array(g.numerators)
    n = g.scenario.parties
    for p in range(n):
        shape = [1] * n
        shape[p] = -1
        x = x * np.array(t.flips[p]).reshape(shape)
        inv = np.argsort(t.setting_perms[p])
        x = np.take(x, inv, axis=p)
    x = np.transpose(x, np.argsort(t.party_perm))
    return CoeffTensor(g.scenario, t.global_sign * x)


def allowed_party_perms(settings: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [perm for perm in itertools.permutations(range(len(settings)))
            if all(settings[perm[p]] == settings[p] for p in range(len(settings)))]


def group_order(scenario) -> int:
    settings = as_scenario(scenario).settings
    perms = math.prod(math.factorial(m) for m in settings)
    return perms * len(allowed_party_perms(settings)) * 2 ** sum(settings) * 2


def random_symmetry(scenario, rng: np.random.Generator) -> LocalSymmetry:
    settings = as_scenario(scenario).settings
    party_perms = allowed_party_perms(settings)
    party_perm = party_perms[rng.integers(len(party_perms))]
    setting_perms = tuple(tuple(int(v) for v in rng.permutation(m)) for m in settings)
    flips = tuple(tuple(int(v) for v in rng.choice((1, -1), size=m)) for m in settings)
    return LocalSymmetry(tuple(party_perm), setting_perms, flips, int(rng.choice((1, -1))))


def generators(scenario) -> list[LocalSymmetry]:
    """A generating set: transposition and cycle per party, one flip per party,
    equal-count party transpositions, and the global sign."""
    scenario = as_scenario(scenario)
    settings = scenario.settings
    ident = LocalSymmetry.identity(scenario)
    gens = []
    for p, m in enumerate(settings):
        perms = []
        if m >= 2:
            perms.append((1, 0) + tuple(range(2, m)))
        if m >= 3:
            perms.append(tuple((s + 1) % m for s in range(m)))
        for perm in perms:
            sp = list(ident.setting_perms)
            sp[p] = perm
            gens.append(LocalSymmetry(ident.party_perm, tuple(sp), ident.flips, 1))
        fl = list(ident.flips)
        fl[p] = (-1,) + (1,) * (m - 1)
        gens.append(LocalSymmetry(ident.party_perm, ident.setting_perms, tuple(fl), 1))
    for p, q in itertools.combinations(range(len(settings)), 2):
        if settings[p] == settings[q]:
            perm = list(range(len(settings)))
            perm[p], perm[q] = q, p
            gens.append(LocalSymmetry(tuple(perm), ident.setting_perms, ident.flips, 1))
    gens.append(LocalSymmetry(ident.party_perm, ident.setting_perms, ident.flips, -1))
    return gens


@lru_cache(maxsize=None)
def _generator_maps(settings: tuple[int, ...]) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Each generator as (source index, sign) arrays on the flattened numerators."""
    scenario = Scenario(settings)
    n = scenario.n_coefficients
    probe = CoeffTensor(scenario, np.arange(1, n + 1))
    out = []
    for t in generators(scenario):
        img = apply_symmetry(probe, t).numerators.ravel()
        out.append((np.abs(img) - 1, np.sign(img)))
    return tuple(out)


def order_key(values) -> tuple[int, ...]:
    """Total order on numerator arrays: smaller magnitude first, negative before positive."""
    return tuple(2 * abs(v) - (v < 0) for v in values)


# orbit memo: (settings, flat numerators) -> (canonical flat numerators, orbit size)
_ORBIT_MEMO: dict = {}


def orbit(g: CoeffTensor, max_size: int = 2_000_000) -> set[tuple[int, ...]]:
    """All flat numerator tuples in the orbit of ``g`` (breadth-first over generators)."""
    maps = [(src.tolist(), sgn.tolist()) for src, sgn in _generator_maps(g.scenario.settings)]
    start = tuple(int(v) for v in g.numerators.ravel())
    seen = {start}
    frontier = [start]
    idx = range(len(start))
    while frontier:
        nxt = []
        for x in frontier:
            for src, sgn in maps:
                y = tuple(sgn[k] * x[src[k]] for k in idx)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > max_size:
            raise RuntimeError(f"orbit exceeds {max_size} elements")
        frontier = nxt
    return seen


def canonicalize(g: CoeffTensor) -> tuple[CoeffTensor, int]:
    """Orbit minimum under :func:`order_key`, and the orbit size."""
    settings = g.scenario.settings
    flat = tuple(int(v) for v in g.numerators.ravel())
    hit = _ORBIT_MEMO.get((settings, flat))
    if hit is None:
        members = orbit(g)
        canon = min(members, key=order_key)
        hit = (canon, len(members))
        for x in members:
            _ORBIT_MEMO[(settings, x)] = hit
    canon, size = hit
    return CoeffTensor(g.scenario, np.array(canon)), size


def canonical_key(g: CoeffTensor) -> tuple:
    canon, _ = canonicalize(g)
    return (canon.scenario.settings, order_key(canon.numerators.ravel()))


@lru_cache(maxsize=None)
def _perm_table(settings: tuple[int, ...]) -> tuple[np.ndarray, tuple]:
    """Flat index maps for every party/setting permutation, with the structural labels."""
    scenario = Scenario(settings)
    n = scenario.n_coefficients
    probe = CoeffTensor(scenario, np.arange(1, n + 1))
    rows = []
    labels = []
    no_flips = tuple((1,) * m for m in settings)
    for party_perm in allowed_party_perms(settings):
        for sp in itertools.product(*[list(itertools.permutations(range(m))) for m in settings]):
            t = LocalSymmetry(party_perm, tuple(sp), no_flips, 1)
            rows.append(apply_symmetry(probe, t).numerators.ravel() - 1)
            labels.append(t)
    return np.array(rows), tuple(labels)


def _gf2_solution_count(equations: list[tuple[int, int]], nbits: int) -> int:
    """Number of solutions of ``mask . f = rhs`` over GF(2), equations as (mask, rhs)."""
    basis: dict[int, tuple[int, int]] = {}
    for mask, rhs in equations:
        while mask:
            top = mask.bit_length() - 1
            if top not in basis:
                basis[top] = (mask, rhs)
                break
            bm, br = basis[top]
            mask ^= bm
            rhs ^= br
        else:
            if rhs:
                return 0
    return 1 << (nbits - len(basis))


def stabilizer_order(g: CoeffTensor) -> int:
    """Count group elements fixing ``g`` by explicit enumeration of permutations and
    solving the sign-flip conditions over GF(2)."""
    settings = g.scenario.settings
    table, labels = _perm_table(settings)
    flat = g.numerators.ravel()
    cand = np.nonzero(np.all(np.abs(flat[table]) == np.abs(flat)[None, :], axis=1))[0]
    offsets = np.cumsum((0,) + settings[:-1])
    nbits = sum(settings) + 1  # flip bit per setting plus the global sign
    shape = settings
    total = 0
    for r in cand:
        row = table[r]
        # position k receives the entry at row[k], times the flips of that source index
        eqs = []
        for k in np.nonzero(flat)[0]:
            src = int(row[k])
            idx = np.unravel_index(src, shape)
            mask = 1 << (nbits - 1)
            for p, s in enumerate(idx):
                mask |= 1 << int(offsets[p] + s)
            rhs = int(flat[src] != flat[k])
            eqs.append((mask, rhs))
        total += _gf2_solution_count(eqs, nbits)
    return total


def orbit_size(g: CoeffTensor) -> int:
    return group_order(g.scenario) // stabilizer_order(g)


def iter_orbit_tensors(g: CoeffTensor) -> Iterator[CoeffTensor]:
    for x in sorted(orbit(g), key=order_key):
        yield CoeffTensor(g.scenario, np.array(x))


def canonical_classes(batch: np.ndarray, scenario) -> list[tuple[tuple[int, ...], int]]:
    """Canonical forms and orbit sizes for every orbit meeting ``batch``.

    ``batch`` holds flat numerator rows. When it is closed under the group the
    orbits are found in one pass as connected components of the generator
    graph; rows whose images fall outside the batch are canonicalized one by one.
    Results are sorted by :func:`order_key` and the orbit memo is filled.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    scenario = as_scenario(scenario)
    settings = scenario.settings
    batch = np.unique(np.asarray(batch, dtype=np.int64).reshape(-1, scenario.n_coefficients),
                      axis=0)
    n = len(batch)
    if n == 0:
        return []
    index = {row.tobytes(): i for i, row in enumerate(batch)}
    src_i, dst_i = [], []
    open_rows = np.zeros(n, dtype=bool)
    for src, sgn in _generator_maps(settings):
        img = batch[:, src] * sgn
        j = np.array([index.get(row.tobytes(), -1) for row in img])
        ok = j >= 0
        open_rows |= ~ok
        src_i.append(np.nonzero(ok)[0])
        dst_i.append(j[ok])
    src_all = np.concatenate(src_i)
    dst_all = np.concatenate(dst_i)
    graph = coo_matrix((np.ones(len(src_all)), (src_all, dst_all)), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    codes = 2 * np.abs(batch) - (batch < 0)
    order = np.lexsort(codes.T[::-1])
    out = {}
    open_comp = set(labels[open_rows].tolist())
    first = {}
    for i in order:
        first.setdefault(labels[i], i)
    for comp, i in first.items():
        if comp in open_comp:
            canon, size = canonicalize(CoeffTensor(scenario, batch[i]))
            out[tuple(int(v) for v in canon.numerators.ravel())] = size
            continue
        members = np.nonzero(labels == comp)[0]
        canon = tuple(int(v) for v in batch[i])
        out[canon] = len(members)
        for m in members:
            _ORBIT_MEMO[(settings, tuple(int(v) for v in batch[m]))] = (canon, len(members))
    return sorted(out.items(), key=lambda kv: order_key(kv[0]))

"""Exact algebra of sign functions, coefficient tensors and deltas.

All arithmetic is on integer numerators over a fixed power-of-two
denominator. A coefficient tensor ``g`` for ``p`` parties stores
``h = g * 2**(p - 1)``; a sign table stores ``S * 2**denom_exp``.

Assignments of the setting-sign variables are indexed by a bitmask.
Party ``p`` owns ``m_p`` bits; bit ``s`` of the party's local index is set
when the sign of setting ``s`` is ``-1``. Local indices are combined in
mixed radix with the first party most significant, so a sign table has
the same memory layout as ``values.reshape([2**m for m in settings])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_SETTINGS = 4


@dataclass(frozen=True)
class Scenario:
    """Number of dichotomic settings per party (2 or 3 parties)."""

    settings: tuple[int, ...]

    def __post_init__(self):
        settings = tuple(int(m) for m in self.settings)
        object.__setattr__(self, "settings", settings)
        if len(settings) not in (2, 3):
            raise ValueError(f"need 2 or 3 parties, got {len(settings)}")
        for m in settings:
            if not 1 <= m <= MAX_SETTINGS:
                raise ValueError(f"settings per party must be in 1..{MAX_SETTINGS}, got {m}")

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def n_vars(self) -> int:
        return sum(self.settings)

    @property
    def n_assignments(self) -> int:
        return 1 << self.n_vars

    @property
    def n_coefficients(self) -> int:
        return int(np.prod(self.settings))

    @property
    def denom_exp(self) -> int:
        return self.parties - 1

    def __str__(self):
        return "x".join(map(str, self.settings))

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        return cls(tuple(int(t) for t in text.lower().split("x")))


def as_scenario(s) -> Scenario:
    if isinstance(s, Scenario):
        return s
    if isinstance(s, str):
        return Scenario.parse(s)
    return Scenario(tuple(s))


@lru_cache(maxsize=None)
def local_signs(m: int) -> np.ndarray:
    """``(2**m, m)`` array of +-1; row ``x`` holds the signs encoded by bitmask ``x``."""
    x = np.arange(1 << m)[:, None]
    bits = (x >> np.arange(m)[None, :]) & 1
    out = 1 - 2 * bits
    out.setflags(write=False)
    return out


def assignment_signs(scenario: Scenario, index: int) -> tuple[tuple[int, ...], ...]:
    """Decode a global assignment index into per-party sign tuples."""
    out = []
    for m in reversed(scenario.settings):
        local = index & ((1 << m) - 1)
        index >>= m
        out.append(tuple(int(v) for v in local_signs(m)[local]))
    return tuple(reversed(out))


def assignment_index(scenario: Scenario, signs: Sequence[Sequence[int]]) -> int:
    if len(signs) != scenario.parties:
        raise ValueError("assignment has wrong number of parties")
    index = 0
    for m, party in zip(scenario.settings, signs):
        if len(party) != m:
            raise ValueError(f"assignment {signs!r} does not match scenario {scenario}")
        local = 0
        for s, v in enumerate(party):
            if v not in (1, -1):
                raise ValueError(f"assignment entries must be +-1, got {v!r}")
            if v == -1:
                local |= 1 << s
        index = (index << m) | local
    return index


def _exact_shift(num: np.ndarray | int, from_exp: int, to_exp: int):
    """Re-express ``num / 2**from_exp`` over ``2**to_exp``; raise if inexact."""
    if to_exp >= from_exp:
        return num * (1 << (to_exp - from_exp))
    div = 1 << (from_exp - to_exp)
    if np.any(np.asarray(num) % div):
        raise ValueError("value is not representable over the requested denominator")
    return num // div


@dataclass(frozen=True, eq=False)
class CoeffTensor:
    """Inequality coefficients ``g`` as integer numerators over ``2**denom_exp``."""

    scenario: Scenario
    numerators: np.ndarray
    denom_exp: int = field(default=-1)

    def __post_init__(self):
        scenario = as_scenario(self.scenario)
        object.__setattr__(self, "scenario", scenario)
        if self.denom_exp == -1:
            object.__setattr__(self, "denom_exp", scenario.denom_exp)
        num = np.array(self.numerators, dtype=np.int64).reshape(scenario.settings)
        num.setflags(write=False)
        object.__setattr__(self, "numerators", num)
        if self.denom_exp != scenario.denom_exp:
            raise ValueError(
                f"denom_exp must be parties-1={scenario.denom_exp}, got {self.denom_exp}")

    @property
    def denominator(self) -> int:
        return 1 << self.denom_exp

    @classmethod
    def zeros(cls, scenario) -> "CoeffTensor":
        scenario = as_scenario(scenario)
        return cls(scenario, np.zeros(scenario.settings, dtype=np.int64))

    @classmethod
    def from_terms(cls, scenario, terms) -> "CoeffTensor":
        """Build from ``{(i, j, k): value}`` with values given as exact rationals."""
        scenario = as_scenario(scenario)
        num = np.zeros(scenario.settings, dtype=np.int64)
        den = 1 << scenario.denom_exp
        for idx, value in dict(terms).items():
            v = Fraction(value) * den
            if v.denominator != 1:
                raise ValueError(f"coefficient {value} at {idx} is off the lattice")
            num[tuple(idx)] += int(v)
        return cls(scenario, num)

    def coefficient(self, idx) -> Fraction:
        return Fraction(int(self.numerators[tuple(idx)]), self.denominator)

    def as_float(self) -> np.ndarray:
        return self.numerators / float(self.denominator)

    def key(self) -> tuple:
        return (self.scenario.settings, tuple(int(v) for v in self.numerators.ravel()))

    def __eq__(self, other):
        if not isinstance(other, CoeffTensor):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"CoeffTensor({self.scenario}, {self.numerators.ravel().tolist()}/{self.denominator})"

    def to_record(self) -> dict:
        return {
            "scenario": list(self.scenario.settings),
            "denom_exp": self.denom_exp,
            "numerators": [int(v) for v in self.numerators.ravel()],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CoeffTensor":
        for name in ("scenario", "denom_exp", "numerators"):
            if name not in record:
                raise ValueError(f"missing field {name!r}")
        raw = record["scenario"]
        scenario = Scenario.parse(raw) if isinstance(raw, str) else Scenario(tuple(raw))
        num = record["numerators"]
        if np.ndim(num) > 1:
            # nested lists are accepted when they have exactly the scenario's shape
            if np.shape(num) != scenario.settings:
                raise ValueError(f"field 'numerators' has shape {np.shape(num)}, scenario "
                                 f"{scenario} needs {scenario.settings}")
            num = np.asarray(num).ravel().tolist()
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in num):
            raise ValueError("field 'numerators' must hold integers")
        if len(num) != scenario.n_coefficients:
            raise ValueError(
                f"field 'numerators' has {len(num)} entries, scenario {scenario} needs "
                f"{scenario.n_coefficients}")
        return cls(scenario, np.array(num, dtype=np.int64), int(record["denom_exp"]))


@dataclass(frozen=True, eq=False)
class SignTable:
    """Exact values ``values / 2**denom_exp`` of a candidate sign function on every assignment."""

    scenario: Scenario
    values: np.ndarray
    denom_exp: int = 0

    def __post_init__(self):
        scenario = as_scenario(self.scenario)
        object.__setattr__(self, "scenario", scenario)
        vals = np.array(self.values, dtype=np.int64).ravel()
        if vals.size != scenario.n_assignments:
            raise ValueError(f"sign table needs {scenario.n_assignments} entries, got {vals.size}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, scenario, func: Callable, denom_exp: int = 0) -> "SignTable":
        """Tabulate ``func(*party_signs)``; the result times ``2**denom_exp`` must be integral."""
        scenario = as_scenario(scenario)
        scale = 1 << denom_exp
        vals = np.empty(scenario.n_assignments, dtype=np.int64)
        for index in range(scenario.n_assignments):
            v = Fraction(func(*assignment_signs(scenario, index))) * scale
            if v.denominator != 1:
                raise ValueError("function value is not representable over the denominator")
            vals[index] = int(v)
        return cls(scenario, vals, denom_exp)

    def value(self, index: int) -> Fraction:
        return Fraction(int(self.values[index]), 1 << self.denom_exp)

    def is_admissible(self) -> bool:
        return bool(np.all(np.abs(self.values) == (1 << self.denom_exp)))

    def sum_of_squares(self) -> Fraction:
        return Fraction(int(np.sum(self.values * self.values)), 1 << (2 * self.denom_exp))

    def __eq__(self, other):
        if not isinstance(other, SignTable):
            return NotImplemented
        if self.scenario != other.scenario:
            return False
        e = max(self.denom_exp, other.denom_exp)
        return np.array_equal(_exact_shift(self.values, self.denom_exp, e),
                              _exact_shift(other.values, other.denom_exp, e))

    __hash__ = None


def _check_assignment(g: CoeffTensor, a) -> tuple:
    if len(a) != g.scenario.parties:
        raise ValueError(f"assignment has {len(a)} parties, scenario {g.scenario} has "
                         f"{g.scenario.parties}")
    for m, party in zip(g.scenario.settings, a):
        if len(party) != m or any(v not in (1, -1) for v in party):
            raise ValueError(f"assignment {a!r} does not match scenario {g.scenario}")
    return tuple(np.array(p, dtype=np.int64) for p in a)


def eval_sign(g: CoeffTensor, a) -> Fraction:
    """``sum g_ijk a_i b_j c_k`` at one assignment (given as per-party sign tuples)."""
    vecs = _check_assignment(g, a)
    val = g.numerators
    for v in reversed(vecs):
        val = val @ v
    return Fraction(int(val), g.denominator)


def _table_numerators(num: np.ndarray, settings: Sequence[int]) -> np.ndarray:
    """Integer sign-table numerators for coefficient numerators (leading batch axes allowed)."""
    out = np.asarray(num, dtype=np.int64)
    nb = out.ndim - len(settings)
    # contract the last party first; each step appends that party's assignment axis
    for p in reversed(range(len(settings))):
        axis = nb + p
        out = np.tensordot(out, local_signs(settings[p]).T, axes=([axis], [0]))
        out = np.moveaxis(out, -1, axis)
    shape = out.shape[:nb] + (-1,)
    return out.reshape(shape)


def sign_table(g: CoeffTensor) -> SignTable:
    return SignTable(g.scenario, _table_numerators(g.numerators, g.scenario.settings), g.denom_exp)


def admissible_mask(batch: np.ndarray, scenario) -> np.ndarray:
    """Vectorized admissibility for a batch of numerator arrays, shape ``(n, *settings)``."""
    scenario = as_scenario(scenario)
    table = _table_numerators(batch, scenario.settings)
    return np.all(np.abs(table) == (1 << scenario.denom_exp), axis=-1)


def is_admissible(g: CoeffTensor) -> bool:
    """True iff the sign function built from ``g`` is +-1 on every assignment."""
    return bool(admissible_mask(g.numerators[None], g.scenario)[0])


def coefficients_from_sign(S: SignTable) -> CoeffTensor:
    """Invert a sign table into coefficients by projecting on the one-setting-per-party products."""
    if not S.is_admissible():
        raise ValueError("sign table is not admissible (some value is not +-1)")
    scenario = S.scenario
    vals = S.values.reshape([1 << m for m in scenario.settings])
    coef = vals
    for p, m in enumerate(scenario.settings):
        coef = np.tensordot(coef, local_signs(m), axes=([0], [0]))
    # every axis has been contracted and re-appended in party order
    total_exp = S.denom_exp + scenario.n_vars
    try:
        num = _exact_shift(coef, total_exp, scenario.denom_exp)
    except ValueError:
        raise ValueError("sign table is not a one-variable-per-party multilinear form") from None
    g = CoeffTensor(scenario, num)
    if not np.array_equal(sign_table(g).values, _exact_shift(S.values, S.denom_exp, g.denom_exp)):
        raise ValueError("sign table is not a one-variable-per-party multilinear form")
    return g


@dataclass(frozen=True, eq=False)
class DeltaPoly:
    """Iterated half-difference of a sign function.

    ``numerators`` are multilinear coefficients over the remaining parties'
    setting variables, over ``2**denom_exp``; for a full-order delta they
    form a 0-d array.
    """

    scenario: Scenario
    differenced: tuple[tuple[int, int], ...]
    numerators: np.ndarray
    denom_exp: int

    def __post_init__(self):
        scenario = as_scenario(self.scenario)
        object.__setattr__(self, "scenario", scenario)
        diff = tuple((int(p), int(s)) for p, s in self.differenced)
        object.__setattr__(self, "differenced", diff)
        parties = [p for p, _ in diff]
        if len(set(parties)) != len(parties):
            raise ValueError("at most one differenced variable per party")
        for p, s in diff:
            if not (0 <= p < scenario.parties and 0 <= s < scenario.settings[p]):
                raise ValueError(f"variable {(p, s)} not in scenario {scenario}")
        shape = tuple(scenario.settings[q] for q in self.remaining)
        num = np.array(self.numerators, dtype=np.int64).reshape(shape)
        num.setflags(write=False)
        object.__setattr__(self, "numerators", num)

    @property
    def order(self) -> int:
        return len(self.differenced)

    @property
    def remaining(self) -> tuple[int, ...]:
        done = {p for p, _ in self.differenced}
        return tuple(q for q in range(self.scenario.parties) if q not in done)

    @property
    def remaining_settings(self) -> tuple[int, ...]:
        return tuple(self.scenario.settings[q] for q in self.remaining)

    @classmethod
    def from_terms(cls, scenario, differenced, terms) -> "DeltaPoly":
        """Build from ``{(j, k): value}`` indexed over the remaining parties."""
        scenario = as_scenario(scenario)
        num = _zeros_for(scenario, differenced)
        den = 1 << scenario.denom_exp
        for idx, value in dict(terms).items():
            v = Fraction(value) * den
            if v.denominator != 1:
                raise ValueError(f"coefficient {value} is off the lattice")
            num[tuple(idx)] += int(v)
        return cls(scenario, differenced, num, scenario.denom_exp)

    def values(self) -> np.ndarray:
        """Value numerators at every assignment of the remaining parties' variables."""
        if self.numerators.ndim == 0:
            return self.numerators.reshape(1)
        return _table_numerators(self.numerators, self.remaining_settings)

    def value_set(self) -> set[Fraction]:
        den = 1 << self.denom_exp
        return {Fraction(int(v), den) for v in np.unique(self.values())}

    def norm_sq(self) -> Fraction:
        return Fraction(int(np.sum(self.numerators ** 2)), 1 << (2 * self.denom_exp))

    def support_mask(self) -> int:
        mask = 0
        for i, v in enumerate(self.values()):
            if v:
                mask |= 1 << i
        return mask

    def key(self):
        return (self.scenario.settings, self.differenced,
                tuple(int(v) for v in self.numerators.ravel()), self.denom_exp)

    def __eq__(self, other):
        if not isinstance(other, DeltaPoly):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _zeros_for(scenario: Scenario, differenced) -> np.ndarray:
    done = {p for p, _ in differenced}
    return np.zeros([m for q, m in enumerate(scenario.settings) if q not in done], dtype=np.int64)


def _bit_axis(scenario: Scenario, party: int, setting: int) -> int:
    offset = sum(scenario.settings[:party])
    return offset + scenario.settings[party] - 1 - setting


def delta(S: SignTable, variables: Sequence[tuple[int, int]]) -> DeltaPoly:
    """Half-difference ``S`` successively in each ``(party, setting)`` variable."""
    scenario = S.scenario
    variables = tuple((int(p), int(s)) for p, s in variables)
    if not 1 <= len(variables) <= scenario.parties:
        raise ValueError("need between one and `parties` variables")
    parties = [p for p, _ in variables]
    if len(set(parties)) != len(parties):
        raise ValueError("sign functions may not depend on products of one party's variables; "
                         "use at most one variable per party")
    for p, s in variables:
        if not (0 <= p < scenario.parties and 0 <= s < scenario.settings[p]):
            raise ValueError(f"variable {(p, s)} not in scenario {scenario}")

    table = S.values.reshape((2,) * scenario.n_vars)
    axes = list(range(scenario.n_vars))
    for p, s in variables:
        ax = axes.index(_bit_axis(scenario, p, s))
        table = np.take(table, 0, axis=ax) - np.take(table, 1, axis=ax)
        axes.pop(ax)
    den_exp = S.denom_exp + len(variables)

    # leftover variables of differenced parties must not matter; drop their axes
    for q in parties:
        for s in range(scenario.settings[q]):
            b = _bit_axis(scenario, q, s)
            if b not in axes:
                continue
            ax = axes.index(b)
            if not np.array_equal(np.take(table, 0, axis=ax), np.take(table, 1, axis=ax)):
                raise ValueError("sign table is not a one-variable-per-party multilinear form")
            table = np.take(table, 0, axis=ax)
            axes.pop(ax)

    remaining = [q for q in range(scenario.parties) if q not in parties]
    rem_settings = [scenario.settings[q] for q in remaining]
    n_rem = sum(rem_settings)
    if n_rem:
        vals = table.reshape([1 << m for m in rem_settings])
        coef = vals
        for m in rem_settings:
            coef = np.tensordot(coef, local_signs(m), axes=([0], [0]))
    else:
        coef = np.asarray(table)
    total_exp = den_exp + n_rem
    try:
        num = _exact_shift(np.asarray(coef), total_exp, scenario.denom_exp)
    except ValueError:
        raise ValueError("sign table is not a one-variable-per-party multilinear form") from None
    d = DeltaPoly(scenario, variables, num, scenario.denom_exp)
    if n_rem:
        expect = _exact_shift(table.reshape(-1), den_exp, scenario.denom_exp)
        if not np.array_equal(d.values(), expect):
            raise ValueError("sign table is not a one-variable-per-party multilinear form")
    return d


def row_deltas(g: CoeffTensor, party: int = 0) -> list[DeltaPoly]:
    """Order-1 deltas ``Delta_{x_i}`` for every setting ``i`` of one party, read off ``g``."""
    return [DeltaPoly(g.scenario, ((party, i),), np.take(g.numerators, i, axis=party), g.denom_exp)
            for i in range(g.scenario.settings[party])]


def reconstruct_sign(deltas: Sequence[DeltaPoly]) -> SignTable:
    """``S = sum_i x_i Delta_{x_i}`` from one order-1 delta per setting of a single party."""
    if not deltas:
        raise ValueError("need at least one delta")
    first = deltas[0]
    scenario = first.scenario
    for d in deltas:
        if d.order != 1:
            raise ValueError("reconstruct_sign takes order-1 deltas")
        if d.scenario != scenario or d.denom_exp != first.denom_exp:
            raise ValueError("deltas have mismatched remaining scenarios")
    party = first.differenced[0][0]
    if any(d.differenced[0][0] != party for d in deltas):
        raise ValueError("all deltas must difference the same party")
    settings = sorted(d.differenced[0][1] for d in deltas)
    if settings != list(range(scenario.settings[party])):
        raise ValueError(f"need exactly one delta per setting of party {party}")
    by_setting = {d.differenced[0][1]: d for d in deltas}
    num = np.stack([by_setting[i].numerators for i in range(len(settings))], axis=party)
    return sign_table(CoeffTensor(scenario, num))


def norm_conditions(g: CoeffTensor) -> tuple[Fraction, Fraction, bool]:
    den = g.denominator
    sum_abs = Fraction(abs(int(g.numerators.sum())), den)
    sum_sq = Fraction(int((g.numerators ** 2).sum()), den * den)
    return sum_abs, sum_sq, sum_abs == 1 and sum_sq == 1


def pointwise_mask(batch: np.ndarray, scenario, party: int = 0) -> np.ndarray:
    """Vectorized delta-structure check; see :func:`pointwise_delta_structure`."""
    scenario = as_scenario(scenario)
    batch = np.asarray(batch, dtype=np.int64)
    rows = np.moveaxis(batch, 1 + party, 1)  # (n, m_party, *rest)
    rest = [m for q, m in enumerate(scenario.settings) if q != party]
    vals = _table_numerators(rows, rest)  # (n, m_party, assignments of the rest)
    one = 1 << scenario.denom_exp
    nonzero = vals != 0
    exactly_one = nonzero.sum(axis=1) == 1
    unit = np.all((vals == 0) | (np.abs(vals) == one), axis=1)
    return np.all(exactly_one & unit, axis=-1)


def pointwise_delta_structure(g: CoeffTensor, party: int = 0) -> bool:
    """At every assignment of the other parties exactly one order-1 delta is +-1, the rest 0."""
    return bool(pointwise_mask(g.numerators[None], g.scenario, party)[0])


def all_assignments(scenario) -> list[tuple[tuple[int, ...], ...]]:
    """Every assignment as per-party sign tuples, in bitmask order."""
    scenario = as_scenario(scenario)
    return [assignment_signs(scenario, i) for i in range(scenario.n_assignments)]

"""Published sign functions and inequalities used as regression fixtures.

Each sign function is transcribed as printed, as a function returning
``S * 2**scale``. Inequalities are given as term strings such as
``"-3*000 +001"`` (coefficient numerators over ``2**scale`` followed by the
setting indices of each party).

A handful of printed formulas contain sign or index slips. Where that
happens the printed text is kept in ``printed_*`` and the admissible form
used everywhere else is in ``sign`` / ``inequality``; ``erratum`` says what
differs and how the correction was pinned down.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from fractions import Fraction
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import CoeffTensor, Scenario, SignTable

_TERM = re.compile(r"^([+-]?)(?:(\d+)\*)?(\d+)$")


def parse_terms(text: str, scenario) -> CoeffTensor:
    """Parse ``"+011 -2*120"`` into a :class:`CoeffTensor` (numerators over ``2**(parties-1)``)."""
    scenario = scenario if isinstance(scenario, Scenario) else Scenario(tuple(scenario))
    num = np.zeros(scenario.settings, dtype=np.int64)
    for token in text.split():
        m = _TERM.match(token)
        if not m or len(m.group(3)) != scenario.parties:
            raise ValueError(f"bad term {token!r}")
        sign = -1 if m.group(1) == "-" else 1
        k = int(m.group(2) or 1)
        num[tuple(int(ch) for ch in m.group(3))] += sign * k
    return CoeffTensor(scenario, num)


def _rescale(g: CoeffTensor, scale: int) -> CoeffTensor:
    shift = g.denom_exp - scale
    return CoeffTensor(g.scenario, g.numerators * (1 << shift))


@dataclass(frozen=True)
class Fixture:
    name: str
    settings: tuple[int, ...]
    scale: int
    inequality_terms: str
    sign: Optional[Callable] = None
    printed_sign: Optional[Callable] = None
    printed_inequality_terms: Optional[str] = None
    erratum: str = ""

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.settings)

    @property
    def inequality(self) -> CoeffTensor:
        return _rescale(parse_terms(self.inequality_terms, self.scenario), self.scale)

    @property
    def printed_inequality(self) -> CoeffTensor:
        return _rescale(parse_terms(self.printed_inequality_terms or self.inequality_terms,
                                    self.scenario), self.scale)

    def sign_table(self, printed: bool = False) -> SignTable:
        func = self.printed_sign if printed and self.printed_sign else self.sign
        if func is None:
            raise ValueError(f"fixture {self.name!r} has no sign function")
        den = 1 << self.scale
        return SignTable.from_function(self.scenario, lambda *x: Fraction(func(*x), den),
                                       self.scale)


S333 = (3, 3, 3)

FIXTURES: dict[str, Fixture] = {}


def _add(f: Fixture) -> None:
    FIXTURES[f.name] = f


# -- two settings per party, three parties ---------------------------------

_add(Fixture(
    "two_setting_quarter", S333, 2,
    "-3*000 +001 +010 +011 +100 +101 +110 +111",
    sign=lambda a, b, c: (a[0] * (b[0] * (-3 * c[0] + c[1]) + b[1] * (c[0] + c[1]))
                          + a[1] * (b[0] + b[1]) * (c[0] + c[1])),
))

_add(Fixture(
    "chsh_ac", S333, 1,
    "+000 +001 +100 -101",
    sign=lambda a, b, c: a[0] * b[0] * (c[0] + c[1]) + a[1] * b[0] * (c[0] - c[1]),
))

_add(Fixture(
    "chsh_ab", S333, 1,
    "+000 +010 +100 -110",
    sign=lambda a, b, c: a[0] * (b[0] + b[1]) * c[0] + a[1] * (b[0] - b[1]) * c[0],
))

_add(Fixture(
    "chsh_cross", S333, 1,
    "+000 +001 +110 -111",
    sign=lambda a, b, c: a[0] * b[0] * (c[0] + c[1]) + a[1] * b[1] * (c[0] - c[1]),
))

_add(Fixture(
    "mabk", S333, 1,
    "+000 +011 +101 -110",
    sign=lambda a, b, c: a[0] * (b[0] * c[0] + b[1] * c[1]) + a[1] * (b[0] * c[1] - b[1] * c[0]),
    printed_sign=lambda a, b, c: (a[0] * (b[0] * c[0] + b[1] * c[1])
                                  + a[1] * (b[1] * c[0] - b[0] * c[1])),
    erratum="printed sign function has a_1(b_1c_0 - b_0c_1), the negative of the a_1 row of the "
            "printed inequality; the two differ by flipping a_1 and the inequality is kept",
))

# -- three settings per party ---------------------------------------------

_add(Fixture(
    "three_setting", S333, 2,
    "+011 -012 +021 -022 +101 +102 +110 +111 -120 +122 -201 -202 +210 +212 -220 +221",
    sign=lambda a, b, c: (a[0] * (b[1] * (c[1] - c[2]) + b[2] * (c[1] - c[2]))
                          + a[1] * (b[0] * (c[1] + c[2]) + b[1] * (c[0] + c[1])
                                    + b[2] * (-c[0] + c[2]))
                          + a[2] * (b[0] * (-c[1] - c[2]) + b[1] * (c[0] + c[2])
                                    + b[2] * (-c[0] + c[1]))),
    printed_inequality_terms=(
        "+011 -012 +021 -022 +101 +102 +110 +111 -120 +122 -201 -202 +210 +211 -220 +221"),
    erratum="printed inequality has E_211 where the printed sign function (and the "
            "correlation-tensor form) give E_212; the printed version is not admissible",
))

_add(Fixture(
    "three_setting_a0a2", S333, 2,
    "-001 -002 +010 +011 -020 +2*021 -022 +101 +102 +110 +111 -120 +122",
    sign=lambda a, b, c: (-a[0] * (b[0] * (c[1] + c[2]) - b[1] * (c[0] + c[1])
                                   + b[2] * (c[0] - 2 * c[1] + c[2]))
                          + a[1] * (b[0] * (c[1] + c[2]) + b[1] * (c[0] + c[1])
                                    + b[2] * (-c[0] + c[2]))),
    printed_inequality_terms=(
        "-001 -002 +010 +011 -020 +2*021 +022 +101 +102 +110 +111 -120 +222"),
    erratum="printed inequality has +E_022 and E_222 where the printed sign function gives "
            "-E_022 and E_122; the printed version fails the norm condition (|sum g| = 3/2)",
))

_add(Fixture(
    "three_setting_a1a2", S333, 2,
    "+011 -012 +021 -022 +2*110 +111 +112 -2*120 +121 +122",
    sign=lambda a, b, c: (a[0] * (b[1] * (c[1] - c[2]) + b[2] * (c[1] - c[2]))
                          + a[1] * (b[1] * (2 * c[0] + c[1] + c[2])
                                    + b[2] * (-2 * c[0] + c[1] + c[2]))),
    printed_sign=lambda a, b, c: (a[0] * (b[1] * (c[1] - c[2]) + b[2] * (c[1] - c[2]))
                                  + a[1] * (b[1] * (2 * c[0] + c[1] + c[2])
                                            + b[2] * (2 * c[0] - c[1] - c[2]))),
    printed_inequality_terms="+011 -012 +021 -022 +2*110 +111 +112 +2*120 -121 -122",
    erratum="printed sign function and inequality both have a_1 b_2 (2c_0 - c_1 - c_2); "
            "merging a_2 into a_1 in the three-setting sign function gives "
            "a_1 b_2 (-2c_0 + c_1 + c_2), and only that version is admissible",
))

_add(Fixture(
    "double_xii", S333, 2,
    "+2*000 +011 +012 +021 -022 +2*100 -111 -112 -121 +122",
    sign=lambda a, b, c: (a[0] * (2 * b[0] * c[0] + b[1] * (c[1] + c[2]) + b[2] * (c[1] - c[2]))
                          + a[1] * (2 * b[0] * c[0] - b[1] * (c[1] + c[2])
                                    - b[2] * (c[1] - c[2]))),
))

_add(Fixture(
    "two_four_four", (2, 4, 4), 2,
    "+000 +001 +010 -011 +022 +023 +032 -033 +100 +101 +110 -111 -122 -123 -132 +133",
))

# -- trivial and two-party ------------------------------------------------

_add(Fixture(
    "trivial3", S333, 0, "+000",
    sign=lambda a, b, c: a[0] * b[0] * c[0],
))

_add(Fixture(
    "chsh", (3, 3), 1, "+00 +01 +10 -11",
    sign=lambda a, b: a[0] * (b[0] + b[1]) + a[1] * (b[0] - b[1]),
))

_add(Fixture(
    "trivial2", (3, 3), 0, "+00",
    sign=lambda a, b: a[0] * b[0],
))

# sign-function fixtures with two settings per party
TWO_SETTING_NAMES = ("two_setting_quarter", "chsh_ac", "chsh_ab", "chsh_cross", "mabk")
# the nine three-party sign-function fixtures
SIGN_FIXTURE_NAMES = TWO_SETTING_NAMES + (
    "three_setting", "three_setting_a0a2", "three_setting_a1a2", "double_xii")


def fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


def tensor(name: str) -> CoeffTensor:
    return fixture(name).inequality


def fixture_record(name: str) -> dict:
    f = fixture(name)
    rec = f.inequality.to_record()
    rec["name"] = name
    if f.erratum:
        rec["erratum"] = f.erratum
        rec["printed_numerators"] = f.printed_inequality.numerators.ravel().tolist()
    return rec


def write_fixture_files(directory) -> None:
    """Write every fixture as ``<name>.json`` (CoeffTensor record plus notes)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in sorted(FIXTURES):
        (directory / f"{name}.json").write_text(json.dumps(fixture_record(name), indent=2) + "\n")

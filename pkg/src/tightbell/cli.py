"""Command-line front end.

Exit codes: 0 success or check passed, 1 check failed, 2 usage or parse error.
Reports and catalogs are JSON with floats rounded to 12 significant digits.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import fixtures
from .core import CoeffTensor, is_admissible, norm_conditions, pointwise_delta_structure
from .enumerate import delta_profile, enumerate_three_party, enumerate_two_party, catalog
from .polytope import tightness
from . import quantum as Q

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad input file or argument (exit code 2)."""


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    if isinstance(x, np.generic):
        return _round(x.item())
    return x


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def fixture_dir():
    return resources.files("tightbell") / "data"


def load_tensor(arg: str) -> CoeffTensor:
    """A shipped fixture name, or a JSON file holding a CoeffTensor record."""
    shipped = fixture_dir() / f"{arg}.json"
    if shipped.is_file():
        return CoeffTensor.from_record(json.loads(shipped.read_text()))
    path = Path(arg)
    if not path.exists():
        raise InputError(f"{arg}: neither a fixture name nor an existing file "
                         f"(fixtures: {', '.join(sorted(fixtures.FIXTURES))})")
    try:
        rec = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{arg}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    try:
        return CoeffTensor.from_record(rec)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{arg}: {e}") from None


BUILTIN_STATES = {
    "ghz": Q.ghz,
    "mixed": Q.ThreeQubitState.maximally_mixed,
    "000": lambda: Q.basis_state("000"),
}


def load_state(arg: str) -> Q.ThreeQubitState:
    """``ghz``, ``mixed``, ``000``, or a file of ``re im`` lines."""
    if arg in BUILTIN_STATES:
        return BUILTIN_STATES[arg]()
    path = Path(arg)
    if not path.exists():
        raise InputError(f"{arg}: neither a built-in state ({', '.join(BUILTIN_STATES)}) "
                         f"nor an existing file")
    try:
        return Q.parse_state(path.read_text())
    except ValueError as e:
        raise InputError(f"{arg}: {e}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    g = load_tensor(args.tensor)
    sum_abs, sum_sq, norms_ok = norm_conditions(g)
    admissible = is_admissible(g)
    report = {
        "scenario": str(g.scenario),
        "admissible": admissible,
        "norm_conditions": {"sum_abs": str(sum_abs), "sum_sq": str(sum_sq), "pass": norms_ok},
        "pointwise_delta_structure": pointwise_delta_structure(g),
    }
    if g.scenario.settings in ((3, 3, 3), (3, 3)):
        report["delta_profile"] = [d or "none" for d in delta_profile(g)]
    if args.tight:
        report["tight"] = tightness(g).to_record()
    _emit(dumps(report), args.out)
    return EXIT_OK if admissible else EXIT_FAIL


def cmd_tighten(args) -> int:
    g = load_tensor(args.tensor)
    cert = tightness(g)
    _emit(dumps({"scenario": str(g.scenario), "tight": cert.to_record()}), args.out)
    return EXIT_OK if cert.is_facet else EXIT_FAIL


def _ghz_values(records, restarts: int, seed: int) -> None:
    T = Q.correlation_tensor(Q.ghz())
    for rec in records:
        rec.quantum["ghz_seesaw"] = Q.seesaw_maximize(rec.canonical, T, restarts, seed).value


def cmd_enumerate(args) -> int:
    scenario = args.scenario.replace("×", "x")
    if scenario == "3x3":
        records = enumerate_two_party()
        header = {"scenario": "3x3", "complete": True}
    elif scenario == "3x3x3":
        named = {n: fixtures.tensor(n) for n in fixtures.FIXTURES}
        result = enumerate_three_party(args.budget_nodes, args.budget_secs, fixtures=named)
        records = result.records
        header = {
            "scenario": "3x3x3",
            "complete": result.complete,
            "strategies_agree": result.strategies_agree,
            "strategies": {name: {"complete": st.complete, "nodes": st.nodes,
                                  "tensors": int(len(st.tensors)),
                                  "classes": len(result.classes[name])}
                           for name, st in sorted(result.stats.items())},
        }
        if args.ghz:
            _ghz_values(records, args.restarts, args.seed)
    else:
        raise InputError(f"unsupported scenario {args.scenario!r} (use 3x3 or 3x3x3)")
    header["class_count"] = len(records)
    header["records"] = catalog(records)
    _emit(dumps(header), args.out)
    return EXIT_OK


def cmd_violate(args) -> int:
    g = load_tensor(args.tensor)
    if g.scenario.parties != 3 or any(m > 3 for m in g.scenario.settings):
        raise InputError("violate needs a three-party tensor with at most three settings each")
    state = load_state(args.state)
    T = Q.correlation_tensor(state)
    res = Q.seesaw_maximize(g, T, args.restarts, args.seed)
    report = {
        "scenario": str(g.scenario),
        "seesaw_value": res.value,
        "restart": res.restart,
        "settings": res.settings.to_record(),
        "classical_bound": 1.0,
        "violation": res.value > 1 + 1e-9,
    }
    planar = max(np.abs(T[2]).max(), np.abs(T[:, 2]).max(), np.abs(T[:, :, 2]).max()) < 1e-12
    if planar and _phase_covariant(T):
        grid, _ = Q.planar_grid_search(g, T, args.grid_degrees or 10.0)
        report["grid_value"] = grid
        report["grid_delta"] = abs(grid - res.value)
    else:
        # the planar grid is only a valid cross-check for in-plane, phase-covariant tensors
        report["grid_value"] = None
    _emit(dumps(report), args.out)
    return EXIT_OK


def _phase_covariant(T: np.ndarray) -> bool:
    """True if T is invariant under z-rotations of A and B by opposite angles."""
    for theta in (0.37, 1.1):
        c, s = np.cos(theta), np.sin(theta)
        r = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        if np.abs(Q.rotate_tensor(T, r, r.T, np.eye(3)) - T).max() > 1e-10:
            return False
    return True


def cmd_conditions(args) -> int:
    state = load_state(args.state)
    T = Q.correlation_tensor(state)
    bad = Q.condition_three_setting_max(T, args.restarts, args.seed)
    ine = Q.condition_two_three_max(T, args.restarts, args.seed)
    report = {
        "condition_three_setting_max": bad,
        "condition_three_setting_grid": Q.condition_three_setting_grid(
            T, args.grid_degrees or 15.0, seed=args.seed),
        "condition_two_three_max": ine,
        "satisfies_three_setting": bad <= 1 + 1e-9,
        "satisfies_two_three": ine <= 1 + 1e-9,
    }
    _emit(dumps(report), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tightbell",
                                     description="Tight correlation Bell inequalities")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--restarts", type=int, default=None,
                           help="random restarts (default 32 for see-saw, 8 for frame searches)")
            p.add_argument("--grid-degrees", type=float, default=None,
                           help="grid step for cross-checks (default 10 for violate, 15 for conditions)")

    p = sub.add_parser("verify", help="admissibility, norms and delta profile")
    p.add_argument("tensor", help="fixture name or JSON tensor file")
    p.add_argument("--tight", action="store_true", help="include a tightness certificate")
    common(p, seed=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tighten", help="facet certificate")
    p.add_argument("tensor")
    common(p, seed=False)
    p.set_defaults(func=cmd_tighten)

    p = sub.add_parser("enumerate", help="catalog of inequality classes")
    p.add_argument("--scenario", default="3x3x3")
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-secs", type=float, default=None)
    p.add_argument("--ghz", action="store_true", help="record see-saw values on GHZ")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("violate", help="see-saw maximization of the quantum value")
    p.add_argument("tensor")
    p.add_argument("state", help="ghz, mixed, 000 or a file of 're im' lines")
    common(p)
    p.set_defaults(func=cmd_violate)

    p = sub.add_parser("conditions", help="state conditions for the three-setting inequalities")
    p.add_argument("state")
    common(p)
    p.set_defaults(func=cmd_conditions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "restarts"):
        if args.restarts is None:
            args.restarts = 8 if args.command == "conditions" else Q.DEFAULT_RESTARTS
        if args.restarts < 1:
            parser.error("--restarts must be at least 1")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

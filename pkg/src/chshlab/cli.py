"""Command-line front end.

Exit codes: 0 success (or feasible), 2 usage error, 3 infeasible
(``certify`` only), 4 output could not be written.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

from . import _fmt
from .analysis import discrepancy, marginal_match_feasibility
from .classical import PLUS, SETTINGS, max_chsh_deterministic
from .montecarlo import Model, chsh_from_counts, simulate_settings
from .quantum import (
    DirectionConfig,
    chsh_quantum,
    correlation_quantum,
    optimize_chsh,
    quantum_correlators,
    quantum_pair_marginals,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

SWEEP_PARAMS = ("a", "a'", "b", "b'", "theta_ab")


class UsageError(Exception):
    pass


def _add_angles(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--deg", nargs=4, type=float, metavar=("A", "A'", "B", "B'"), help="angles in degrees")
    g.add_argument("--rad", nargs=4, type=float, metavar=("A", "A'", "B", "B'"), help="angles in radians")


def _add_output(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)


def _config(args) -> DirectionConfig:
    try:
        if args.deg is not None:
            return DirectionConfig.from_degrees(*args.deg)
        return DirectionConfig(*args.rad)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _unit_scale(args) -> float:
    return math.pi / 180.0 if args.deg is not None else 1.0


def _config_report(c: DirectionConfig) -> dict:
    return {"radians": c.to_dict(), "degrees": dict(zip(("a", "a_prime", "b", "b_prime"), c.degrees()))}


def _flat_rows(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k in sorted(d):
        v = d[k]
        name = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flat_rows(v, name + "."))
        elif isinstance(v, list):
            for i, item in enumerate(v):
                if isinstance(item, dict):
                    rows.extend(_flat_rows(item, f"{name}.{i}."))
                else:
                    rows.append((f"{name}.{i}", item))
        else:
            rows.append((name, "" if v is None else v))
    return rows


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return _fmt.dumps(report)
    return _fmt.to_csv(["key", "value"], _flat_rows(report))


def cmd_chsh(args) -> tuple[dict, int]:
    if args.classical_max:
        value, maximizers = max_chsh_deterministic()
        return {"model": "classical-max", "value": value, "maximizers": [q.key for q in maximizers]}, EXIT_OK
    if args.deg is None and args.rad is None:
        raise UsageError("--quantum needs --deg or --rad angles")
    c = _config(args)
    return {
        "model": "quantum",
        "config": _config_report(c),
        "correlators": quantum_correlators(c).to_dict(),
        "value": chsh_quantum(c),
    }, EXIT_OK


def cmd_certify(args) -> tuple[dict, int]:
    c = _config(args)
    result = marginal_match_feasibility(quantum_pair_marginals(c))
    report = {"config": _config_report(c), "chsh_quantum": chsh_quantum(c)}
    report.update(result.to_dict())
    return report, EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_simulate(args) -> tuple[dict, int]:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    c = _config(args)
    model = Model(args.model)
    runs = simulate_settings(c, model, args.trials, args.seed, args.workers)
    est, parts = chsh_from_counts(runs)
    report = {
        "model": model.value,
        "seed": args.seed,
        "trials_per_setting": args.trials,
        "config": _config_report(c),
        "settings": [
            {"setting": s.label, "counts": t.to_dict()["counts"], "correlator": p.to_dict()}
            for s, t, p in zip(SETTINGS, runs, parts)
        ],
        "chsh": est.to_dict(),
    }
    return report, EXIT_OK


def _simulate_csv(report: dict) -> str:
    rows = []
    for entry in report["settings"]:
        for outcome, count in entry["counts"].items():
            rows.append(("count", entry["setting"], outcome, count, ""))
        corr = entry["correlator"]
        rows.append(("correlator", entry["setting"], "", corr["value"], corr["stderr"]))
    rows.append(("chsh", "", "", report["chsh"]["value"], report["chsh"]["stderr"]))
    return _fmt.to_csv(["record", "setting", "outcome", "value", "stderr"], rows)


def sweep_rows(c: DirectionConfig, param: str, start: float, stop: float, steps: int, lock_primes: bool):
    """One row per grid point: angle, quantum P(+,+), cascade P(+,+), delta, correlator (all for AB)."""
    rows = []
    for i in range(steps):
        x = start + (stop - start) * i / (steps - 1)
        a, ap, b, bp = c.as_tuple()
        if param == "a":
            a = x
        elif param == "a'":
            ap = x
        elif param == "b":
            b = x
        elif param == "b'":
            bp = x
        else:  # theta_ab = a - b with a held fixed
            b = a - x
        if lock_primes:
            ap, bp = a, b
        point = DirectionConfig(a, ap, b, bp)
        rep = discrepancy(point, PLUS, PLUS)
        rows.append((x, rep.quantum_p, rep.cascade_p, rep.delta, correlation_quantum(point.theta_ab)))
    return rows


def cmd_sweep(args) -> tuple[object, int]:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    start, stop = args.range
    if not (math.isfinite(start) and math.isfinite(stop)) or stop <= start:
        raise UsageError("--range needs finite START < STOP")
    scale = _unit_scale(args)
    rows = sweep_rows(_config(args), args.param, start * scale, stop * scale, args.steps, args.lock_primes)
    return rows, EXIT_OK


SWEEP_HEADER = ["angle", "quantum_p_pp", "cascade_p_pp", "delta", "correlator"]


def cmd_optimize(args) -> tuple[dict, int]:
    if args.grid_steps < 8:
        raise UsageError("--grid-steps must be at least 8")
    if args.refine_iters < 0:
        raise UsageError("--refine-iters must be non-negative")
    c, value = optimize_chsh(args.grid_steps, args.refine_iters)
    return {
        "grid_steps": args.grid_steps,
        "refine_iters": args.refine_iters,
        "config": _config_report(c),
        "value": value,
    }, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chshlab", description="CHSH experiments: classical joint model vs amplitudes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh", help="evaluate the CHSH combination")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--quantum", action="store_true")
    which.add_argument("--classical-max", action="store_true")
    _add_angles(p, required=False)
    _add_output(p)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("certify", help="test whether a joint distribution reproduces the quantum pair marginals")
    _add_angles(p)
    _add_output(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the CHSH value")
    _add_angles(p)
    p.add_argument("--model", choices=[m.value for m in Model], default="quantum")
    p.add_argument("--trials", type=int, default=100_000, help="trials per setting")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate P(+,+) and the correlator along one angle")
    _add_angles(p)
    p.add_argument("--param", choices=SWEEP_PARAMS, default="theta_ab")
    p.add_argument("--range", nargs=2, type=float, metavar=("START", "STOP"), required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--lock-primes", action="store_true", help="set a' = a and b' = b at every point")
    _add_output(p, default_format="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="numerically maximize the quantum CHSH value")
    p.add_argument("--grid-steps", type=int, default=64)
    p.add_argument("--refine-iters", type=int, default=40)
    _add_output(p)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on malformed arguments
    try:
        payload, code = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))

    if args.command == "sweep":
        if args.format == "csv":
            text = _fmt.to_csv(SWEEP_HEADER, payload)
        else:
            text = _fmt.dumps([dict(zip(SWEEP_HEADER, row)) for row in payload])
    elif args.command == "simulate" and args.format == "csv":
        text = _simulate_csv(payload)
    else:
        text = _render(payload, args.format)

    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"chshlab: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

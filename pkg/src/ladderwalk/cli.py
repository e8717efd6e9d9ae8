"""Command-line entry point: one subcommand per library capability.

Machine-readable output (CSV or JSON) goes to stdout, diagnostics to stderr.
Every seeded command is byte-identical across repeated runs and across
worker counts.  Exit codes: 0 success, 1 computation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .branching import expected_t1, immigration_law, level_mean_matrix
from .decomposer import decompose, verify_identity
from .environment import EnvLaw, Environment, local_drift
from .errors import InvalidLaw, LadderWalkError
from .hitting import exit_probabilities, hit_from_below, homogeneous_root
from .oracle import solve_exit_table, solve_expected_exit_times
from .rwre import velocity
from .simulator import run_ensemble, run_horizon, run_to_ladder

log = logging.getLogger("ladderwalk")

#: the five built-in homogeneous regression rows (q2, q1, p1, p2) with the
#: reference E[X_T1] values they must reproduce and the per-row tolerance
WALD_ROWS = (
    ((0.08, 0.36, 0.21, 0.35), 1.467727692, 1e-6),
    ((0.19, 0.30, 0.30, 0.21), 1.323718710, 1e-6),
    ((0.3199, 0.1801, 0.1789, 0.3211), 1.481684406, 1e-6),
    ((0.0001, 0.4999, 0.4998, 0.0002), 1.000399840, 1e-6),
    ((0.1372, 0.3628, 0.3627, 0.1373), 1.226490265, 1e-4),
)


def _fmt(x) -> str:
    """12-significant-digit decimal rendering ('.' decimal point)."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _csv(header: list, rows: list) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(c) for c in row) for row in rows]
    return "\n".join(lines)


def _load_env(path: str) -> Environment:
    try:
        with open(path) as fh:
            return Environment.from_json(fh.read())
    except (OSError, json.JSONDecodeError, KeyError, IndexError,
            TypeError) as exc:
        raise UsageError(f"cannot read environment file {path!r}: {exc}")


def _load_env_law(path: str) -> EnvLaw:
    try:
        with open(path) as fh:
            return EnvLaw.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read environment-law file {path!r}: {exc}")


class UsageError(Exception):
    pass


def _workers(args) -> int:
    raw = os.environ.get("LADDERWALK_WORKERS")
    if raw is not None:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"LADDERWALK_WORKERS={raw!r} is not an integer")
    return max(1, args.workers)


# -- subcommand handlers (each returns the primary-stream text) -------------


def cmd_exit(args) -> str:
    env = _load_env(args.env)
    table = exit_probabilities(env, args.a, args.b)
    rows = []
    starts = [args.start] if args.start is not None else list(table.starts())
    for k in starts:
        for target in (table.b, table.b + 1):
            rows.append((k, target, table.prob(k, target), table.width, 1))
    header = ["start", "target", "probability", "depth", "converged"]
    if args.format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_hit(args) -> str:
    env = _load_env(args.env)
    prof = hit_from_below(env, args.k, args.i, args.tol)
    rows = [(prof.start, prof.threshold + 1, prof.f1, prof.depth,
             int(prof.converged)),
            (prof.start, prof.threshold + 2, prof.f2, prof.depth,
             int(prof.converged))]
    header = ["start", "target", "probability", "depth", "converged"]
    if args.format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_oracle_exit(args) -> str:
    env = _load_env(args.env)
    table = solve_exit_table(env, args.a, args.b)
    starts = table.pop("starts")
    rows = []
    for j, k in enumerate(starts):
        if args.start is not None and k != args.start:
            continue
        for target in sorted(table):
            rows.append((int(k), target, table[target][j]))
    header = ["start", "target", "probability"]
    if args.format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_oracle_time(args) -> str:
    env = _load_env(args.env)
    times = solve_expected_exit_times(env, args.a, args.b)
    rows = [(args.a + 1 + j, t) for j, t in enumerate(times)]
    header = ["start", "expected_time"]
    if args.format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def cmd_t1(args) -> str:
    env = _load_env(args.env)
    res = expected_t1(env, args.tol)
    out = {"value": float(res.value), "converged": bool(res.converged),
           "levels": int(res.levels)}
    if args.format == "csv":
        return _csv(list(out), [tuple(out.values())])
    return json.dumps(out)


def cmd_mean_matrix(args) -> str:
    env = _load_env(args.env)
    q = level_mean_matrix(env, args.level, args.tol).q
    return json.dumps({"level": args.level,
                       "order": "row-major, tally order A1..C3",
                       "q": [float(v) for v in q.ravel()]})


def cmd_simulate(args) -> str:
    env = _load_env(args.env)
    if args.horizon is not None:
        res = run_horizon(env, args.seed, args.horizon)
        header = ["steps", "final_position", "min_position", "max_position",
                  "empirical_drift"]
        row = (res.steps, res.final_position, res.min_position,
               res.max_position, res.empirical_drift)
        if args.format == "json":
            return json.dumps(dict(zip(header, row)))
        return _csv(header, [row])
    if args.dump_path:
        path = run_to_ladder(env, args.seed, step_cap=args.step_cap)
        if not path.stopped:
            log.warning("path abandoned at the step cap before its "
                        "ladder time")
        return " ".join(str(int(p)) for p in path.positions)
    stats = run_ensemble(env, args.seed, args.replicas,
                         workers=_workers(args), step_cap=args.step_cap)
    if args.format == "json":
        return json.dumps({
            "replicas": stats.replicas, "completed": stats.completed,
            "abandoned": stats.abandoned, "t1_mean": stats.t1_mean,
            "t1_var": stats.t1_var, "t1_se": stats.t1_se,
            "xt1_mean": stats.xt1_mean, "xt1_var": stats.xt1_var,
            "xt1_se": stats.xt1_se, "xt1_hist": stats.xt1_hist,
            "bias_warning": stats.bias_warning})
    return stats.to_csv()


def cmd_decompose(args) -> str:
    env = _load_env(args.env)
    per_replica = []
    level_totals = {}
    for r in range(args.replicas):
        path = run_to_ladder(env, args.seed, replica=r)
        dec = decompose(path)
        rep = verify_identity(dec, path)
        per_replica.append((r, rep.t1, path.x_t1, dec.u1_subtype(),
                            int(rep.ok)))
        if not rep.ok:
            log.error("replica %d identity violation: %s", r, rep.detail)
            if args.fail_fast:
                raise LadderWalkError(
                    f"identity violated on replica {r}: {rep.detail}")
        for lvl, tal in dec.tallies.items():
            agg = level_totals.setdefault(lvl, np.zeros(9, dtype=np.int64))
            agg += tal.as_array()
    tally_rows = [(lvl, *map(int, level_totals[lvl]))
                  for lvl in sorted(level_totals, reverse=True)]
    rep_header = ["replica", "t1", "xt1", "u1_subtype", "identity_ok"]
    tal_header = ["level", "a1", "a2", "a3", "b1", "b2", "b3",
                  "c1", "c2", "c3"]
    ok_all = all(row[4] == 1 for row in per_replica)
    if not ok_all:
        raise LadderWalkError("ladder-time identity violated; see stderr")
    if args.format == "json":
        return json.dumps({
            "replicas": [dict(zip(rep_header, r)) for r in per_replica],
            "level_tally_totals": [dict(zip(tal_header, r))
                                   for r in tally_rows]})
    return (_csv(rep_header, per_replica) + "\n"
            + _csv(tal_header, tally_rows))


def cmd_velocity(args) -> str:
    env_law = _load_env_law(args.env_law)
    rep = velocity(env_law, args.samples, tol=args.tol, seed=args.seed,
                   max_levels=args.max_levels, workers=_workers(args))
    out = {
        "velocity": rep.value(args.factor),
        "factor": args.factor,
        "velocity_drift": rep.velocity_drift,
        "velocity_abs": rep.velocity_abs,
        "numerator_drift": rep.numerator_drift,
        "numerator_drift_se": rep.numerator_drift_se,
        "numerator_abs": rep.numerator_abs,
        "numerator_abs_se": rep.numerator_abs_se,
        "denominator": rep.denominator,
        "denominator_se": rep.denominator_se,
        "samples": rep.samples,
        "converged_samples": rep.converged_samples,
        "divergent_fraction": rep.divergent_fraction,
        "tol": rep.tol,
        "max_levels": rep.max_levels,
    }
    return json.dumps(out)


def cmd_wald_table(output_path: str | None = None) -> int:
    """Regression over the five built-in rows: route A (branching mean
    ladder time times drift) against route B (spectral exit law 1 - h);
    exit 0 iff every row meets its tolerance against the reference."""
    header = ["row", "q2", "q1", "p1", "p2", "drift", "route_a", "route_b",
              "diff", "reference", "tolerance", "ok"]
    rows = []
    all_ok = True
    from .environment import SiteLaw
    for n, (probs, reference, tol) in enumerate(WALD_ROWS, start=1):
        law = SiteLaw(*probs)
        drift = local_drift(law)
        route_a = expected_t1(Environment.homogeneous(law)).value * drift
        h, _ = homogeneous_root(law)
        route_b = 1.0 - h
        diff = route_a - route_b
        ok = (abs(diff) <= tol and abs(route_a - reference) <= tol
              and abs(route_b - reference) <= tol)
        if tol > 1e-6:
            log.warning("row %d: near-zero drift %s, slow-convergence "
                        "tolerance %s in effect", n, _fmt(drift), _fmt(tol))
        if not ok:
            log.error("row %d outside tolerance: route_a=%s route_b=%s "
                      "reference=%s", n, _fmt(route_a), _fmt(route_b),
                      _fmt(reference))
            all_ok = False
        rows.append((n, *probs, drift, route_a, route_b, diff, reference,
                     tol, int(ok)))
    text = _csv(header, rows)
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if all_ok else 1


# -- parser and dispatch -----------------------------------------------------


def _add_format(p: argparse.ArgumentParser, default: str):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="format", action="store_const",
                   const="json", default=default)
    g.add_argument("--csv", dest="format", action="store_const", const="csv")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ladderwalk",
        description="Ladder epochs of (2-2) bounded-jump walks on Z.")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="info-level diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exit", help="transfer-matrix exit probabilities")
    sp.add_argument("--env", required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--start", type=int)
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_exit)

    sp = sub.add_parser("hit", help="deep-limit hitting probabilities")
    sp.add_argument("--env", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_hit)

    sp = sub.add_parser("oracle-exit", help="linear-solve exit probabilities")
    sp.add_argument("--env", required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--start", type=int)
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_oracle_exit)

    sp = sub.add_parser("oracle-time", help="linear-solve expected exit times")
    sp.add_argument("--env", required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_oracle_time)

    sp = sub.add_parser("t1", help="expected ladder time via branching")
    sp.add_argument("--env", required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    _add_format(sp, "json")
    sp.set_defaults(handler=cmd_t1)

    sp = sub.add_parser("mean-matrix", help="level mean matrix (row-major)")
    sp.add_argument("--env", required=True)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.set_defaults(handler=cmd_mean_matrix, format="json")

    sp = sub.add_parser("simulate", help="seeded Monte Carlo simulation")
    sp.add_argument("--env", required=True)
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--horizon", type=int,
                    help="fixed step count instead of the ladder time")
    sp.add_argument("--step-cap", type=int, default=10 ** 8)
    sp.add_argument("--dump-path", action="store_true",
                    help="print one raw path as integers")
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_simulate)

    sp = sub.add_parser("decompose",
                        help="excursion decomposition + identity check")
    sp.add_argument("--env", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--fail-fast", action="store_true")
    _add_format(sp, "csv")
    sp.set_defaults(handler=cmd_decompose)

    sp = sub.add_parser("velocity", help="RWRE limiting velocity")
    sp.add_argument("--env-law", required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--factor", choices=("drift", "abs"), default="drift")
    sp.add_argument("--max-levels", type=int, default=10 ** 5)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(handler=cmd_velocity, format="json")

    sp = sub.add_parser("wald-table",
                        help="built-in homogeneous regression table")
    sp.add_argument("--output", help="write the CSV here instead of stdout")
    sp.set_defaults(handler=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --version/-h, 2 on error
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr, format="%(levelname)s %(message)s",
        level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "wald-table":
            return cmd_wald_table(args.output)
        print(args.handler(args))
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidLaw as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LadderWalkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

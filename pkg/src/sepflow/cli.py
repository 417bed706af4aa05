"""Command-line entry point; every command is a thin wrapper over the library.

Exit codes: 0 success, 2 validation failure (non-generic data, PMF oracle
mismatch, failed certification), 3 IO or format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import (
    axis_family,
    ccdf_zperp,
    certify,
    check_genericity,
    cluster_family_to_json,
    family_to_json,
    linear_components,
    montecarlo_report,
    pair_from_json,
    pair_to_json,
    pmf_z1,
    pmf_z1_oracle,
    rational_str,
    sample_pair,
    schedule_from_json,
    schedule_to_json,
    simulate,
    simulation_to_json,
    synth_canonical,
    synth_fem,
    synth_relu_decomposed,
    synth_truncated,
    tv_bound_report,
    write_fig4_csv,
    write_trajectory_csv,
    z_axis,
    z_perp,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

_ALGOS = {
    "canonical": synth_canonical,
    "truncated": synth_truncated,
    "fem": synth_fem,
    "relu-decomposed": synth_relu_decomposed,
}


class ValidationError(Exception):
    pass


def _default_seed() -> int:
    return int(os.environ.get("SEPFLOW_SEED", "0"))


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


def _load_pair(path: str):
    return pair_from_json(_read(path))


def cmd_generate(args) -> int:
    pair = sample_pair(
        d=args.d,
        n_red=args.n,
        n_blue=args.n_blue if args.n_blue is not None else args.n,
        seed=args.seed,
        law="isotropic_gaussian" if args.law == "gaussian" else args.law,
    )
    report = check_genericity(pair)
    if not (report.distinct_coords and report.general_position):
        if not args.allow_degenerate:
            raise ValidationError(f"non-generic dataset: {report.reason}")
        print(f"warning: emitting degenerate dataset ({report.reason})", file=sys.stderr)
    _write(args.output, pair_to_json(pair))
    print(f"wrote {args.output}: d={pair.dim} reds={pair.n_red} blues={pair.n_blue}")
    return EXIT_OK


def cmd_check(args) -> int:
    pair = _load_pair(args.pair)
    report = check_genericity(pair, tol=args.tol)
    payload = {
        "schema": 1,
        "distinct_coords": report.distinct_coords,
        "general_position": report.general_position,
        "reason": report.reason,
    }
    print(json.dumps(payload))
    ok = report.distinct_coords and report.general_position
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_separability(args) -> int:
    pair = _load_pair(args.pair)
    value, best_axis = z_perp(pair)
    per_axis = {axis: z_axis(pair, axis) for axis in range(1, pair.dim + 1)}
    for axis, z in per_axis.items():
        marker = "  <- min" if axis == best_axis else ""
        print(f"Z^{axis} = {z}{marker}")
    print(f"Z_perp = {value} (axis {best_axis})")
    if args.emit_family:
        family = axis_family(pair, best_axis)
        _write(args.emit_family, family_to_json(family))
        print(f"wrote separating family to {args.emit_family}")
    return EXIT_OK


def _pmf_rows(n: int):
    pmf = pmf_z1(n)
    return [(k, pmf.mass[k]) for k in sorted(pmf.mass)]


def cmd_pmf(args) -> int:
    rows = _pmf_rows(args.n)
    if args.oracle:
        oracle = pmf_z1_oracle(args.n)
        mismatches = [k for k, q in rows if oracle.mass.get(k) != q]
        if mismatches:
            print(f"oracle mismatch at k = {mismatches}", file=sys.stderr)
            return EXIT_VALIDATION
        print(f"oracle agreement for N={args.n}: exact")
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "probability", "probability_float"])
            for k, q in rows:
                writer.writerow([k, rational_str(q), repr(float(q))])
        print(f"wrote {args.output}")
    else:
        for k, q in rows:
            print(f"{k}\t{rational_str(q)}\t{float(q):.12g}")
    return EXIT_OK


def cmd_ccdf(args) -> int:
    if args.fig4:
        d_list = [int(v) for v in args.d_list.split(",")]
        write_fig4_csv(args.fig4, args.n, d_list)
        print(f"wrote {args.fig4}")
        return EXIT_OK
    for k in range(1, 2 * args.n):
        q = ccdf_zperp(args.d, args.n, k)
        print(f"{k}\t{rational_str(q)}\t{float(q):.12g}")
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    report = montecarlo_report(
        args.d, args.n, args.samples, args.seed, workers=args.workers
    )
    text = json.dumps(report)
    if args.output:
        _write(args.output, text)
        print(f"wrote {args.output}")
    else:
        print(text)
    return EXIT_OK


def cmd_cluster(args) -> int:
    pair = _load_pair(args.pair)
    family = linear_components(pair, args.target_axis, args.color)
    text = cluster_family_to_json(family)
    if args.output:
        _write(args.output, text)
        print(f"wrote {args.output}")
    else:
        print(text)
    print(f"clusters: {len(family.clusters)} (color {family.color_clustered})")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    pair = _load_pair(args.pair)
    synth = _ALGOS[args.algo]
    if args.algo == "canonical":
        schedule = synth(pair, target_axis=args.target_axis)
    else:
        schedule = synth(pair, target_axis=args.target_axis or 1, color=args.color)
    _write(args.output, schedule_to_json(schedule))
    print(f"wrote {args.output}")
    print(f"switches: {schedule.switches}")
    tv = tv_bound_report(schedule)
    print(
        f"tv: {tv['tv']:.6g} bound: {tv['bound']:.6g} "
        f"premise: {tv['premise']} within: {tv['within']}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    pair = _load_pair(args.pair)
    schedule = schedule_from_json(_read(args.schedule))
    result = certify(pair, schedule, mode=args.mode, step=args.step)
    if args.trajectories:
        _, snapshots = simulate(
            pair.points(), schedule, mode=args.mode, step=args.step, record=True
        )
        write_trajectory_csv(args.trajectories, snapshots, pair.labels())
        print(f"wrote {args.trajectories}")
    if args.output:
        _write(args.output, simulation_to_json(result))
        print(f"wrote {args.output}")
    print(f"classified: {'true' if result.ok else 'false'}")
    print(f"max blue displacement: {result.max_blue_displacement:.6g}")
    return EXIT_OK if result.ok else EXIT_VALIDATION


def cmd_report(args) -> int:
    pair = _load_pair(args.pair)
    gen = check_genericity(pair)
    value, best_axis = z_perp(pair)
    payload = {
        "schema": 1,
        "d": pair.dim,
        "reds": pair.n_red,
        "blues": pair.n_blue,
        "generic": gen.distinct_coords and gen.general_position,
        "z_per_axis": {str(ax): z_axis(pair, ax) for ax in range(1, pair.dim + 1)},
        "z_perp": value,
        "best_axis": best_axis,
        "schedules": {},
    }
    for name, synth in _ALGOS.items():
        try:
            if name == "canonical":
                schedule = synth(pair)
            else:
                schedule = synth(pair, target_axis=1)
            result = certify(pair, schedule)
            tv = tv_bound_report(schedule)
            payload["schedules"][name] = {
                "switches": schedule.switches,
                "classified": result.ok,
                "max_blue_displacement": result.max_blue_displacement,
                "tv": tv["tv"],
                "tv_bound": tv["bound"],
                "tv_premise": tv["premise"],
            }
        except (ValueError, RuntimeError) as exc:
            payload["schedules"][name] = {"error": str(exc)}
    text = json.dumps(payload, indent=2)
    if args.output:
        _write(args.output, text)
        print(f"wrote {args.output}")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepflow",
        description="Separability laws and constructive neural-ODE classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a labeled pair and write it as JSON")
    p.add_argument("-d", type=int, required=True, help="ambient dimension")
    p.add_argument("-n", type=int, required=True, help="number of red points")
    p.add_argument("--n-blue", type=int, default=None, help="blue count (default: n)")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--law", choices=["uniform_cube", "gaussian"], default="uniform_cube")
    p.add_argument("--allow-degenerate", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("check", help="genericity report for a dataset file")
    p.add_argument("pair")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("separability", help="per-axis gap counts and the best axis")
    p.add_argument("pair")
    p.add_argument("--emit-family", default=None, help="write the best-axis family JSON")
    p.set_defaults(func=cmd_separability)

    p = sub.add_parser("pmf", help="exact one-axis gap-count law")
    p.add_argument("-N", dest="n", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="cross-check by enumeration")
    p.add_argument("-o", "--output", default=None, help="CSV output path")
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("ccdf", help="exact tail law of the best-axis count")
    p.add_argument("-d", type=int, default=1)
    p.add_argument("-N", dest="n", type=int, required=True)
    p.add_argument("--fig4", default=None, help="write the lower-bound CSV here")
    p.add_argument("--d-list", default="1,2,4,8,16", help="d values for --fig4")
    p.set_defaults(func=cmd_ccdf)

    p = sub.add_parser("montecarlo", help="empirical-vs-exact tail comparison")
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-N", dest="n", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("cluster", help="linear-components decomposition of one color")
    p.add_argument("pair")
    p.add_argument("--target-axis", type=int, default=1)
    p.add_argument("--color", choices=["auto", "red", "blue"], default="auto")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synthesize", help="build a control schedule for a dataset")
    p.add_argument("pair")
    p.add_argument("--algo", choices=sorted(_ALGOS), default="canonical")
    p.add_argument("--target-axis", type=int, default=None)
    p.add_argument("--color", choices=["auto", "red", "blue"], default="auto")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="run a schedule on a dataset and certify")
    p.add_argument("pair")
    p.add_argument("schedule")
    p.add_argument("--mode", choices=["exact", "rk4"], default="exact")
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--trajectories", default=None, help="CSV path for per-leg positions")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="full dataset report: genericity, counts, schedules")
    p.add_argument("pair")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, AssertionError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

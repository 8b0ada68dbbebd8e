"""Command-line experiments: schedules, validation, simulation, NDT tables, sweeps."""
from __future__ import annotations

import argparse
import logging
import pathlib
import sys

import numpy as np

from .core import analysis, oracle, placement, scheduler, validator
from .core.topology import new_topology
from .core.utils import (
    atomic_write_text,
    convert_to_fraction,
    format_fraction,
    get_config,
    payload_digest,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class LogLevelAction(argparse.Action):
    """Lower the root log level, never raise it."""

    def __init__(self, option_strings, dest, nargs=0, **kwargs):
        super().__init__(option_strings, dest, nargs=nargs, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        current = getattr(namespace, self.dest, None) or logging.WARNING
        setattr(namespace, self.dest, min(current, self.const))


def _rational(text: str):
    try:
        return convert_to_fraction(text)
    except (TypeError, ValueError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        path = atomic_write_text(out, text)
        logger.info(f"Wrote {path}")


# ---------- sub-commands ----------


def cmd_schedule(args) -> int:
    t = new_topology(args.k, args.d)
    demands = placement.canonical_demands(t.k, args.files)
    sched = scheduler.build_schedule(t, demands)
    _emit(scheduler.dump_schedule(sched), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    t = new_topology(args.k, args.d)
    sched = scheduler.parse_schedule(t, pathlib.Path(args.schedule).read_text("utf-8"))
    result = validator.validate(t, sched)
    for v in result.collisions + result.pairing:
        print(validator.render_violation(v))
    for user, taus in sorted(result.missing.items()):
        print(f"missing ue={user} types={','.join(map(str, sorted(taus)))}")
    if not result.ok:
        return EXIT_INVALID
    print(validator.render_report(validator.measure(t, sched)))
    return EXIT_OK


def cmd_simulate(args) -> int:
    t = new_topology(args.k, args.d)
    seed = get_config("fogran.seed") if args.seed is None else args.seed
    prime = get_config("fogran.field_prime") if args.prime is None else args.prime
    rng = np.random.default_rng(seed)

    scheme = placement.build_placement(t, placement.PrimeField(prime))
    lib = placement.make_library(args.files, args.file_bytes, rng)
    cache = placement.encode(scheme, lib)
    logger.info(
        f"Library of {lib.n_files} files: "
        + ", ".join(payload_digest(f) for f in lib.files)
    )

    demand_vectors = [placement.worst_case_demands(t.k, lib.n_files)]
    demand_vectors += [
        placement.random_demands(t.k, lib.n_files, rng) for _ in range(args.random_demands)
    ]
    report = None
    for demands in demand_vectors:
        sched = scheduler.build_schedule(t, demands, cache)
        result = validator.validate(t, sched, scheme)
        if not result.ok:
            for v in result.collisions + result.pairing:
                print(validator.render_violation(v))
            return EXIT_INVALID
        outcome = validator.simulate_delivery(t, scheme, lib, demands, sched, cache)
        if not outcome.ok:
            print(f"decode-failure ue={outcome.first_mismatch}")
            return EXIT_INVALID
        report = report or validator.measure(t, sched)
    print(validator.render_report(report))
    return EXIT_OK


def cmd_ndt(args) -> int:
    t = new_topology(args.k, args.d)
    sched = scheduler.build_schedule(t, placement.canonical_demands(t.k, 1))
    report = validator.measure(t, sched)
    ratio = format_fraction(analysis.ratio_bound(t.d)) if t.d >= 2 else "-"
    print(
        f"ndt={format_fraction(report.ndt_exact)}"
        f" bound={format_fraction(analysis.prop1_bound(t.d))}"
        f" benchmark={format_fraction(analysis.full_caching_edge_ndt(t.d))}"
        f" ratio={ratio}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    mu_grid = analysis.parse_grid(args.mu_grid)
    r_grid = analysis.parse_grid(args.r_grid)
    workers = args.workers or get_config("fogran.sweep_workers")
    frame = analysis.sweep(args.d, mu_grid, r_grid, k=args.k, workers=workers)
    if args.out is None:
        sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
    else:
        analysis.write_sweep(frame, args.out)
    return EXIT_OK


def _threshold(func, mu, d) -> str:
    try:
        return format_fraction(func(mu, d))
    except ValueError:
        return "-"


def cmd_compare(args) -> int:
    point = analysis.best_scheme(args.mu, args.r, args.d)
    print(
        f"delta_ach={format_fraction(point.delta_ach)}"
        f" delta_full={format_fraction(point.delta_full)}"
        f" r1={_threshold(analysis.threshold_r1, args.mu, args.d)}"
        f" r2={_threshold(analysis.threshold_r2, args.mu, args.d)}"
        f" best={point.best.value}"
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    t = new_topology(args.k, args.d)
    value = oracle.min_slots(t, args.budget)
    heuristic = oracle.heuristic_slots(t) if scheduler.schedulable(t.k, t.d) else None
    shown = str(value) if value is not None else f">{args.budget}"
    print(
        f"oracle k={t.k} d={t.d} min_slots={shown}"
        f" heuristic_slots={heuristic if heuristic is not None else '-'}"
    )
    if None not in (value, heuristic) and value > heuristic:
        return EXIT_INVALID
    return EXIT_OK


# ---------- parser ----------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="element-fogran",
        description="Cache-aided delivery over (K,d) regular Fog-RAN edge networks",
    )
    parser.add_argument("-v", "--verbose", action=LogLevelAction, const=logging.INFO,
                        dest="log_level", help="log progress")
    parser.add_argument("--debug", action=LogLevelAction, const=logging.DEBUG,
                        dest="log_level", help="log search and coding details")
    commands = parser.add_subparsers(dest="command", required=True)

    def network(sub):
        sub.add_argument("--k", type=int, required=True, help="EN/user pairs")
        sub.add_argument("--d", type=int, required=True, help="connectivity degree")

    sub = commands.add_parser("schedule", help="dump the delivery schedule")
    network(sub)
    sub.add_argument("--files", type=int, default=None,
                     help="library size N for the canonical demands (default K)")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.set_defaults(func=cmd_schedule)

    sub = commands.add_parser("validate", help="check a schedule dump")
    network(sub)
    sub.add_argument("--schedule", required=True, help="schedule dump file")
    sub.set_defaults(func=cmd_validate)

    sub = commands.add_parser("simulate", help="encode, deliver and decode end to end")
    network(sub)
    sub.add_argument("--files", type=int, default=4, help="library size N")
    sub.add_argument("--file-bytes", type=int, default=1024, help="bytes per file")
    sub.add_argument("--seed", type=int, default=None, help="random seed")
    sub.add_argument("--prime", type=int, default=None, help="coding field modulus")
    sub.add_argument("--random-demands", type=int, default=0,
                     help="additional random demand vectors to deliver")
    sub.set_defaults(func=cmd_simulate)

    sub = commands.add_parser("ndt", help="exact NDT, bound, benchmark and ratio")
    network(sub)
    sub.set_defaults(func=cmd_ndt)

    sub = commands.add_parser("sweep", help="regime CSV over (mu, r) grids")
    sub.add_argument("--d", type=int, required=True, help="connectivity degree")
    sub.add_argument("--mu-grid", required=True, help="a:b:step")
    sub.add_argument("--r-grid", required=True, help="a:b:step")
    sub.add_argument("--k", type=int, default=None,
                     help="use the K-dependent edge NDT instead of the worst-case bound")
    sub.add_argument("--workers", type=int, default=None, help="worker processes")
    sub.add_argument("--out", help="CSV file (default stdout)")
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser("compare", help="both schemes at one (mu, r)")
    sub.add_argument("--d", type=int, required=True, help="connectivity degree")
    sub.add_argument("--mu", type=_rational, required=True, help="cache size num/den")
    sub.add_argument("--r", type=_rational, required=True, help="fronthaul num/den")
    sub.set_defaults(func=cmd_compare)

    sub = commands.add_parser("oracle", help="exhaustive minimum slot count")
    network(sub)
    sub.add_argument("--budget", type=int, default=12, help="largest slot count to try")
    sub.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level or logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    if getattr(args, "files", 0) is None:
        args.files = args.k
    try:
        return args.func(args)
    except (ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

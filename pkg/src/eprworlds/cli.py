"""``eprworlds`` command line.

Exit codes: 0 success, 1 experiment-file parse or semantic error (diagnostic
on stderr as ``file:line:col: message``), 2 any other failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys

from . import __version__
from . import report as rep
from .binning import run_bins
from .correlation import Method, bell_test, correlation_lhv, lhv_source, quantum_source, theta_scan, violating_triple
from .errors import EprError, ProtocolError
from .experiment import execute, override_seeds
from .lhv import STRATEGIES, get_strategy, sgn_closed_form
from .measurement import MeasurementSetup, run_three_measurements
from .protocol import parse
from .spin import X, Z, Direction, make_singlet
from .worlds import take_census

DEFAULT_SEED = 0


class CliError(Exception):
    pass


def resolve_seed(flag: int | None, file_default: int | None = None) -> int | None:
    """CLI flag, then ``EPR_SEED``, then whatever the file or command default is."""
    if flag is not None:
        return flag
    env = os.environ.get("EPR_SEED")
    if env not in (None, ""):
        try:
            value = int(env)
        except ValueError:
            raise CliError(f"EPR_SEED must be an integer, got {env!r}") from None
        if value < 0:
            raise CliError("EPR_SEED must be non-negative")
        return value
    return file_default


def _timestamp(stamp: bool) -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc).isoformat()
    if stamp:
        return _dt.datetime.now(_dt.timezone.utc).isoformat()
    return None


def _provenance(seeds, stamp=False) -> dict:
    return {"tool": "eprworlds", "version": __version__, "seeds": list(seeds), "timestamp": _timestamp(stamp)}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _long_csv(obj) -> str:
    rows = []
    for key, value in rep._flatten("", obj):
        rows.append((key, str(value).lower() if isinstance(value, bool) else value))
    return rep._csv_text(("field", "value"), rows)


def _render(obj: dict, fmt: str, out: str | None) -> None:
    _emit(rep.dumps(obj) if fmt == "json" else _long_csv(obj), out)


def _axes_from(args) -> tuple[Direction, Direction]:
    if args.axes is not None:
        p1, a1, p2, a2 = args.axes
        return Direction.from_degrees(p1, a1), Direction.from_degrees(p2, a2)
    return Z, Direction.from_degrees(args.angle, 0.0)


def cmd_run(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            source = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{args.file}: cannot read: {exc}", file=sys.stderr)
        return 2
    try:
        plan = parse(source)
    except ProtocolError as exc:
        print(exc.format(args.file), file=sys.stderr)
        return 1
    seed = resolve_seed(args.seed)
    if seed is not None:
        plan = override_seeds(plan, seed)
    report = execute(plan, timestamp=_timestamp(args.timestamp))
    _emit(rep.experiment_csv(report) if args.format == "csv" else rep.dumps(rep.experiment_json(report)), args.out)
    return 0


def cmd_scan(args) -> int:
    if args.points < 2:
        raise CliError("points must be >= 2")
    for v in (args.start, args.stop):
        if not 0.0 <= v <= 180.0:
            raise CliError(f"scan angle {v} outside [0, 180]")
    lhv = get_strategy(args.lhv) if args.lhv else None
    seed = resolve_seed(args.seed, DEFAULT_SEED)
    table = theta_scan(args.start, args.stop, args.points, lhv, args.samples, seed)
    if args.format == "csv":
        _emit(rep.scan_csv(table), args.out)
    else:
        obj = {"schema": rep.SCHEMA_ID, "kind": "scan", "scan": rep.scan_json(table)}
        obj["provenance"] = _provenance([seed] if lhv else [])
        _emit(rep.dumps(obj), args.out)
    if args.plot:
        from .plotting import plot_scan

        plot_scan(table, args.plot)
    return 0


def cmd_bin(args) -> int:
    if args.bins < 1:
        raise CliError("bins must be >= 1")
    if args.centers:
        centers = [float(c) for c in args.centers.split(",")]
    elif args.bins == 1:
        centers = [0.0]
    else:
        centers = [180.0 * i / (args.bins - 1) for i in range(args.bins)]
    seed = resolve_seed(args.seed, DEFAULT_SEED)
    result = run_bins(args.runs, centers, args.tolerance, seed, args.resolution, args.maxden, args.workers)
    if args.format == "csv":
        _emit(rep.bin_csv(result), args.out)
    else:
        _emit(rep.dumps(rep.bin_json(result, _provenance([seed]))), args.out)
    if args.plot:
        from .plotting import plot_bins

        plot_bins(result, args.plot)
    return 0


def cmd_bell(args) -> int:
    if args.triple is not None:
        t = args.triple
        triple = tuple(Direction.from_degrees(t[i], t[i + 1]) for i in (0, 2, 4))
    else:
        triple = violating_triple(X, Z)
    seed = resolve_seed(args.seed, DEFAULT_SEED)
    if args.source == "quantum":
        source, seeds = quantum_source(Method.OPERATOR), []
    elif args.source == "worlds":
        source, seeds = quantum_source(Method.WORLD_COUNTING), []
    else:
        source, seeds = lhv_source(get_strategy(args.source), args.samples, seed), [seed]
    verdict = bell_test(source, triple)
    obj = {"schema": rep.SCHEMA_ID, "kind": "bell", "source": args.source, "verdict": rep.bell_json(verdict)}
    obj["provenance"] = _provenance(seeds)
    _render(obj, args.format, args.out)
    return 0


def cmd_lhv(args) -> int:
    axes = _axes_from(args)
    seed = resolve_seed(args.seed, DEFAULT_SEED)
    result = correlation_lhv(get_strategy(args.strategy), axes, args.samples, seed, args.workers)
    obj = {"schema": rep.SCHEMA_ID, "kind": "lhv", "strategy": args.strategy, "result": rep.correlation_json(result)}
    if args.strategy == "sgn":
        obj["closed_form"] = sgn_closed_form(axes[0].angle_to(axes[1]))
    obj["provenance"] = _provenance([seed])
    _render(obj, args.format, args.out)
    return 0


def cmd_worlds(args) -> int:
    axes = _axes_from(args)
    state = run_three_measurements(make_singlet(axes[0]), MeasurementSetup(*axes))
    census = take_census(state, args.maxden)
    obj = {
        "schema": rep.SCHEMA_ID,
        "kind": "worlds",
        "axes": [rep.direction_json(a) for a in axes],
        "max_denominator": args.maxden,
        "census": rep.census_json(census),
        "provenance": _provenance([]),
    }
    _render(obj, args.format, args.out)
    return 0


def _non_negative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be finite")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprworlds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv"), default="json"):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", metavar="PATH", help="write here instead of stdout")

    def seeded(p, samples=10**5):
        p.add_argument("--seed", type=_non_negative, help="overrides EPR_SEED")
        p.add_argument("--samples", type=_positive, default=samples)
        p.add_argument("--workers", type=_positive, default=1)

    def axes(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--angle", type=_finite, default=60.0, help="device 2 tilt from z in degrees (device 1 on z)")
        g.add_argument("--axes", type=_finite, nargs=4, metavar=("P1", "A1", "P2", "A2"))

    p = sub.add_parser("run", help="execute an .epr experiment file")
    p.add_argument("file")
    common(p)
    p.add_argument("--seed", type=_non_negative, help="replace every seed in the file")
    p.add_argument("--timestamp", action="store_true", help="record the wall-clock time in provenance")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scan", help="sweep the angle between the two devices")
    p.add_argument("start", type=_finite)
    p.add_argument("stop", type=_finite)
    p.add_argument("points", type=int)
    common(p, default="csv")
    p.add_argument("--lhv", choices=sorted(STRATEGIES), help="add an LHV Monte Carlo column")
    seeded(p, samples=10**4)
    p.add_argument("--plot", metavar="PATH", help="also render a figure (png/svg/pdf)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bin", help="random per-run angle, binned by angle")
    p.add_argument("--runs", type=_positive, default=10**6)
    p.add_argument("--bins", type=int, default=19)
    p.add_argument("--centers", help="comma-separated bin centres in degrees (overrides --bins)")
    p.add_argument("--tolerance", type=_finite, default=1.0, help="bin half-width in degrees")
    p.add_argument("--resolution", type=_finite, default=0.1, help="angle grid step in degrees")
    p.add_argument("--maxden", type=_positive, default=10**4)
    p.add_argument("--seed", type=_non_negative)
    p.add_argument("--workers", type=_positive, default=1)
    common(p)
    p.add_argument("--plot", metavar="PATH")
    p.set_defaults(func=cmd_bin)

    p = sub.add_parser("bell", help="three-direction Bell inequality")
    p.add_argument("--triple", type=_finite, nargs=6, metavar="DEG", help="n1 n2 n3 as polar/azimuth pairs")
    p.add_argument("--source", default="quantum", choices=["quantum", "worlds", *sorted(STRATEGIES)])
    seeded(p)
    common(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("lhv", help="Monte Carlo correlation of a local hidden-variable strategy")
    p.add_argument("strategy", choices=sorted(STRATEGIES))
    axes(p)
    seeded(p, samples=10**6)
    common(p)
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("worlds", help="world census for a pair of measurement axes")
    axes(p)
    p.add_argument("--maxden", type=_positive, default=10**6)
    common(p)
    p.set_defaults(func=cmd_worlds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, EprError, ValueError, KeyError, OSError) as exc:
        print(f"eprworlds {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

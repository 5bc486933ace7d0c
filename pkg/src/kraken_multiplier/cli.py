"""Command-line front end.

Subcommands: classic, kraken, tables, curve, sweep, simulate, verify.
Output goes to stdout as csv (default), json or a rounded human table.

Exit status: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from . import fixtures as fx
from .errors import DomainError, KrakenError
from .ledger import SimConfig, events_to_csv, run_simulation
from .multiplier import (
    SWEEP_AXES,
    MultiplierParams,
    SkipSpec,
    classic_curve,
    classic_limit,
    din_ratio,
    din_ratio_skipped,
    kraken_eval,
    sweep,
)
from .output import FORMATS, OutputTable, render_many
from .verification import DEFAULT_SEED, corrupt_fixture, run_verification

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

PARAM_FLAGS = (
    ("R", "-R", "--reserve", float, "reserve fraction R"),
    ("I", "-I", "--insurance", float, "DIN price I as a fraction of insured value"),
    ("O", "-O", "--origination", float, "1 + origination fee fraction O"),
    ("T", "-T", "--tranche", float, "insured tranche fraction T"),
    ("n", "-n", "--iterations", int, "deposit -> loan iterations per level"),
    ("k", "-k", "--depth", int, "DIN nesting depth"),
)

PRESETS: dict[str, MultiplierParams] = {
    **{f"table{t.table_id}": t.params for t in fx.PAPER_TABLES},
    "figure3": fx.FIGURE3_BASE,
    "eq7": fx.EQ7_SIM_PARAMS,
}

# config-file keys accepted besides the flag destinations
_CONFIG_ALIASES = {
    "reserve": "R",
    "insurance": "I",
    "origination": "O",
    "tranche": "T",
    "iterations": "n",
    "depth": "k",
}


class UsageError(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    for dest, short, long, typ, help_ in PARAM_FLAGS:
        g.add_argument(short, long, dest=dest, type=typ, default=None, help=help_)
    g.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="start from a named parameter set; explicit flags override it")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default=None, help="output format (default csv)")
    p.add_argument("--config", default=None, help="JSON file with flag values; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kraken-multiplier",
        description="Classic and DIN-nested money multipliers.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classic", help="classic reserve series and its 1/R limit")
    p.add_argument("-R", "--reserve", dest="R", type=float, default=None)
    p.add_argument("-n", "--iterations", dest="n", type=int, default=None)
    p.add_argument("--include-initial-deposit", action="store_true", default=None,
                   help="count the originating deposit (series tends to 1/R)")
    _add_common(p)

    p = sub.add_parser("kraken", help="nested DIN multiplier for levels 1..k")
    _add_param_flags(p)
    p.add_argument("--log-space", action="store_true", default=None,
                   help="carry log m to avoid overflow at large depth")
    _add_common(p)

    p = sub.add_parser("tables", help="reproduce the four published tables")
    p.add_argument("--table", type=int, choices=[1, 2, 3, 4], default=None)
    _add_common(p)

    for name, help_ in (
        ("curve", "(k, m, log10 m) series per swept value, for semi-log plots"),
        ("sweep", "multiplier curves across values of one parameter"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_param_flags(p)
        p.add_argument("--axis", choices=SWEEP_AXES, default=None)
        p.add_argument("--values", default=None, help="comma-separated values for the axis")
        _add_common(p)

    p = sub.add_parser("simulate", help="transaction-level ledger simulation")
    _add_param_flags(p)
    p.add_argument("--seed-capital", type=float, default=None)
    p.add_argument("--leak", type=float, default=None, help="fraction of each deposit lost, in [0, 1)")
    p.add_argument("--skip-every", type=int, default=None,
                   help="every j-th loan of a level is not DIN insured")
    p.add_argument("--min-loan", type=float, default=None)
    p.add_argument("--cap", type=float, default=None,
                   help="maximum synthetic capital as a multiple of seed capital")
    p.add_argument("--max-events", type=int, default=None)
    p.add_argument("--events", default=None, help="write the event log (csv) to this path")
    _add_common(p)

    p = sub.add_parser("verify", help="check the library against the published values")
    p.add_argument("--seed", type=int, default=None, help="RNG seed for randomized checks")
    p.add_argument("--corrupt", default=None, metavar="TABLE:K",
                   help="scale one fixture entry by 2 before checking (failure-path test)")
    _add_common(p)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: top level must be an object")
    return {_CONFIG_ALIASES.get(k, k.replace("-", "_")): v for k, v in data.items()}


def merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags (None) from the config file named by ``--config``."""
    config = _load_config(getattr(args, "config", None))
    unknown = set(config) - set(vars(args))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in config.items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    if getattr(args, "format", None) is None:
        args.format = "csv"
    return args


def params_from_args(args: argparse.Namespace, default: MultiplierParams | None = None) -> MultiplierParams:
    base = PRESETS[args.preset] if getattr(args, "preset", None) else default
    values = {}
    missing = []
    for dest, _, long, _, _ in PARAM_FLAGS:
        v = getattr(args, dest)
        if v is None and base is not None:
            v = getattr(base, dest)
        if v is None:
            missing.append(long)
        values[dest] = v
    if missing:
        raise UsageError(f"missing parameters: {', '.join(missing)} (or use --preset)")
    return MultiplierParams(**values)


def _parse_values(text: str | None, axis: str) -> list:
    if text is None:
        raise UsageError("--values is required")
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise UsageError("--values is empty")
    cast = int if axis in ("n", "k") else float
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError):
        raise UsageError(f"--values for axis {axis} must be {cast.__name__}s") from None


def curve_table(caption: str, curve, label: str = "k") -> OutputTable:
    table = OutputTable(caption, (label, "m"))
    for level, m in curve.points:
        table.add(level, m)
    return table


def cmd_classic(args) -> OutputTable:
    if args.R is None:
        raise UsageError("--reserve/-R is required")
    n = 100 if args.n is None else args.n
    initial = bool(args.include_initial_deposit)
    curve = classic_curve(args.R, n, include_initial_deposit=initial)
    table = OutputTable(f"Classic series, R={args.R:g}", ("iteration", "m"))
    for level, m in curve.points:
        table.add(level, m)
    table.add("limit", classic_limit(args.R))
    return table


def cmd_kraken(args) -> OutputTable:
    p = params_from_args(args)
    curve = kraken_eval(p, log_space=bool(args.log_space))
    caption = "Nested DIN multiplier, " + ", ".join(f"{k}={v:g}" for k, v in p.as_dict().items())
    if curve.log_values is None:
        return curve_table(caption, curve)
    table = OutputTable(caption, ("k", "m", "ln_m"))
    for (level, m), lm in zip(curve.points, curve.log_values):
        table.add(level, m, lm)
    return table


def cmd_tables(args) -> list[OutputTable]:
    chosen = [t for t in fx.PAPER_TABLES if args.table in (None, t.table_id)]
    return [curve_table(t.caption, kraken_eval(t.params)) for t in chosen]


def _sweep_inputs(args, default: MultiplierParams, default_axis: str | None, default_values):
    base = params_from_args(args, default=default)
    axis = args.axis or default_axis
    if axis is None:
        raise UsageError("--axis is required")
    raw = args.values if args.values is not None else default_values
    return base, axis, _parse_values(raw, axis)


def cmd_curve(args) -> OutputTable:
    base, axis, values = _sweep_inputs(args, fx.FIGURE3_BASE, "R", list(fx.FIGURE3_RESERVES))
    table = OutputTable(f"Semi-log curve data, axis {axis}", ("series", "k", "m", "log10_m"))
    for value, curve in sweep(base, axis, values):
        for (level, m), lg in zip(curve.points, curve.log10()):
            table.add(f"{axis}={value:g}", level, m, lg)
    return table


def cmd_sweep(args) -> OutputTable:
    base, axis, values = _sweep_inputs(args, fx.PAPER_TABLES[0].params, None, None)
    table = OutputTable(f"Sweep over {axis}", (axis, "k", "m"))
    for value, curve in sweep(base, axis, values):
        for level, m in curve.points:
            table.add(value, level, m)
    return table


def cmd_simulate(args) -> OutputTable:
    p = params_from_args(args)
    kwargs = {
        "seed_capital": args.seed_capital,
        "leak": args.leak,
        "skip_insurance_every": args.skip_every,
        "min_loan": args.min_loan,
        "synthetic_capital_cap": args.cap,
        "max_events": args.max_events,
    }
    config = SimConfig(p, **{k: v for k, v in kwargs.items() if v is not None})
    result = run_simulation(config)
    analytic = kraken_eval(p).final
    table = OutputTable("Ledger simulation", ("quantity", "value"))
    table.add("empirical_multiplier", result.empirical_multiplier)
    table.add("analytic_multiplier", analytic)
    table.add("relative_delta", (result.empirical_multiplier - analytic) / analytic)
    table.add("levels_completed", result.levels_completed)
    table.add("halt_reason", result.halt_reason.value)
    table.add("event_count", len(result.events))
    for level, m in enumerate(result.level_multipliers, start=1):
        table.add(f"level_{level}_multiplier", m)
    for name, value in vars(result.final_state).items():
        table.add(name, value)
    if p.O > p.I and p.T > 0:
        table.add("din_ratio", din_ratio(p.O, p.I, p.T))
    if config.skip_insurance_every is not None and p.O > p.I and config.skip_insurance_every <= p.n:
        skip = SkipSpec(s=config.skip_insurance_every, n=p.n)
        table.add("din_ratio_skipped", din_ratio_skipped(p.O, p.I, p.R, skip))
    if args.events:
        with open(args.events, "w", encoding="utf-8", newline="") as fh:
            fh.write(events_to_csv(result.events))
    return table


def cmd_verify(args) -> tuple[OutputTable, bool]:
    tables = fx.PAPER_TABLES
    if args.corrupt:
        try:
            table_id, k = (int(x) for x in args.corrupt.split(":"))
        except ValueError:
            raise UsageError("--corrupt expects TABLE:K, e.g. 1:5") from None
        if not (1 <= table_id <= 4 and 1 <= k <= 10):
            raise UsageError("--corrupt TABLE must be 1-4 and K 1-10")
        tables = corrupt_fixture(tables, table_id, k)
    results = run_verification(tables, seed=DEFAULT_SEED if args.seed is None else args.seed)
    table = OutputTable(
        "Verification", ("check", "expected", "computed", "tolerance", "verdict")
    )
    for r in results:
        table.add(r.name, r.expected, r.computed, r.tolerance, "pass" if r.passed else "FAIL")
    return table, all(r.passed for r in results)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    ok = True
    try:
        args = merge_config(args)
        cmd = args.command
        if cmd == "tables":
            text = render_many(cmd_tables(args), args.format)
        elif cmd == "verify":
            table, ok = cmd_verify(args)
            text = table.render(args.format)
        else:
            handler = {
                "classic": cmd_classic,
                "kraken": cmd_kraken,
                "curve": cmd_curve,
                "sweep": cmd_sweep,
                "simulate": cmd_simulate,
            }[cmd]
            text = handler(args).render(args.format)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KrakenError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if not ok:
        print(f"{parser.prog}: verification failed", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: config parsing, preset runners, CSV emission.

Subcommands
-----------
simulate  run a JSON-configured ensemble and write stats.csv
tables    run one or all named presets and write their stats.csv
quotes    print the deterministic quote schedule for a preset
check     run the oracle/invariant suite and write check_report.csv
trace     one seeded run with a per-step trace.csv

All floats are written with six significant digits so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .checks import run_checks
from .engine import RunResult, replication_seed, simulate_ensemble, simulate_run
from .metrics import EnsembleStats, ensemble_stats
from .model import (ConfigError, DealerSpec, MarketParams, SimConfig,
                    quoting_times, validate)
from .presets import DEFAULT_RUNS, DEFAULT_SEED, PRESET_NAMES, UnknownPreset, build_preset
from .quoting import QuoteContext, optimal_quotes


class ParseError(ValueError):
    """The config file is not valid JSON or misses required keys."""


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def parse_config(path: str | Path) -> SimConfig:
    """Load and validate a JSON experiment description.

    Top-level keys: market {s0, sigma, T, dt, A, k}, dealers
    [{gamma, beta?, q0?, x0?}], runs?, seed?, flags?.  Missing betas are
    filled with 1/N at validation; missing x0 defaults to 0.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from exc

    try:
        m = raw["market"]
        market = MarketParams(s0=float(m["s0"]), sigma=float(m["sigma"]),
                              horizon=float(m["T"]), dt=float(m["dt"]),
                              a_rate=float(m["A"]), k=float(m["k"]))
        dealers = tuple(
            DealerSpec(gamma=float(d["gamma"]),
                       beta=float(d["beta"]) if "beta" in d else None,
                       q0=int(d.get("q0", 0)), x0=float(d.get("x0", 0.0)))
            for d in raw["dealers"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad config structure in {path}: {exc}") from exc

    flags = raw.get("flags", {})
    config = SimConfig(market=market, dealers=dealers,
                       runs=int(raw.get("runs", 1)), seed=int(raw.get("seed", 0)),
                       beta_sum_override=bool(flags.get("beta_sum_override", False)),
                       trace=bool(flags.get("trace", False)),
                       alt_denominator=bool(flags.get("alt_denominator", False)))
    return validate(config)


def write_stats_csv(path: Path, stats: EnsembleStats) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent", "average_spread", "profit_mean", "profit_std",
                    "qT_mean", "qT_std"])
        for i, d in enumerate(stats.dealers, start=1):
            w.writerow([i, _fmt(d.average_spread), _fmt(d.mean_profit),
                        _fmt(d.std_profit), _fmt(d.mean_q_t), _fmt(d.std_q_t)])


def write_quotes_csv(path: Path, config: SimConfig, q_override: int | None) -> None:
    n = config.n_dealers
    header = ["t"]
    for i in range(1, n + 1):
        header += [f"d{i}_delta_b", f"d{i}_delta_a"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t in quoting_times(config.market):
            tau = config.market.horizon - t
            row = [_fmt(t)]
            for d in config.dealers:
                q = q_override if q_override is not None else d.q0
                qp = optimal_quotes(QuoteContext(
                    q=q, gamma=d.gamma, beta=d.beta, k=config.market.k,
                    n_dealers=n, sigma=config.market.sigma, tau=tau))
                row += [_fmt(qp.delta_b), _fmt(qp.delta_a)]
            w.writerow(row)


def write_trace_csv(path: Path, run: RunResult) -> None:
    assert run.trace is not None, "run was executed without tracing"
    n = len(run.dealers)
    header = ["t", "s"]
    for i in range(1, n + 1):
        header += [f"d{i}_delta_b", f"d{i}_delta_a", f"d{i}_bid", f"d{i}_ask",
                   f"d{i}_q", f"d{i}_x", f"d{i}_fill_a", f"d{i}_fill_b"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for st in run.trace:
            row = [_fmt(st.t), _fmt(st.s)]
            for i in range(n):
                qp = st.quotes[i]
                row += [_fmt(qp.delta_b), _fmt(qp.delta_a),
                        _fmt(st.s - qp.delta_b), _fmt(st.s + qp.delta_a),
                        st.q[i], _fmt(st.x[i]),
                        int(st.fill_a[i]), int(st.fill_b[i])]
            w.writerow(row)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    config = parse_config(args.config)
    if args.runs is not None:
        config = replace(config, runs=args.runs)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trace:
        config = replace(config, trace=True)
    config = validate(config)
    out = _outdir(args)
    results = simulate_ensemble(config)
    write_stats_csv(out / "stats.csv", ensemble_stats(results))
    if config.trace:
        write_trace_csv(out / "trace.csv", results[0])
    print(f"wrote {out / 'stats.csv'} ({config.runs} runs, seed {config.seed})")
    return 0


def _cmd_tables(args) -> int:
    out = _outdir(args)
    runs = args.runs if args.runs is not None else DEFAULT_RUNS
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    names = [args.preset] if args.preset else list(PRESET_NAMES)
    for name in names:
        config = build_preset(name, runs=runs, seed=seed)
        stats = ensemble_stats(simulate_ensemble(config))
        dest = out / "stats.csv" if args.preset else out / name / "stats.csv"
        dest.parent.mkdir(parents=True, exist_ok=True)
        write_stats_csv(dest, stats)
        means = ", ".join(_fmt(d.mean_profit) for d in stats.dealers)
        print(f"{name}: profit means [{means}] -> {dest}")
    return 0


def _cmd_quotes(args) -> int:
    config = build_preset(args.preset, runs=1)
    out = _outdir(args)
    write_quotes_csv(out / "quotes.csv", config, args.q)
    print(f"wrote {out / 'quotes.csv'}")
    return 0


def _cmd_trace(args) -> int:
    if args.config:
        config = parse_config(args.config)
    else:
        config = build_preset(args.preset or "table1", runs=1)
    seed = args.seed if args.seed is not None else config.seed
    config = validate(replace(config, trace=True, seed=seed))
    run = simulate_run(config, replication_seed(seed, 0))
    out = _outdir(args)
    write_trace_csv(out / "trace.csv", run)
    print(f"wrote {out / 'trace.csv'} (seed {seed}, replication 0)")
    return 0


def _cmd_check(args) -> int:
    rows = run_checks(alt_denominator=args.alt_denominator)
    out = _outdir(args)
    with open(out / "check_report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "expected", "actual", "tolerance", "pass"])
        for r in rows:
            w.writerow([r.name, r.expected, r.actual, r.tolerance,
                        "true" if r.passed else "false"])
    failed = [r for r in rows if not r.passed]
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.actual} "
              f"(expected {r.expected}, tol {r.tolerance})")
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed "
          f"-> {out / 'check_report.csv'}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dealerfield",
                                description="Competitive dealer-market simulator")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a JSON-configured ensemble")
    sim.add_argument("--config", required=True)
    sim.add_argument("--runs", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", default="out")
    sim.add_argument("--trace", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    tab = sub.add_parser("tables", help="run named presets")
    tab.add_argument("--preset", choices=PRESET_NAMES, default=None,
                     help="single preset; default runs all of them")
    tab.add_argument("--runs", type=int, default=None)
    tab.add_argument("--seed", type=int, default=None)
    tab.add_argument("--out", default="out")
    tab.set_defaults(func=_cmd_tables)

    qu = sub.add_parser("quotes", help="deterministic quote schedule")
    qu.add_argument("--preset", choices=PRESET_NAMES, required=True)
    qu.add_argument("--q", type=int, default=None,
                    help="inventory override applied to every dealer")
    qu.add_argument("--out", default="out")
    qu.set_defaults(func=_cmd_quotes)

    tr = sub.add_parser("trace", help="single run with per-step CSV")
    tr.add_argument("--preset", choices=PRESET_NAMES, default=None)
    tr.add_argument("--config", default=None)
    tr.add_argument("--seed", type=int, default=None)
    tr.add_argument("--out", default="out")
    tr.set_defaults(func=_cmd_trace)

    ch = sub.add_parser("check", help="oracle and invariant suite")
    ch.add_argument("--out", default="out")
    ch.add_argument("--alt-denominator", action="store_true",
                    help="sweep the bracket-denominator comparison over every preset dealer family")
    ch.set_defaults(func=_cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UnknownPreset, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

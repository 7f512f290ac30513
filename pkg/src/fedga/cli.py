"""Command line harness: ``fedga optimize | evaluate | sweep | report``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import reporting as rp
from .config import ConfigError, parse_config
from .fedtoy import TrainingError
from .ga import run_offline
from .scenario import generate_scenario
from .schedulers import SIM, TOY, SchedulerPolicy, reduction, run_online

log = logging.getLogger("fedga")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _setup(args, workers=None):
    scenario_cfg, ga_cfg = parse_config(args.config, seed=args.seed, workers=workers or args.workers)
    return scenario_cfg, ga_cfg, generate_scenario(scenario_cfg)


def _optimize(scenario_cfg, ga_cfg, scenario, out: Path):
    result = run_offline(scenario, ga_cfg)
    rp.write_csv(out / rp.TRACE_FILE, rp.TRACE_HEADER, rp.trace_rows(result.traces))
    rp.write_json(out / rp.STRATEGY_FILE, rp.strategy_to_dict(result.best, scenario, scenario_cfg.seed))
    return result


def _evaluate(scenario_cfg, scenario, chromosome, runs: int, learner: str, out: Path):
    if len(chromosome) != len(scenario):
        raise UsageError(
            f"strategy has {len(chromosome)} workers but the scenario has {len(scenario)}; "
            "pass the matching --workers/--config"
        )
    options = {"local_target": scenario_cfg.local_target, "global_target": scenario_cfg.global_target}
    summaries = []
    for policy in (SchedulerPolicy.fixed_strategy(chromosome), SchedulerPolicy.rss(), SchedulerPolicy.gss()):
        log.info("online evaluation of %s (%d runs, %s learner)", policy.name, runs, learner)
        summaries.append(run_online(policy, scenario, runs, scenario_cfg.seed, learner, options))
    rp.write_csv(out / rp.COMPARISON_FILE, rp.COMPARISON_HEADER, rp.comparison_rows(summaries))
    rp.write_csv(out / rp.RUNS_FILE, rp.RUNS_HEADER, rp.run_rows(summaries))
    return summaries


def _print_comparison(summaries) -> None:
    rows = []
    ga_total = summaries[0].mean("total")
    for s in summaries:
        rows.append(
            [
                s.policy,
                f"{s.mean('total'):.2f} +- {s.std('total'):.2f}",
                f"{s.mean('computation'):.2f}",
                f"{s.mean('transmission'):.2f}",
                f"{s.mean('time_per_round'):.2f} +- {s.std('time_per_round'):.2f}",
                f"{s.mean('global_iterations'):.1f}",
                f"{reduction(s.mean('total'), ga_total):.1f}",
            ]
        )
    header = ["policy", "total J", "comp J", "trans J", "time/round s", "rounds", "GA saving %"]
    print(rp.format_table(header, rows))


def cmd_optimize(args) -> int:
    scenario_cfg, ga_cfg, scenario = _setup(args)
    out = _out_dir(args.out)
    result = _optimize(scenario_cfg, ga_cfg, scenario, out)
    rep = result.best.report
    print(
        f"K={len(scenario)} generations={len(result.traces)} early_stop={result.stopped_early} "
        f"round_energy={rep.round_energy:.4f} J process_energy={rep.process_energy:.4f} J "
        f"violations={rep.violations}"
    )
    print(f"wrote {out / rp.TRACE_FILE} and {out / rp.STRATEGY_FILE}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    scenario_cfg, _, scenario = _setup(args)
    try:
        chromosome = rp.load_strategy(args.strategy)
    except rp.ReportError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args.out)
    summaries = _evaluate(scenario_cfg, scenario, chromosome, args.runs, args.learner, out)
    _print_comparison(summaries)
    print(f"wrote {out / rp.COMPARISON_FILE} and {out / rp.RUNS_FILE}")
    return EXIT_OK


def _parse_counts(text: str) -> list[int]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts:
        raise UsageError("--counts: expected a non-empty comma-separated list of worker counts")
    try:
        counts = [int(t) for t in parts]
    except ValueError:
        raise UsageError(f"--counts: not a list of integers: {text!r}") from None
    return counts


def cmd_sweep(args) -> int:
    counts = _parse_counts(args.counts)
    # validate every count before the long runs start
    setups = {k: _setup(args, workers=k) for k in counts}
    out = _out_dir(args.out)
    rows = []
    for k in counts:
        scenario_cfg, ga_cfg, scenario = setups[k]
        sub = _out_dir(out / f"k{k}")
        log.info("sweep: K=%d", k)
        result = _optimize(scenario_cfg, ga_cfg, scenario, sub)
        summaries = _evaluate(scenario_cfg, scenario, result.best, args.runs, args.learner, sub)
        ga, rss, gss = summaries
        rep = result.best.report
        rows.append(
            (
                k,
                len(result.traces),
                result.stopped_early,
                rep.round_energy,
                rep.round_energy / k,
                rep.process_energy,
                rep.violations,
                ga.mean("total"),
                rss.mean("total"),
                gss.mean("total"),
                reduction(rss.mean("total"), ga.mean("total")),
                reduction(gss.mean("total"), ga.mean("total")),
                ga.mean("time_per_round"),
                rss.mean("time_per_round"),
                gss.mean("time_per_round"),
                ga.safe_fraction,
            )
        )
    rp.write_csv(out / rp.SWEEP_FILE, rp.SWEEP_HEADER, rows)
    print(rp.format_table(rp.SWEEP_HEADER[:7], [r[:7] for r in rows]))
    print(f"wrote {out / rp.SWEEP_FILE} and {len(counts)} result directories")
    return EXIT_OK


def cmd_report(args) -> int:
    src = Path(args.input)
    if not src.is_dir():
        raise UsageError(f"{src} is not a directory")
    expected = (rp.TRACE_FILE, rp.COMPARISON_FILE, rp.SWEEP_FILE)
    present = [name for name in expected if (src / name).is_file()]
    if not present:
        raise UsageError(f"{src} contains none of the expected files: {', '.join(expected)}")
    out = _out_dir(args.out) if args.out else src
    try:
        if rp.TRACE_FILE in present:
            trace = rp.read_csv(src / rp.TRACE_FILE, rp.TRACE_HEADER)
            e0, ef, pct = rp.energy_reduction(trace)
            last = trace[-1]
            print(f"generations: {len(trace)}")
            print(f"generation-0 best energy: {e0:.4f} J")
            print(f"final best energy: {ef:.4f} J")
            print(f"reduction vs generation 0: {pct:.1f} %")
            print(f"final violations: {int(last['violations'])}")
            rp.write_csv(
                out / rp.CHART_FILE,
                rp.CHART_HEADER,
                ((int(r["generation"]),) + tuple(r[c] for c in rp.CHART_HEADER[1:]) for r in trace),
            )
            rp.plot_trace(trace, out / "energy_vs_generation.png")
        if rp.COMPARISON_FILE in present:
            rows = rp.read_csv(src / rp.COMPARISON_FILE, rp.COMPARISON_HEADER)
            cols = ("total_energy", "computation_energy", "transmission_energy", "time_per_round", "global_iterations")
            table = [[r["policy"]] + [f"{r[c + '_mean']:.2f} +- {r[c + '_std']:.2f}" for c in cols]
                     + [f"{r['ga_energy_reduction_pct']:.1f}"] for r in rows]
            print(rp.format_table(["policy", *cols, "ga_saving_pct"], table))
            rp.plot_comparison(rows, out / "comparison.png")
        if rp.SWEEP_FILE in present:
            rows = rp.read_csv(src / rp.SWEEP_FILE, rp.SWEEP_HEADER)
            keys = ("workers", "per_worker_energy", "reduction_vs_rss_pct", "reduction_vs_gss_pct", "final_violations")
            print(rp.format_table(keys, [[r[k] for k in keys] for r in rows]))
            rp.plot_sweep(rows, out / "sweep.png")
    except rp.ReportError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fedga", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_default):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 42)")
        p.add_argument("--workers", type=int, default=None, help="override the number of workers")
        p.add_argument("--out", default=out_default, help=f"output directory (default {out_default})")

    def online(p):
        p.add_argument("--runs", type=int, default=100, help="independent online runs per policy (default 100)")
        p.add_argument("--learner", choices=(SIM, TOY), default=SIM, help="online learner (default sim)")

    p = sub.add_parser("optimize", help="run the offline GA and write trace.csv and best_strategy.json")
    common(p, "results")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="compare a strategy with the RSS and GSS baselines online")
    common(p, "results")
    p.add_argument("--strategy", required=True, help="best_strategy.json from optimize")
    online(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="optimize and evaluate for several worker counts")
    common(p, "sweep")
    p.add_argument("--counts", default="5,10,20,40", help="comma-separated worker counts (default 5,10,20,40)")
    online(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize a result directory and render figures")
    p.add_argument("input", help="directory written by optimize, evaluate or sweep")
    p.add_argument("--out", default=None, help="where to write chart data and figures (default: input)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"fedga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "runs", 1) < 1:
        print("fedga: error: --runs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("fedga: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"fedga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingError, RuntimeError, ValueError, OSError, ArithmeticError) as exc:
        print(f"fedga: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

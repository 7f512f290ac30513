"""CSV/JSON sinks, aligned text tables and figures for experiment outputs.

All tabular files are UTF-8 CSV with LF line endings and the fixed headers
below. Floats are written with 12 significant digits, so reruns with the same
configuration and seed produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .schedulers import OnlineSummary, reduction

TRACE_FILE = "trace.csv"
STRATEGY_FILE = "best_strategy.json"
COMPARISON_FILE = "comparison.csv"
RUNS_FILE = "runs.csv"
SWEEP_FILE = "sweep_summary.csv"
CHART_FILE = "energy_vs_generation.csv"

TRACE_HEADER = (
    "generation",
    "best_ff",
    "mean_ff",
    "best_total_energy",
    "best_computation_energy",
    "best_transmission_energy",
    "best_process_energy",
    "violations",
    "hypermutation",
)
_METRIC_COLUMNS = (
    ("total", "total_energy"),
    ("computation", "computation_energy"),
    ("transmission", "transmission_energy"),
    ("time_per_round", "time_per_round"),
    ("global_iterations", "global_iterations"),
    ("violations", "violations"),
)
COMPARISON_HEADER = (
    ("policy", "runs")
    + tuple(f"{col}_{stat}" for _, col in _METRIC_COLUMNS for stat in ("mean", "std"))
    + ("safe_run_fraction", "ga_energy_reduction_pct", "ga_time_reduction_pct")
)
RUNS_HEADER = (
    "policy",
    "run",
    "total_energy",
    "computation_energy",
    "transmission_energy",
    "time_per_round",
    "global_iterations",
    "violations",
    "violated_rounds",
)
SWEEP_HEADER = (
    "workers",
    "generations",
    "stopped_early",
    "best_round_energy",
    "per_worker_energy",
    "best_process_energy",
    "final_violations",
    "ga_total_energy",
    "rss_total_energy",
    "gss_total_energy",
    "reduction_vs_rss_pct",
    "reduction_vs_gss_pct",
    "ga_time_per_round",
    "rss_time_per_round",
    "gss_time_per_round",
    "ga_safe_run_fraction",
)
CHART_HEADER = ("generation", "best_total_energy", "best_computation_energy", "best_transmission_energy")


class ReportError(ValueError):
    """Missing or malformed result file."""


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0:
            return "0"
        return f"{v:.12g}"
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_csv(path: Path, header) -> list[dict]:
    """Rows of ``path`` as dicts of floats (``policy`` stays a string)."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ReportError(f"{path.name}: empty file, expected header {','.join(header)}") from None
        except csv.Error as exc:
            raise ReportError(f"{path.name} line 1: {exc}") from None
        if tuple(first) != tuple(header):
            raise ReportError(f"{path.name} line 1: unexpected header, expected {','.join(header)}")
        rows = []
        while True:
            try:
                raw = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                raise ReportError(f"{path.name} line {reader.line_num}: {exc}") from None
            line = reader.line_num
            if len(raw) != len(header):
                raise ReportError(
                    f"{path.name} line {line}: expected {len(header)} fields, got {len(raw)}"
                )
            row = {}
            for name, cell in zip(header, raw):
                if name == "policy":
                    row[name] = cell
                    continue
                try:
                    row[name] = float(cell)
                except ValueError:
                    raise ReportError(f"{path.name} line {line}: column {name} is not a number: {cell!r}") from None
            rows.append(row)
    if not rows:
        raise ReportError(f"{path.name}: no data rows")
    return rows


def trace_rows(traces):
    for t in traces:
        yield (
            t.generation,
            t.best_ff,
            t.mean_ff,
            t.best_round_energy,
            t.best_computation,
            t.best_transmission,
            t.best_process_energy,
            t.best_violations,
            t.hypermutation,
        )


def strategy_to_dict(chromosome, scenario, seed: int) -> dict:
    rep = chromosome.report
    return {
        "workers": len(scenario),
        "seed": seed,
        "round_energy_j": rep.round_energy if rep else None,
        "process_energy_j": rep.process_energy if rep else None,
        "global_iterations": rep.global_iterations if rep else None,
        "violations": rep.violations if rep else None,
        "assignments": [
            {"worker": w.id, "kind": w.kind, "frequency_hz": float(f), "power_w": float(p)}
            for w, f, p in zip(scenario.workers, chromosome.frequency, chromosome.power)
        ],
    }


def write_json(path: Path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_strategy(path: Path):
    """``(frequency, power)`` arrays from a strategy JSON file."""
    from .ga import Chromosome

    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ReportError(f"cannot read strategy {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ReportError(f"strategy {path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        genes = data["assignments"]
        f = [float(g["frequency_hz"]) for g in genes]
        p = [float(g["power_w"]) for g in genes]
    except (KeyError, TypeError, ValueError):
        raise ReportError(
            f"strategy {path}: expected an 'assignments' list of {{frequency_hz, power_w}} objects"
        ) from None
    if not all(math.isfinite(x) and x >= 0 for x in f + p):
        raise ReportError(f"strategy {path}: frequencies and powers must be finite and >= 0")
    return Chromosome(np.array(f), np.array(p))


def comparison_rows(summaries: list[OnlineSummary]):
    ga = next(s for s in summaries if s.policy == "GA")
    for s in summaries:
        row = [s.policy, len(s.records)]
        for metric, _ in _METRIC_COLUMNS:
            row += [s.mean(metric), s.std(metric)]
        row += [
            s.safe_fraction,
            reduction(s.mean("total"), ga.mean("total")),
            reduction(s.mean("time_per_round"), ga.mean("time_per_round")),
        ]
        yield row


def run_rows(summaries: list[OnlineSummary]):
    for s in summaries:
        for r in s.records:
            yield (
                s.policy,
                r.run,
                r.total,
                r.computation,
                r.transmission,
                r.time_per_round,
                r.global_iterations,
                r.violations,
                r.violated_rounds,
            )


def format_table(header, rows) -> str:
    cells = [list(header)] + [[c if isinstance(c, str) else fmt_short(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for j, r in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if j and i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def fmt_short(x) -> str:
    if isinstance(x, (int, np.integer)) or (isinstance(x, float) and x.is_integer() and abs(x) < 1e6):
        return str(int(x))
    return f"{x:.4g}"


def energy_reduction(trace: list[dict]) -> tuple[float, float, float]:
    """Generation-0 best energy, final best energy and the saving in percent."""
    e0 = trace[0]["best_total_energy"]
    ef = trace[-1]["best_total_energy"]
    pct = 100.0 * (e0 - ef) / e0 if e0 else 0.0
    return e0, ef, pct


# ---------------------------------------------------------------- figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> None:
    # no software/date metadata so reruns give identical bytes
    fig.savefig(path, dpi=100, metadata={"Software": None})


def plot_trace(trace: list[dict], path: Path) -> None:
    plt = _pyplot()
    g = [r["generation"] for r in trace]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(g, [r["best_total_energy"] for r in trace], label="total")
    ax.plot(g, [r["best_computation_energy"] for r in trace], label="computation", ls="--")
    ax.plot(g, [r["best_transmission_energy"] for r in trace], label="transmission", ls=":")
    ax.set_xlabel("generation")
    ax.set_ylabel("round energy of best strategy (J)")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_comparison(rows: list[dict], path: Path) -> None:
    plt = _pyplot()
    names = [r["policy"] for r in rows]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(5, 3.6))
    comp = [r["computation_energy_mean"] for r in rows]
    trans = [r["transmission_energy_mean"] for r in rows]
    ax.bar(x, comp, label="computation")
    ax.bar(x, trans, bottom=comp, label="transmission")
    ax.errorbar(x, [r["total_energy_mean"] for r in rows], yerr=[r["total_energy_std"] for r in rows], fmt="none",
                ecolor="black", capsize=4)
    ax.set_xticks(x, names)
    ax.set_ylabel("energy of one FL process (J)")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_sweep(rows: list[dict], path: Path) -> None:
    plt = _pyplot()
    k = [int(r["workers"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.4))
    axes[0].plot(k, [r["per_worker_energy"] for r in rows], marker="o")
    axes[0].set_xlabel("workers")
    axes[0].set_ylabel("energy per worker per round (J)")
    axes[0].set_ylim(bottom=0)
    for key, label in (("ga_total_energy", "GA"), ("rss_total_energy", "RSS"), ("gss_total_energy", "GSS")):
        axes[1].plot(k, [r[key] for r in rows], marker="o", label=label)
    axes[1].set_xlabel("workers")
    axes[1].set_ylabel("energy of one FL process (J)")
    axes[1].legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)

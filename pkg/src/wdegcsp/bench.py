"""Benchmark campaigns, result tables, and Table-style summaries."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import CspError, load_instance
from .search import SolveConfig, solve
from .stats import PairedRun, Ranking, WilcoxonReport, rank_chain, wilcoxon_censored
from .weighting import Strategy

COLUMNS = ["instance", "config", "status", "cpu_ms", "nodes", "limit_ms", "doubled"]
DONE = ("sat", "unsat")


@dataclass
class ResultRow:
    instance: str
    config: str
    status: str
    cpu_ms: float
    nodes: int
    limit_ms: int
    doubled: bool = False

    @property
    def done(self) -> bool:
        return self.status in DONE


def write_results(path, rows: Iterable[ResultRow], append: bool = False) -> None:
    path = Path(path)
    fresh = not append or not path.exists() or path.stat().st_size == 0
    with open(path, "a" if append else "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if fresh:
            w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r.instance, r.config, r.status, f"{r.cpu_ms:.3f}", r.nodes, r.limit_ms, int(r.doubled)])


def read_results(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            ResultRow(
                d["instance"],
                d["config"],
                d["status"],
                float(d["cpu_ms"]),
                int(d["nodes"]),
                int(d["limit_ms"]),
                d["doubled"].strip().lower() in ("1", "true"),
            )
            for d in csv.DictReader(fh)
        ]


def _execute(job) -> ResultRow:
    path, config_id, limit_ms, doubled = job
    try:
        csp = load_instance(path)
    except (OSError, CspError):
        return ResultRow(str(path), config_id, "error", 0.0, 0, limit_ms, doubled)
    res = solve(csp, SolveConfig.parse(config_id, timeout_ms=limit_ms))
    cpu = float(limit_ms) if res.status == "timeout" else res.cpu_ms
    return ResultRow(str(path), config_id, res.status, cpu, res.nodes, limit_ms, doubled)


def _run_jobs(jobs: list, workers: int) -> list[ResultRow]:
    if workers <= 1:
        return [_execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, jobs))


def instance_files(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.is_file() and not p.name.startswith("."))


def run_bench(
    instances,
    configs: Sequence,
    limit_ms: int,
    workers: int = 1,
) -> list[ResultRow]:
    """One row per (instance, config). ``instances`` is a directory or a list of paths."""
    if isinstance(instances, (str, os.PathLike)):
        paths = instance_files(instances)
    else:
        paths = [Path(p) for p in instances]
    ids = [c if isinstance(c, str) else c.id for c in configs]
    ids = [SolveConfig.parse(c).id for c in ids]
    jobs = [(p, c, int(limit_ms), False) for p in paths for c in ids]
    return _run_jobs(jobs, workers)


def group_of(config_id: str) -> str:
    return config_id.split("-", 1)[0]


def censored_jobs(rows: Sequence[ResultRow]) -> list:
    """Timed-out (instance, config) runs whose consistency group has a completion there."""
    original = [r for r in rows if not r.doubled]
    have_rerun = {(r.instance, r.config) for r in rows if r.doubled}
    by_inst: dict = {}
    for r in original:
        by_inst.setdefault((r.instance, group_of(r.config)), []).append(r)
    jobs = []
    for (inst, _), group in by_inst.items():
        if not any(r.done for r in group):
            continue
        for r in group:
            if r.status == "timeout" and (inst, r.config) not in have_rerun:
                jobs.append((inst, r.config, 2 * r.limit_ms, True))
    return jobs


def rerun_censored(rows: Sequence[ResultRow], workers: int = 1) -> list[ResultRow]:
    """Re-run censored runs at twice their limit; returns the new (doubled) rows."""
    return _run_jobs(censored_jobs(rows), workers)


# -- summaries -----------------------------------------------------------


def config_label(config_id: str, configs: Sequence[str]) -> str:
    """Strategy name when every config shares one consistency, else the config id."""
    if len({group_of(c) for c in configs}) == 1:
        try:
            return Strategy(config_id.split("-", 1)[1]).label
        except (IndexError, ValueError):
            pass
    return config_id


@dataclass
class Summary:
    configs: list
    n_instances: int
    completions: dict
    cpu_instances: int
    cpu_sum_s: dict
    cpu_lower_bound: dict
    nv_instances: int
    nv_mean: dict
    curves: dict = field(default_factory=dict)

    def cells(self) -> dict:
        cpu = {
            c: (">" if self.cpu_lower_bound[c] else "") + f"{self.cpu_sum_s[c]:,.1f}" for c in self.configs
        }
        nv = {c: ("-" if self.nv_mean[c] is None else f"{self.nv_mean[c]:,.0f}") for c in self.configs}
        return {
            f"Completion ({self.n_instances})": {c: str(self.completions[c]) for c in self.configs},
            f"ΣCPU sec. ({self.cpu_instances})": cpu,
            f"Average NV ({self.nv_instances})": nv,
        }

    def format(self) -> str:
        labels = [config_label(c, self.configs) for c in self.configs]
        cells = self.cells()
        first = max(len(k) for k in cells) + 2
        width = max([len(l) for l in labels] + [len(v) for row in cells.values() for v in row.values()]) + 2
        out = [" " * first + "".join(l.rjust(width) for l in labels)]
        for name, row in cells.items():
            out.append(name.ljust(first) + "".join(row[c].rjust(width) for c in self.configs))
        return "\n".join(out)

    def curve_rows(self) -> list[tuple[str, float, int]]:
        return [(c, t, k) for c in self.configs for t, k in self.curves[c]]


def summarize(rows: Sequence[ResultRow], configs: Optional[Sequence[str]] = None) -> Summary:
    """Completions, ΣCPU over instances some config finished (censored runs
    count their limit and mark the sum as a lower bound), mean node visits
    over instances every config finished, and cumulative completion curves.
    Doubled-limit rows are ignored here."""
    rows = [r for r in rows if not r.doubled]
    if configs is None:
        configs = list(dict.fromkeys(r.config for r in rows))
    configs = list(configs)
    table: dict = {}
    for r in rows:
        if r.config in configs:
            table.setdefault(r.instance, {})[r.config] = r
    instances = sorted(table)

    completions = {c: sum(1 for i in instances if c in table[i] and table[i][c].done) for c in configs}
    some = [i for i in instances if any(r.done for r in table[i].values())]
    cpu_sum = {c: 0.0 for c in configs}
    lower = {c: False for c in configs}
    for i in some:
        for c in configs:
            r = table[i].get(c)
            if r is None:
                continue
            cpu_sum[c] += (r.cpu_ms if r.done else r.limit_ms) / 1000.0
            if not r.done:
                lower[c] = True
    everyone = [i for i in instances if all(c in table[i] and table[i][c].done for c in configs)]
    nv = {
        c: (sum(table[i][c].nodes for i in everyone) / len(everyone) if everyone else None) for c in configs
    }
    curves = {}
    for c in configs:
        times = sorted(table[i][c].cpu_ms / 1000.0 for i in instances if c in table[i] and table[i][c].done)
        curves[c] = [(t, k + 1) for k, t in enumerate(times)]
    return Summary(configs, len(instances), completions, len(some), cpu_sum, lower, len(everyone), nv, curves)


def write_curves(path, summary: Summary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "cpu_s", "solved"])
        for c, t, k in summary.curve_rows():
            w.writerow([c, f"{t:.3f}", k])


# -- statistics over a results table --------------------------------------


def paired_runs(rows: Sequence[ResultRow], a: str, b: str) -> list[PairedRun]:
    orig: dict = {}
    rerun: dict = {}
    for r in rows:
        (rerun if r.doubled else orig)[r.instance, r.config] = r
    pairs = []
    for inst in sorted({i for i, _ in orig}):
        ra, rb = orig.get((inst, a)), orig.get((inst, b))
        if ra is None or rb is None:
            continue

        def redo(key):
            r = rerun.get(key)
            if r is None:
                return None
            return (r.cpu_ms if r.done else r.limit_ms) / 1000.0

        pairs.append(
            PairedRun(
                ra.cpu_ms / 1000.0,
                rb.cpu_ms / 1000.0,
                ra.done,
                rb.done,
                inst,
                redo((inst, a)),
                redo((inst, b)),
            )
        )
    return pairs


def analyze_pair(rows, a: str, b: str, alpha: float = 0.05, clock_floor: float = 1.0) -> WilcoxonReport:
    return wilcoxon_censored(paired_runs(rows, a, b), alpha, clock_floor)


def pairwise_ranking(rows, configs: Sequence[str], alpha: float = 0.05, clock_floor: float = 1.0) -> Ranking:
    """Rank ``configs`` by pairwise one-tailed tests. Raises if reruns are missing."""
    configs = sorted(set(configs))
    labels = {c: config_label(c, configs) for c in configs}
    better = {}
    for i, a in enumerate(configs):
        for b in configs[i + 1 :]:
            rep = analyze_pair(rows, a, b, alpha, clock_floor)
            if rep.needs_rerun:
                raise ValueError(f"{a} vs {b}: doubled-limit reruns missing for {rep.needs_rerun}")
            better[labels[a], labels[b]] = rep.verdict == "A>B"
            better[labels[b], labels[a]] = rep.verdict == "B>A"
    return rank_chain(list(labels.values()), better)


def groups(configs: Iterable[str]) -> dict:
    out: dict = {}
    for c in configs:
        out.setdefault(group_of(c), []).append(c)
    return out

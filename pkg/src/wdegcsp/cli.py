"""Command-line front end (``wdegcsp``)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .gac import SearchState
from .model import CspError, generate_random, load_instance, serialize_instance
from .oracle import OracleScopeError, closure_oracle
from .poac import run_poac
from .rnic import RnicEngine
from .search import SolveConfig, solve
from .weighting import ConfigError


def _cmd_solve(args) -> int:
    csp = load_instance(args.file)
    cfg = SolveConfig(args.consistency, args.strategy, args.timeout_ms)
    res = solve(csp, cfg)
    if args.json:
        print(json.dumps(res.to_json(), indent=2, sort_keys=True))
    else:
        print(f"status: {res.status}")
        print(f"nodes: {res.nodes}")
        print(f"cpu_ms: {res.cpu_ms:.1f}")
        if res.solution:
            print("solution: " + " ".join(f"{x}={v}" for x, v in res.solution.items()))
    return 0


def _cmd_gen(args) -> int:
    csp = generate_random(args.vars, args.dom, args.arity, args.cons, args.tightness, args.seed)
    text = serialize_instance(csp)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _engine_closure(csp, prop):
    state = SearchState(csp)
    if state.propagate(range(state.m)) is not None:
        return None
    if prop == "poac" and run_poac(state) >= 0:
        return None
    if prop == "rnic" and RnicEngine(state).run() >= 0:
        return None
    return state


def _cmd_verify(args) -> int:
    csp = load_instance(args.file)
    try:
        ref = closure_oracle(csp, args.property)
    except OracleScopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if ref.wiped:
        print("oracle: wipeout")
    else:
        for x, d in ref.domains.items():
            print(f"{x}: {' '.join(map(str, sorted(d)))}")
        for c, t in ref.tables.items():
            print(f"{c}: {len(t)} tuples")
    if args.property == "sac":
        return 0
    state = _engine_closure(csp, args.property)
    if state is None:
        agree = ref.wiped
    else:
        agree = not ref.wiped and all(set(state.live_values(i)) == ref.domains[x] for i, x in enumerate(state.var_ids))
        if agree and args.property == "rnic":
            agree = state.tables() == ref.tables
    print("engine agrees with oracle" if agree else "MISMATCH between engine and oracle")
    return 0 if agree else 1


def _cmd_bench(args) -> int:
    rows = bench.run_bench(args.dir, args.config, args.timeout_ms, args.workers)
    bench.write_results(args.out, rows)
    print(f"{len(rows)} rows written to {args.out}")
    return 0


def _cmd_rerun(args) -> int:
    if not args.double:
        print("nothing to do (pass --double)", file=sys.stderr)
        return 2
    rows = bench.read_results(args.results)
    new = bench.rerun_censored(rows, args.workers)
    bench.write_results(args.results, new, append=True)
    print(f"{len(new)} doubled-limit rows appended")
    return 0


def _cmd_summarize(args) -> int:
    rows = bench.read_results(args.results)
    configs = list(dict.fromkeys(r.config for r in rows))
    for name, members in bench.groups(configs).items():
        s = bench.summarize(rows, members)
        print(f"[{name.upper()}]")
        print(s.format())
        print()
        if args.curves:
            path = Path(args.curves)
            bench.write_curves(path.with_name(f"{path.stem}-{name}{path.suffix}"), s)
    return 0


def _cmd_analyze(args) -> int:
    a, b = [s.strip() for s in args.pair.split(",")]
    rows = bench.read_results(args.results)
    rep = bench.analyze_pair(rows, a, b, args.alpha, args.clock_floor)
    print(rep.format(a, b))
    return 1 if rep.needs_rerun else 0


def _cmd_rank(args) -> int:
    rows = bench.read_results(args.results)
    configs = list(dict.fromkeys(r.config for r in rows))
    status = 0
    for name, members in bench.groups(configs).items():
        if len(members) < 2:
            continue
        try:
            ranking = bench.pairwise_ranking(rows, members, args.alpha, args.clock_floor)
        except ValueError as exc:
            print(f"[{name.upper()}] {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"[{name.upper()}] {ranking.render()}")
        if ranking.warning:
            print(f"warning: {ranking.warning}", file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wdegcsp", description="Table-constraint solver with weighted-degree strategies")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("file")
    s.add_argument("--consistency", choices=["gac", "poac", "rnic"], default="gac")
    s.add_argument("--strategy", choices=["old", "alls", "lasts", "var", "allc", "head"], default="old")
    s.add_argument("--timeout-ms", type=int, default=None)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=_cmd_solve)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--dom", type=int, required=True)
    g.add_argument("--arity", type=int, default=2)
    g.add_argument("--cons", type=int, required=True)
    g.add_argument("--tightness", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=_cmd_gen)

    v = sub.add_parser("verify", help="compare an engine closure with the brute-force oracle")
    v.add_argument("file")
    v.add_argument("--property", choices=["gac", "sac", "poac", "rnic"], default="gac")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="run a campaign over a directory of instances")
    b.add_argument("dir")
    b.add_argument("--config", nargs="+", required=True, help="e.g. poac-alls rnic-head")
    b.add_argument("--timeout-ms", type=int, required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=_cmd_bench)

    r = sub.add_parser("rerun", help="re-run censored pairs at twice the limit")
    r.add_argument("results")
    r.add_argument("--double", action="store_true")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=_cmd_rerun)

    m = sub.add_parser("summarize", help="completion / ΣCPU / average NV table per consistency")
    m.add_argument("results")
    m.add_argument("--curves", help="write cumulative-completion points to this CSV (suffixed per group)")
    m.set_defaults(func=_cmd_summarize)

    a = sub.add_parser("analyze", help="censored Wilcoxon test for one pair of configs")
    a.add_argument("results")
    a.add_argument("--pair", required=True, help="A,B")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--clock-floor", type=float, default=1.0)
    a.set_defaults(func=_cmd_analyze)

    k = sub.add_parser("rank", help="ranking chain per consistency")
    k.add_argument("results")
    k.add_argument("--alpha", type=float, default=0.05)
    k.add_argument("--clock-floor", type=float, default=1.0)
    k.set_defaults(func=_cmd_rank)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CspError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Backtrack search: d-way branching, dom/wdeg, lexicographic values, GAC/POAC/RNIC lookahead."""

from __future__ import annotations

import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .gac import SearchState
from .model import Csp
from .poac import run_poac
from .rnic import RnicEngine
from .weighting import (
    ConfigError,
    Consistency,
    GacWipeout,
    Strategy,
    WeightStore,
    apply_event,
    check_pairing,
    select_variable,
)


@dataclass(frozen=True)
class SolveConfig:
    consistency: Consistency = Consistency.GAC
    strategy: Strategy = Strategy.OLD
    timeout_ms: Optional[int] = None
    node_limit: Optional[int] = None
    record_events: bool = False

    def __post_init__(self):
        object.__setattr__(self, "consistency", Consistency(self.consistency))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        check_pairing(self.consistency, self.strategy)
        if self.timeout_ms is not None and self.timeout_ms <= 0:
            raise ConfigError("timeout must be positive")

    @property
    def id(self) -> str:
        return f"{self.consistency.value}-{self.strategy.value}"

    @classmethod
    def parse(cls, spec: str, **kw) -> "SolveConfig":
        """``"poac-alls"``, ``"poac/alls"`` or ``"poac:alls"``."""
        for sep in "-/:":
            if sep in spec:
                cons, strat = spec.split(sep, 1)
                break
        else:
            cons, strat = spec, "old"
        try:
            return cls(Consistency(cons.strip().lower()), Strategy(strat.strip().lower()), **kw)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad configuration {spec!r}") from None


@dataclass
class SolveResult:
    status: str
    solution: Optional[dict] = None
    nodes: int = 0
    cpu_ms: float = 0.0
    wipeouts: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    events: Optional[list] = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "solution": self.solution,
            "nodes": self.nodes,
            "cpu_ms": round(self.cpu_ms, 3),
            "wipeouts": self.wipeouts,
            "weights": self.weights,
        }


class _Timeout(Exception):
    pass


class _Solver:
    def __init__(self, csp: Csp, config: SolveConfig):
        self.csp = csp
        self.config = config
        self.state = SearchState(csp)
        self.store = WeightStore.fresh(range(self.state.m), range(self.state.n))
        self.counts: Counter = Counter()
        self.events: Optional[list] = [] if config.record_events else None
        self.nodes = 0
        self.rnic = RnicEngine(self.state) if config.consistency is Consistency.RNIC else None
        self.deadline = None

    def sink(self, event) -> None:
        self.counts[type(event).__name__] += 1
        if self.events is not None:
            self.events.append(event)
        apply_event(self.store, self.config.strategy, event)

    def check(self) -> None:
        if self.deadline is not None and time.process_time() >= self.deadline:
            raise _Timeout

    def lookahead(self, seed) -> bool:
        state = self.state
        res = state.propagate(seed)
        if res is not None:
            self.sink(GacWipeout(res[0]))
            return False
        cons = self.config.consistency
        if cons is Consistency.POAC:
            return run_poac(state, self.sink, self.check) < 0
        if cons is Consistency.RNIC:
            return self.rnic.run(self.sink, self.check) < 0
        return True

    def dfs(self) -> bool:
        state = self.state
        if state.n_assigned == state.n:
            return True
        x = select_variable(state, self.store, self.config.strategy)
        limit = self.config.node_limit
        for p in state.live_positions(x):
            self.check()
            if limit is not None and self.nodes >= limit:
                raise _Timeout
            self.nodes += 1
            state.push()
            state.assign(x, p)
            if self.lookahead(state.cons_of[x]) and self.dfs():
                return True
            state.pop()
        return False

    def run(self) -> SolveResult:
        cfg = self.config
        start = time.process_time()
        if cfg.timeout_ms is not None:
            self.deadline = start + cfg.timeout_ms / 1000.0
        state = self.state
        old_limit = sys.getrecursionlimit()
        if old_limit < state.n + 200:
            sys.setrecursionlimit(state.n + 200)
        try:
            if not self.lookahead(range(state.m)):
                status = "unsat"
            elif self.dfs():
                status = "sat"
            else:
                status = "unsat"
        except _Timeout:
            status = "timeout"
        cpu_ms = (time.process_time() - start) * 1000.0

        solution = None
        if status == "sat":
            solution = {state.var_ids[x]: state.values[x][state.dom[x][0]] for x in range(state.n)}
        return SolveResult(
            status=status,
            solution=solution,
            nodes=self.nodes,
            cpu_ms=cpu_ms,
            wipeouts=dict(sorted(self.counts.items())),
            weights={
                "constraints": {state.con_ids[c]: w for c, w in self.store.wc.items()},
                "variables": {state.var_ids[x]: w for x, w in self.store.wv.items()},
            },
            events=self.events,
        )


def solve(csp: Csp, config: SolveConfig = SolveConfig()) -> SolveResult:
    """Find one solution, prove there is none, or time out.

    A node visit is one variable-value assignment attempt. Timeouts are
    checked (in process CPU time) before every node and inside every HLC
    pass.
    """
    return _Solver(csp, config).run()


"""Partition-one arc consistency by singleton tests with removal counters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .gac import Fixpoint, SearchState, Wipeout
from .weighting import EventSink, SingletonWipeout, VariableAllTestsFailed, null_sink


@dataclass
class Consistent:
    pruned: set = field(default_factory=set)


@dataclass
class Failed:
    culprit: str


SingletonOutcome = Union[Consistent, Failed]


def _test(state: SearchState, x: int, p: int, sink: EventSink, removed: list) -> int:
    """Assign x <- p, run GAC, restore. Returns the culprit constraint or -1."""
    state.push()
    state.assign(x, p)
    res = state.propagate(state.cons_of[x], removed)
    state.pop()
    if res is None:
        return -1
    culprit = res[0]
    sink(SingletonWipeout(culprit, x, state.values[x][p]))
    return culprit


def singleton_test(state: SearchState, x: str, v: int, sink: EventSink = null_sink) -> SingletonOutcome:
    xi = state.var_index[x]
    p = state.pos_of[xi].get(v)
    if p is None or not state.is_live(xi, p):
        raise ValueError(f"value {v} is not live in the domain of {x}")
    removed: list = []
    culprit = _test(state, xi, p, sink, removed)
    if culprit >= 0:
        return Failed(state.con_ids[culprit])
    return Consistent({(state.var_ids[y], state.values[y][w]) for y, w in removed})


def run_poac(
    state: SearchState,
    sink: EventSink = null_sink,
    check: Optional[Callable[[], None]] = None,
    removed: Optional[list] = None,
) -> int:
    """POAC fixpoint on an already-GAC state.

    Returns -1 at fixpoint, else the index of the variable whose domain
    was wiped out. Singleton tests go round-robin over future variables in
    declaration order, values in declared order.
    """
    assigned, cons_of = state.assigned, state.cons_of
    changed = True
    while changed:
        changed = False
        for x in range(state.n):
            if assigned[x]:
                continue
            if check is not None:
                check()
            failed = []
            counts: dict = {}
            survived = 0
            last_culprit = -1
            for p in state.live_positions(x):
                pruned: list = []
                culprit = _test(state, x, p, sink, pruned)
                if culprit >= 0:
                    failed.append(p)
                    last_culprit = culprit
                else:
                    survived += 1
                    for pair in pruned:
                        counts[pair] = counts.get(pair, 0) + 1
            if survived == 0:
                sink(VariableAllTestsFailed(x, last_culprit))
                return x

            doomed = [pair for pair, k in counts.items() if k == survived]
            if not failed and not doomed:
                continue
            changed = True
            seed = []
            for p in failed:
                state.remove(x, p)
                if removed is not None:
                    removed.append((x, p))
            if failed:
                seed.extend(cons_of[x])
            for y, w in doomed:
                state.remove(y, w)
                if removed is not None:
                    removed.append((y, w))
                seed.extend(cons_of[y])
            # re-propagation on the main state emits no weight events
            res = state.propagate(seed, removed)
            if res is not None:
                return res[1]
    return -1


def enforce_poac(state: SearchState, sink: EventSink = null_sink) -> Union[Fixpoint, Wipeout]:
    removed: list = []
    x = run_poac(state, sink, removed=removed)
    if x >= 0:
        return Wipeout(None, state.var_ids[x])
    return Fixpoint([(state.var_ids[y], state.values[y][w]) for y, w in removed])

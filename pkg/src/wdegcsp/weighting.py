"""Constraint/variable weights, weight-update strategies, and dom/wdeg."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Union


class ConfigError(ValueError):
    """Illegal strategy/consistency combination or bad solver settings."""


class Consistency(enum.Enum):
    GAC = "gac"
    POAC = "poac"
    RNIC = "rnic"


class Strategy(enum.Enum):
    OLD = "old"
    ALLS = "alls"
    LASTS = "lasts"
    VAR = "var"
    ALLC = "allc"
    HEAD = "head"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Strategy.OLD: "Old",
    Strategy.ALLS: "AllS",
    Strategy.LASTS: "LastS",
    Strategy.VAR: "Var",
    Strategy.ALLC: "AllC",
    Strategy.HEAD: "Head",
}

LEGAL = {
    Consistency.GAC: (Strategy.OLD,),
    Consistency.POAC: (Strategy.OLD, Strategy.ALLS, Strategy.LASTS, Strategy.VAR),
    Consistency.RNIC: (Strategy.OLD, Strategy.ALLC, Strategy.HEAD),
}


def check_pairing(consistency: Consistency, strategy: Strategy) -> None:
    if strategy not in LEGAL[consistency]:
        raise ConfigError(
            f"strategy {strategy.label} cannot be used with {consistency.value.upper()}"
        )


# -- propagation events --------------------------------------------------


@dataclass(frozen=True)
class GacWipeout:
    constraint: Hashable


@dataclass(frozen=True)
class SingletonWipeout:
    constraint: Hashable
    variable: Hashable
    value: int


@dataclass(frozen=True)
class VariableAllTestsFailed:
    variable: Hashable
    constraint: Hashable


@dataclass(frozen=True)
class RelationWipeout:
    head: Hashable
    neighborhood: tuple = ()


PropagationEvent = Union[GacWipeout, SingletonWipeout, VariableAllTestsFailed, RelationWipeout]
EventSink = Callable[[PropagationEvent], None]


def null_sink(event: PropagationEvent) -> None:
    pass


_POAC_EVENTS = (SingletonWipeout, VariableAllTestsFailed)
_POAC_OK = {Strategy.OLD, Strategy.ALLS, Strategy.LASTS, Strategy.VAR}
_RNIC_OK = {Strategy.OLD, Strategy.ALLC, Strategy.HEAD}


# -- weights -------------------------------------------------------------


@dataclass
class WeightStore:
    """``wc`` starts at 1 per constraint, ``wv`` at 0 per variable."""

    wc: dict = field(default_factory=dict)
    wv: dict = field(default_factory=dict)

    @classmethod
    def fresh(cls, constraints: Iterable[Hashable], variables: Iterable[Hashable]) -> "WeightStore":
        return cls({c: 1 for c in constraints}, {x: 0 for x in variables})

    def copy(self) -> "WeightStore":
        return WeightStore(dict(self.wc), dict(self.wv))


def apply_event(store: WeightStore, strategy: Strategy, event: PropagationEvent) -> dict:
    """Update ``store`` for one event; returns ``{("c"|"v", key): new_weight}``."""
    if isinstance(event, _POAC_EVENTS) and strategy not in _POAC_OK:
        raise ConfigError(f"{type(event).__name__} is not meaningful under {strategy.label}")
    if isinstance(event, RelationWipeout) and strategy not in _RNIC_OK:
        raise ConfigError(f"RelationWipeout is not meaningful under {strategy.label}")

    bump_c: list = []
    bump_v: list = []
    if isinstance(event, GacWipeout):
        bump_c.append(event.constraint)
    elif isinstance(event, SingletonWipeout):
        if strategy is Strategy.ALLS:
            bump_c.append(event.constraint)
    elif isinstance(event, VariableAllTestsFailed):
        if strategy is Strategy.LASTS:
            bump_c.append(event.constraint)
        elif strategy is Strategy.VAR:
            bump_v.append(event.variable)
    elif isinstance(event, RelationWipeout):
        if strategy is Strategy.ALLC:
            bump_c.append(event.head)
            bump_c.extend(event.neighborhood)
        elif strategy is Strategy.HEAD:
            bump_c.append(event.head)
    else:
        raise TypeError(f"not a propagation event: {event!r}")

    delta = {}
    for c in bump_c:
        store.wc[c] = store.wc.get(c, 1) + 1
        delta[("c", c)] = store.wc[c]
    for x in bump_v:
        store.wv[x] = store.wv.get(x, 0) + 1
        delta[("v", x)] = store.wv[x]
    return delta


# -- dom/wdeg ------------------------------------------------------------


def _future_counts(state) -> list[int]:
    assigned = state.assigned
    return [sum(1 for x in sc if not assigned[x]) for sc in state.scopes]


def _index(state, x) -> int:
    return state.var_index[x] if isinstance(x, str) else x


def alpha_wdeg(state, store: WeightStore, x, _future: Optional[list[int]] = None) -> int:
    """Sum of constraint weights over constraints on ``x`` with two or more future variables."""
    x = _index(state, x)
    future = _future if _future is not None else _future_counts(state)
    wc = store.wc
    return sum(wc[c] for c in state.cons_of[x] if future[c] >= 2)


def alpha_wdeg_var(state, store: WeightStore, x, _future: Optional[list[int]] = None) -> int:
    x = _index(state, x)
    return store.wv.get(x, 0) + alpha_wdeg(state, store, x, _future)


def select_variable(state, store: WeightStore, strategy: Strategy) -> int:
    """Unassigned variable (index) minimizing |dom| / alpha.

    Ratios are compared by integer cross-multiplication. alpha == 0 counts
    as an infinite ratio; if every candidate has alpha == 0 the smallest
    domain wins. Ties go to the earliest declared variable.
    """
    future = _future_counts(state)
    score = alpha_wdeg_var if strategy is Strategy.VAR else alpha_wdeg
    size = state.size
    best = -1
    best_dom = best_alpha = 0
    for x in range(state.n):
        if state.assigned[x]:
            continue
        d = size[x]
        a = score(state, store, x, future)
        if best < 0:
            best, best_dom, best_alpha = x, d, a
        elif a == 0:
            if best_alpha == 0 and d < best_dom:
                best, best_dom, best_alpha = x, d, a
        elif best_alpha == 0 or d * best_alpha < best_dom * a:
            best, best_dom, best_alpha = x, d, a
    if best < 0:
        raise ValueError("no unassigned variable left")
    return best

"""Backtrackable search state and GAC enforcement by simple tabular reduction.

Domains and tables are sparse sets over integer positions: the live part
of ``dom[x]`` is ``dom[x][:size[x]]`` and ``where[x][p]`` gives the slot of
value position ``p``. Removing swaps an element past the live boundary,
so restoring a saved size restores the set exactly. Every size change is
logged on the trail; ``push``/``pop`` bracket undo levels.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .model import Csp

_DOM, _TAB, _ASG = 0, 1, 2


class SearchState:
    def __init__(self, csp: Csp):
        self.csp = csp
        self.var_ids = [v.id for v in csp.variables]
        self.var_index = {x: i for i, x in enumerate(self.var_ids)}
        self.con_ids = [c.id for c in csp.constraints]
        self.con_index = {c: i for i, c in enumerate(self.con_ids)}
        self.n = len(self.var_ids)
        self.m = len(self.con_ids)

        self.values = [v.domain for v in csp.variables]
        self.pos_of = [{val: p for p, val in enumerate(v.domain)} for v in csp.variables]
        self.dom = [list(range(len(v.domain))) for v in csp.variables]
        self.where = [list(range(len(v.domain))) for v in csp.variables]
        self.size = [len(v.domain) for v in csp.variables]

        self.scopes = [tuple(self.var_index[x] for x in c.scope) for c in csp.constraints]
        self.tuples = [
            [tuple(self.pos_of[x][val] for x, val in zip(sc, t)) for t in c.relation]
            for sc, c in zip(self.scopes, csp.constraints)
        ]
        self.table = [list(range(len(ts))) for ts in self.tuples]
        self.tsize = [len(ts) for ts in self.tuples]

        self.cons_of: list[list[int]] = [[] for _ in range(self.n)]
        for c, sc in enumerate(self.scopes):
            for x in sc:
                self.cons_of[x].append(c)

        self.assigned = [False] * self.n
        self.n_assigned = 0
        self.trail: list[tuple[int, int, int]] = []
        self.marks: list[int] = []
        self._wiped = -1

    # -- trail -----------------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self.marks)

    def push(self) -> int:
        self.marks.append(len(self.trail))
        return len(self.marks)

    def pop(self) -> None:
        mark = self.marks.pop()
        trail = self.trail
        size, tsize, assigned = self.size, self.tsize, self.assigned
        while len(trail) > mark:
            kind, i, old = trail.pop()
            if kind == _DOM:
                size[i] = old
            elif kind == _TAB:
                tsize[i] = old
            else:
                assigned[i] = False
                self.n_assigned -= 1

    # -- domain access ---------------------------------------------------

    def is_live(self, x: int, p: int) -> bool:
        return self.where[x][p] < self.size[x]

    def live_positions(self, x: int) -> list[int]:
        """Live value positions of ``x`` in declared order."""
        return sorted(self.dom[x][: self.size[x]])

    def live_values(self, x: int) -> list[int]:
        vals = self.values[x]
        return [vals[p] for p in self.live_positions(x)]

    def live_tuples(self, c: int) -> list[tuple[int, ...]]:
        tuples = self.tuples[c]
        return [tuples[i] for i in self.table[c][: self.tsize[c]]]

    def remove(self, x: int, p: int) -> None:
        where, dom = self.where[x], self.dom[x]
        i = where[p]
        s = self.size[x] - 1
        q = dom[s]
        dom[i], dom[s] = q, p
        where[q], where[p] = i, s
        self.trail.append((_DOM, x, s + 1))
        self.size[x] = s

    def remove_tuple_at(self, c: int, i: int) -> None:
        tab = self.table[c]
        s = self.tsize[c] - 1
        tab[i], tab[s] = tab[s], tab[i]
        self.trail.append((_TAB, c, s + 1))
        self.tsize[c] = s

    def assign(self, x: int, p: int) -> None:
        """Fix ``x`` to value position ``p`` (must be live)."""
        where, dom = self.where[x], self.dom[x]
        i = where[p]
        q = dom[0]
        dom[0], dom[i] = p, q
        where[p], where[q] = 0, i
        if self.size[x] != 1:
            self.trail.append((_DOM, x, self.size[x]))
            self.size[x] = 1
        self.assigned[x] = True
        self.n_assigned += 1
        self.trail.append((_ASG, x, 0))

    def future_count(self, c: int) -> int:
        assigned = self.assigned
        return sum(1 for x in self.scopes[c] if not assigned[x])

    def snapshot(self):
        """Hashable picture of the live state (for equality checks)."""
        return (
            tuple(frozenset(self.dom[x][: self.size[x]]) for x in range(self.n)),
            tuple(frozenset(self.table[c][: self.tsize[c]]) for c in range(self.m)),
            tuple(self.assigned),
        )

    def domains(self) -> dict[str, list[int]]:
        return {self.var_ids[x]: self.live_values(x) for x in range(self.n)}

    def tables(self) -> dict[str, set[tuple[int, ...]]]:
        out = {}
        for c in range(self.m):
            sc = self.scopes[c]
            out[self.con_ids[c]] = {
                tuple(self.values[x][p] for x, p in zip(sc, t)) for t in self.live_tuples(c)
            }
        return out

    # -- simple tabular reduction ---------------------------------------

    def revise(self, c: int, removed: Optional[list] = None) -> Optional[list[int]]:
        """One STR pass over constraint ``c``.

        Returns the variables that lost values, or None on a domain wipeout
        (the emptied variable is left in ``self._wiped``).
        """
        scope = self.scopes[c]
        tab = self.table[c]
        tuples = self.tuples[c]
        ts = old_ts = self.tsize[c]
        size = self.size

        if len(scope) == 2:
            x0, x1 = scope
            w0, w1 = self.where[x0], self.where[x1]
            s0, s1 = size[x0], size[x1]
            sup0: set[int] = set()
            sup1: set[int] = set()
            i = 0
            while i < ts:
                t = tuples[tab[i]]
                a, b = t
                if w0[a] < s0 and w1[b] < s1:
                    sup0.add(a)
                    sup1.add(b)
                    i += 1
                else:
                    ts -= 1
                    tab[i], tab[ts] = tab[ts], tab[i]
            sups = (sup0, sup1)
        else:
            wheres = [self.where[x] for x in scope]
            sizes = [size[x] for x in scope]
            idx = range(len(scope))
            sups = tuple(set() for _ in scope)
            i = 0
            while i < ts:
                t = tuples[tab[i]]
                for j in idx:
                    if wheres[j][t[j]] >= sizes[j]:
                        ts -= 1
                        tab[i], tab[ts] = tab[ts], tab[i]
                        break
                else:
                    for j in idx:
                        sups[j].add(t[j])
                    i += 1

        if ts != old_ts:
            self.trail.append((_TAB, c, old_ts))
            self.tsize[c] = ts
        if ts == 0:
            self._wiped = scope[0]
            return None

        changed = []
        for x, sup in zip(scope, sups):
            if len(sup) < size[x]:
                dom = self.dom[x]
                for p in [p for p in dom[: size[x]] if p not in sup]:
                    self.remove(x, p)
                    if removed is not None:
                        removed.append((x, p))
                changed.append(x)
        return changed

    def propagate(self, seed: Iterable[int], removed: Optional[list] = None) -> Optional[tuple[int, int]]:
        """FIFO fixpoint of STR revisions starting from ``seed``.

        Returns None at fixpoint or ``(constraint, variable)`` for the first
        wipeout; the state is then left for the caller to restore.
        """
        inq = bytearray(self.m)
        queue = deque()
        for c in seed:
            if not inq[c]:
                inq[c] = 1
                queue.append(c)
        cons_of = self.cons_of
        while queue:
            c = queue.popleft()
            inq[c] = 0
            changed = self.revise(c, removed)
            if changed is None:
                return c, self._wiped
            for x in changed:
                for c2 in cons_of[x]:
                    if c2 != c and not inq[c2]:
                        inq[c2] = 1
                        queue.append(c2)
        return None


# -- named, public API --------------------------------------------------


@dataclass
class Fixpoint:
    removals: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class Wipeout:
    constraint: Optional[str]
    variable: Optional[str] = None


GacOutcome = Union[Fixpoint, Wipeout]


@dataclass
class Revision:
    removals: dict[str, list[int]]
    wipeout: Optional[str] = None


def revise_str(state: SearchState, c: str) -> Revision:
    """Run one STR revision of constraint ``c`` by name."""
    removed: list[tuple[int, int]] = []
    changed = state.revise(state.con_index[c], removed)
    out: dict[str, list[int]] = {}
    for x, p in removed:
        out.setdefault(state.var_ids[x], []).append(state.values[x][p])
    for vals in out.values():
        vals.sort()
    if changed is None:
        return Revision(out, state.var_ids[state._wiped])
    return Revision(out)


def enforce_gac(state: SearchState, seed: Optional[Iterable[str]] = None) -> GacOutcome:
    """Enforce GAC; ``seed`` defaults to every constraint."""
    if seed is None:
        idx = range(state.m)
    else:
        idx = [state.con_index[c] for c in seed]
    removed: list[tuple[int, int]] = []
    res = state.propagate(idx, removed)
    if res is not None:
        c, x = res
        return Wipeout(state.con_ids[c], state.var_ids[x])
    return Fixpoint([(state.var_ids[x], state.values[x][p]) for x, p in removed])

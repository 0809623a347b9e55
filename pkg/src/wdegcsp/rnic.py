"""Relational neighborhood inverse consistency over the dual graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .gac import Fixpoint, SearchState, Wipeout
from .model import Csp
from .weighting import EventSink, RelationWipeout, null_sink


@dataclass(frozen=True)
class DualGraph:
    vertices: tuple[str, ...]
    adjacency: dict

    def edges(self) -> set[frozenset]:
        return {frozenset((a, b)) for a, nbrs in self.adjacency.items() for b in nbrs}


def _adjacency(scopes: Sequence[Sequence]) -> list[list[int]]:
    cons_of: dict = {}
    for c, sc in enumerate(scopes):
        for x in sc:
            cons_of.setdefault(x, []).append(c)
    adj = []
    for c, sc in enumerate(scopes):
        nbrs = {o for x in sc for o in cons_of[x] if o != c}
        adj.append(sorted(nbrs))
    return adj


def build_dual_graph(csp: Csp) -> DualGraph:
    ids = tuple(c.id for c in csp.constraints)
    adj = _adjacency([c.scope for c in csp.constraints])
    return DualGraph(ids, {ids[c]: tuple(ids[o] for o in nbrs) for c, nbrs in enumerate(adj)})


class RnicEngine:
    """Holds the static dual graph and shared-variable maps for one state."""

    def __init__(self, state: SearchState):
        self.state = state
        self.adj = _adjacency(state.scopes)
        self._links: dict = {}
        self._plans: dict = {}

    def links(self, a: int, b: int) -> list[tuple[int, int]]:
        """Pairs (i, j) with scope(a)[i] == scope(b)[j]."""
        key = (a, b)
        got = self._links.get(key)
        if got is None:
            sb = self.state.scopes[b]
            got = [(i, sb.index(x)) for i, x in enumerate(self.state.scopes[a]) if x in sb]
            self._links[key] = got
        return got

    def _plan(self, r: int, nbrs: tuple) -> tuple[list, list]:
        """Head links and the neighbor-neighbor links left once tau is fixed.

        Variables in the head's scope are already pinned by tau, so only
        variables outside it can make two neighbors disagree.
        """
        key = (r, nbrs)
        plan = self._plans.get(key)
        if plan is None:
            head_vars = set(self.state.scopes[r])
            scopes = self.state.scopes
            head = [self.links(r, n) for n in nbrs]
            later = []
            for i, a in enumerate(nbrs):
                deps = []
                for j in range(i + 1, len(nbrs)):
                    lk = [(p, q) for p, q in self.links(a, nbrs[j]) if scopes[a][p] not in head_vars]
                    if lk:
                        deps.append((j, lk))
                later.append(deps)
            plan = (head, later)
            self._plans[key] = plan
        return plan

    def has_support(self, r: int, tau: tuple, nbrs: Sequence[int], live: Optional[list] = None) -> bool:
        """Depth-first search for one live tuple per neighbor agreeing pairwise.

        Candidate lists are filtered against every chosen tuple (forward
        checking); a branch dies as soon as any remaining list empties.
        """
        nbrs = tuple(nbrs)
        if live is None:
            live = [self.state.live_tuples(n) for n in nbrs]
        head, later = self._plan(r, nbrs)
        cands = []
        for lk, rows in zip(head, live):
            if len(lk) == 1:
                (i, j), = lk
                v = tau[i]
                rows = [t for t in rows if t[j] == v]
            elif lk:
                rows = [t for t in rows if all(t[j] == tau[i] for i, j in lk)]
            if not rows:
                return False
            cands.append(rows)
        return self._dfs(0, cands, later)

    def _dfs(self, i: int, cands: list, later: list) -> bool:
        k = len(cands)
        while i < k and not later[i]:
            i += 1
        if i == k:
            return True
        deps = later[i]
        for t in cands[i]:
            saved = []
            ok = True
            for j, lk in deps:
                filtered = [u for u in cands[j] if all(u[b] == t[a] for a, b in lk)]
                saved.append((j, cands[j]))
                cands[j] = filtered
                if not filtered:
                    ok = False
                    break
            if ok and self._dfs(i + 1, cands, later):
                for j, old in saved:
                    cands[j] = old
                return True
            for j, old in saved:
                cands[j] = old
        return False

    def neighborhood(self, r: int) -> list[int]:
        tsize = self.state.tsize
        return [n for n in self.adj[r] if tsize[n] > 0]

    def run(self, sink: EventSink = null_sink, check: Optional[Callable[[], None]] = None) -> int:
        """RNIC fixpoint on a GAC state. Returns -1 or the emptied constraint."""
        state = self.state
        tuples, table, tsize = state.tuples, state.table, state.tsize
        is_head = [state.future_count(c) >= 2 for c in range(state.m)]
        inq = bytearray(state.m)
        queue = deque()
        for c in range(state.m):
            if is_head[c]:
                inq[c] = 1
                queue.append(c)

        while queue:
            r = queue.popleft()
            inq[r] = 0
            if check is not None:
                check()
            nbrs = self.neighborhood(r)
            live = [state.live_tuples(n) for n in nbrs]
            tab, rows = table[r], tuples[r]
            i = 0
            removed_any = False
            while i < tsize[r]:
                if self.has_support(r, rows[tab[i]], nbrs, live):
                    i += 1
                else:
                    state.remove_tuple_at(r, i)
                    removed_any = True
            if tsize[r] == 0:
                sink(RelationWipeout(r, tuple(nbrs)))
                return r
            if not removed_any:
                continue
            before = list(tsize)
            # domain resynchronization; no GacWipeout event from here
            res = state.propagate([r])
            if res is not None:
                c = res[0]
                sink(RelationWipeout(c, tuple(self.neighborhood(c))))
                return c
            touched = [c for c in range(state.m) if tsize[c] != before[c]]
            touched.append(r)
            for c in touched:
                for n in self.adj[c]:
                    if is_head[n] and not inq[n]:
                        inq[n] = 1
                        queue.append(n)
        return -1


def tuple_has_support(state: SearchState, r: str, tau: Sequence[int], neighborhood: Iterable[str]) -> bool:
    """Named wrapper: ``tau`` holds values (not positions) of ``r``'s scope."""
    ri = state.con_index[r]
    pos = tuple(state.pos_of[x][v] for x, v in zip(state.scopes[ri], tau))
    nbrs = sorted(state.con_index[n] for n in neighborhood)
    return RnicEngine(state).has_support(ri, pos, nbrs)


def enforce_rnic(state: SearchState, sink: EventSink = null_sink) -> Union[Fixpoint, Wipeout]:
    c = RnicEngine(state).run(sink)
    if c >= 0:
        return Wipeout(state.con_ids[c])
    return Fixpoint()

"""Brute-force reference implementations.

Nothing here touches the engines: every closure is recomputed from the
literal definitions over plain Python sets. Use only on small instances.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional

from .model import Csp

DEFAULT_CAP = 10**7


class OracleScopeError(ValueError):
    """Instance too large for exhaustive treatment."""


@dataclass
class Closure:
    domains: dict
    tables: dict = field(default_factory=dict)

    @property
    def wiped(self) -> bool:
        return any(not d for d in self.domains.values())


def _check_cap(csp: Csp, cap: int) -> None:
    if csp.search_space_size() > cap:
        raise OracleScopeError(f"search space {csp.search_space_size()} exceeds cap {cap}")


def brute_force_solve(csp: Csp, cap: int = DEFAULT_CAP) -> Optional[dict]:
    """First solution in lexicographic order (declared variable and value order), or None."""
    _check_cap(csp, cap)
    ids = csp.variable_ids
    rels = [(tuple(ids.index(x) for x in c.scope), set(c.relation)) for c in csp.constraints]
    for combo in itertools.product(*(v.domain for v in csp.variables)):
        if all(tuple(combo[i] for i in sc) in rel for sc, rel in rels):
            return dict(zip(ids, combo))
    return None


def _gac(csp: Csp, doms: dict, order: Optional[random.Random] = None) -> dict:
    """Fixpoint of 'delete any value without a support tuple'. Empties everything on wipeout."""
    doms = {x: set(d) for x, d in doms.items()}
    cons = list(csp.constraints)
    while True:
        if order is not None:
            order.shuffle(cons)
        changed = False
        for con in cons:
            for i, x in enumerate(con.scope):
                supported = {
                    t[i]
                    for t in con.relation
                    if all(t[j] in doms[y] for j, y in enumerate(con.scope))
                }
                if doms[x] - supported:
                    doms[x] &= supported
                    changed = True
        if any(not d for d in doms.values()):
            return {x: set() for x in doms}
        if not changed:
            return doms


def _initial(csp: Csp) -> dict:
    return {v.id: set(v.domain) for v in csp.variables}


def _sac(csp: Csp, doms: dict, rng: Optional[random.Random]) -> dict:
    while True:
        doms = _gac(csp, doms, rng)
        if any(not d for d in doms.values()):
            return doms
        doomed = []
        for x in doms:
            for v in doms[x]:
                trial = dict(doms)
                trial[x] = {v}
                if any(not d for d in _gac(csp, trial).values()):
                    doomed.append((x, v))
        if not doomed:
            return doms
        if rng is not None:
            rng.shuffle(doomed)
        doms = {x: set(d) for x, d in doms.items()}
        for x, v in doomed:
            doms[x].discard(v)


def _poac(csp: Csp, doms: dict, rng: Optional[random.Random]) -> dict:
    """Delete (xi, vi) unless SAC and, for every xj, some vj keeps it after GAC."""
    while True:
        doms = _gac(csp, doms, rng)
        if any(not d for d in doms.values()):
            return doms
        after = {}
        for xj in doms:
            for vj in doms[xj]:
                trial = dict(doms)
                trial[xj] = {vj}
                after[xj, vj] = _gac(csp, trial)
        doomed = []
        for xi in doms:
            for vi in doms[xi]:
                if not after[xi, vi][xi]:
                    doomed.append((xi, vi))
                    continue
                for xj in doms:
                    if xj != xi and not any(vi in after[xj, vj][xi] for vj in doms[xj]):
                        doomed.append((xi, vi))
                        break
        if not doomed:
            return doms
        doms = {x: set(d) for x, d in doms.items()}
        for x, v in doomed:
            doms[x].discard(v)


def _rnic(csp: Csp, rng: Optional[random.Random]) -> Closure:
    """Greatest state where tables and domains agree, domains are GAC, and
    every tuple of a relation with two or more variables extends to an
    assignment of its dual-graph neighborhood satisfying every relation there."""
    doms = _initial(csp)
    tabs = {c.id: set(c.relation) for c in csp.constraints}
    by_id = {c.id: c for c in csp.constraints}
    nbrs = {
        c.id: [o.id for o in csp.constraints if o.id != c.id and set(o.scope) & set(c.scope)]
        for c in csp.constraints
    }
    ids = [c.id for c in csp.constraints]
    while True:
        if rng is not None:
            rng.shuffle(ids)
        changed = False
        for cid in ids:
            con = by_id[cid]
            keep = {t for t in tabs[cid] if all(v in doms[x] for x, v in zip(con.scope, t))}
            if keep != tabs[cid]:
                tabs[cid] = keep
                changed = True
            for i, x in enumerate(con.scope):
                sup = {t[i] for t in keep}
                if doms[x] - sup:
                    doms[x] &= sup
                    changed = True
        if any(not d for d in doms.values()) or any(not t for t in tabs.values()):
            return Closure({x: set() for x in doms}, {c: set() for c in tabs})
        for cid in ids:
            con = by_id[cid]
            if len(con.scope) < 2:
                continue
            group = [by_id[cid]] + [by_id[o] for o in nbrs[cid]]
            vars_ = sorted({x for g in group for x in g.scope})
            extendable = set()
            for combo in itertools.product(*(sorted(doms[x]) for x in vars_)):
                a = dict(zip(vars_, combo))
                if all(tuple(a[x] for x in g.scope) in tabs[g.id] for g in group):
                    extendable.add(tuple(a[x] for x in con.scope))
            keep = tabs[cid] & extendable
            if keep != tabs[cid]:
                tabs[cid] = keep
                changed = True
        if not changed:
            return Closure(doms, tabs)


def closure_oracle(csp: Csp, prop: str, cap: int = DEFAULT_CAP, seed: Optional[int] = None) -> Closure:
    """Closure of ``csp`` under ``prop`` in {"gac", "sac", "poac", "rnic"}.

    ``seed`` shuffles scan orders; the result must not depend on it. On a
    wipeout every domain (and table) comes back empty.
    """
    _check_cap(csp, cap)
    rng = random.Random(seed) if seed is not None else None
    if prop == "gac":
        return Closure(_gac(csp, _initial(csp), rng))
    if prop == "sac":
        return Closure(_sac(csp, _initial(csp), rng))
    if prop == "poac":
        return Closure(_poac(csp, _initial(csp), rng))
    if prop == "rnic":
        return _rnic(csp, rng)
    raise ValueError(f"unknown property {prop!r}")

"""Wilcoxon signed-rank analysis of right-censored paired CPU times."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

EXACT_MAX_N = 25


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing the mean rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


def signed_rank_sums(diffs: Sequence[float]) -> tuple[float, float, list[float]]:
    ranks = average_ranks([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    return w_plus, w_minus, ranks


def exact_lower_tail(ranks: Sequence[float], w: float) -> float:
    """P(W <= w) when each rank independently carries a + or - sign.

    Ranks are doubled so tied (half-integer) ranks stay integral; the null
    distribution is built by counting subset sums.
    """
    doubled = [int(round(2 * r)) for r in ranks]
    counts = {0: 1}
    for r in doubled:
        nxt = dict(counts)
        for s, k in counts.items():
            nxt[s + r] = nxt.get(s + r, 0) + k
        counts = nxt
    target = 2 * w + 1e-9
    hits = sum(k for s, k in counts.items() if s <= target)
    return hits / 2 ** len(doubled)


def normal_lower_tail(ranks: Sequence[float], w: float) -> float:
    """Normal approximation of P(W <= w), tie-corrected, with continuity correction."""
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    tie_term = 0.0
    for r in set(ranks):
        t = ranks.count(r)
        tie_term += t**3 - t
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    if var <= 0:
        return 1.0
    z = (w - mean + 0.5) / math.sqrt(var)
    return min(1.0, max(0.0, 0.5 * math.erfc(-z / math.sqrt(2.0))))


@dataclass
class PairedRun:
    """One instance under two configurations; CPU times in seconds.

    ``rerun_a``/``rerun_b`` hold the doubled-limit result for a side that
    timed out at the original limit (its completion time, or the doubled
    limit if it timed out again).
    """

    cpu_a: float
    cpu_b: float
    done_a: bool
    done_b: bool
    instance: str = ""
    rerun_a: Optional[float] = None
    rerun_b: Optional[float] = None


@dataclass
class WilcoxonReport:
    n: int
    discarded_zero: int
    discarded_subclock: int
    excluded_both_timeout: int
    w_plus: float
    w_minus: float
    p: Optional[float]
    verdict: Optional[str]
    method: str = "exact"
    no_evidence: bool = False
    needs_rerun: list = field(default_factory=list)

    def format(self, a: str = "A", b: str = "B") -> str:
        if self.needs_rerun:
            return f"aborted: {len(self.needs_rerun)} censored pair(s) need a doubled-limit rerun: " + ", ".join(
                map(str, self.needs_rerun)
            )
        verdict = {"A>B": f"{a} > {b}", "B>A": f"{b} > {a}"}.get(self.verdict, f"{a} ≡ {b}")
        lines = [
            f"pairs used: {self.n} (discarded: {self.discarded_zero} zero, "
            f"{self.discarded_subclock} below clock floor, {self.excluded_both_timeout} both censored)",
            f"W+ = {self.w_plus:g}  W- = {self.w_minus:g}  one-tailed p = {self.p:.6g} ({self.method})",
            f"verdict: {verdict}" + ("  [no evidence]" if self.no_evidence else ""),
        ]
        return "\n".join(lines)


def _coerce(pair) -> PairedRun:
    if isinstance(pair, PairedRun):
        return pair
    cpu_a, cpu_b, st_a, st_b = pair[:4]
    done = lambda s: s if isinstance(s, bool) else s in ("sat", "unsat")
    return PairedRun(float(cpu_a), float(cpu_b), done(st_a), done(st_b))


def wilcoxon_censored(
    pairs: Iterable,
    alpha: float = 0.05,
    clock_floor: float = 1.0,
) -> WilcoxonReport:
    """Paired comparison of A against B on right-censored CPU times.

    Both-censored pairs are dropped; a singly-censored pair needs the
    doubled-limit rerun for its censored side, otherwise the test aborts
    with that instance listed in ``needs_rerun``. Differences of zero or
    below ``clock_floor`` seconds are discarded. Verdict ``"A>B"`` means A
    is significantly faster.
    """
    diffs = []
    both = zero = sub = 0
    needs = []
    for raw in pairs:
        pr = _coerce(raw)
        if not pr.done_a and not pr.done_b:
            both += 1
            continue
        a, b = pr.cpu_a, pr.cpu_b
        if not pr.done_a:
            if pr.rerun_a is None:
                needs.append(pr.instance)
                continue
            a = pr.rerun_a
        if not pr.done_b:
            if pr.rerun_b is None:
                needs.append(pr.instance)
                continue
            b = pr.rerun_b
        d = a - b
        if d == 0:
            zero += 1
        elif abs(d) < clock_floor:
            sub += 1
        else:
            diffs.append(d)

    if needs:
        return WilcoxonReport(0, zero, sub, both, 0.0, 0.0, None, None, needs_rerun=needs)

    n = len(diffs)
    if n == 0:
        return WilcoxonReport(0, zero, sub, both, 0.0, 0.0, 1.0, "equivalent", no_evidence=True)

    w_plus, w_minus, ranks = signed_rank_sums(diffs)
    w = min(w_plus, w_minus)
    if n <= EXACT_MAX_N:
        p, method = exact_lower_tail(ranks, w), "exact"
    else:
        p, method = normal_lower_tail(ranks, w), "normal"
    if p < alpha:
        # positive differences mean A took longer
        verdict = "B>A" if w_plus > w_minus else "A>B"
    else:
        verdict = "equivalent"
    return WilcoxonReport(n, zero, sub, both, w_plus, w_minus, p, verdict, method)


@dataclass
class Ranking:
    labels: list
    better: dict
    chain: Optional[str]
    warning: Optional[str] = None

    def matrix(self) -> str:
        width = max(len(l) for l in self.labels) + 2
        head = " " * width + "".join(l.rjust(width) for l in self.labels)
        rows = [head]
        for a in self.labels:
            cells = []
            for b in self.labels:
                if a == b:
                    cells.append("·")
                elif self.better[a, b]:
                    cells.append(">")
                elif self.better[b, a]:
                    cells.append("<")
                else:
                    cells.append("≡")
            rows.append(a.ljust(width) + "".join(c.rjust(width) for c in cells))
        return "\n".join(rows)

    def render(self) -> str:
        return self.chain if self.chain is not None else self.matrix()


def rank_chain(labels: Sequence[str], better: dict) -> Ranking:
    """Turn a pairwise 'significantly better' relation into a chain.

    ``better[a, b]`` is True when a beats b. The chain ``X > Y ≡ Z`` is
    only emitted when groups are totally ordered: every member beats every
    member of each later group and members of a group are pairwise
    equivalent. Otherwise the caller gets the pairwise matrix.
    """
    labels = sorted(labels)
    wins = {a: sum(better[a, b] for b in labels if b != a) for a in labels}
    losses = {a: sum(better[b, a] for b in labels if b != a) for a in labels}
    order = sorted(labels, key=lambda a: (-wins[a], losses[a], a))

    def tied(a, b):
        return not better[a, b] and not better[b, a]

    groups: list[list[str]] = []
    for a in order:
        if groups and all(tied(a, g) for g in groups[-1]):
            groups[-1].append(a)
        else:
            groups.append([a])
    ok = all(
        better[a, b]
        for i, g in enumerate(groups)
        for h in groups[i + 1 :]
        for a in g
        for b in h
    )
    if not ok:
        msg = "significance pattern is not a chain; showing pairwise matrix"
        warnings.warn(msg)
        return Ranking(labels, better, None, msg)
    chain = " > ".join(" ≡ ".join(g) for g in groups)
    return Ranking(labels, better, chain)

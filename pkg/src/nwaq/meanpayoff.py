"""Threshold emptiness and exact infimum for limit-average graphs with silent
edges, by strongly-connected-component restricted cycle-ratio analysis.

A qualifying cycle is reachable from an initial node, lies in a component
containing an accepting node, and contains at least one tick (non-silent)
edge; its ratio is cost divided by ticks. Thresholds are decided exactly by
negative-cycle detection on shifted integer weights q*cost - p*ticks; the
non-strict variant orders weights lexicographically with the tick count so a
zero-shift cycle qualifies only when it ticks. Silent edges carry cost 0, so
cost is bounded by max|cost| per tick and every minimum is attained on a
simple cycle with denominator at most the node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import NEG_INFINITY, PLUS_INFINITY, Threshold, ValueResult


@dataclass(frozen=True)
class RatioGraph:
    """Directed graph with integer edge costs and 0/1 ticks; silent = tick 0."""

    n_nodes: int
    edges: tuple[tuple[int, int, int, int], ...]  # (from, to, cost, ticks)
    initials: frozenset[int]
    accepting: frozenset[int]

    def __post_init__(self):
        for u, v, cost, ticks in self.edges:
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError(f"edge ({u},{v}) endpoint out of range")
            if ticks not in (0, 1):
                raise ValueError("ticks must be 0 or 1")
            if ticks == 0 and cost != 0:
                raise ValueError("silent edges carry no cost")


@dataclass(frozen=True)
class CycleWitness:
    """A qualifying cycle with an access path from an initial node."""

    access: tuple[int, ...]  # edge indexes
    cycle: tuple[int, ...]  # edge indexes
    ratio: Fraction


def _reachable(g: RatioGraph) -> set[int]:
    adj: dict[int, list[int]] = {}
    for u, v, _, _ in g.edges:
        adj.setdefault(u, []).append(v)
    seen = set(g.initials)
    todo = list(g.initials)
    while todo:
        u = todo.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def _sccs(n: int, edge_list) -> list[int]:
    """Component id per node, Kosaraju, deterministic."""
    fwd: dict[int, list[int]] = {}
    rev: dict[int, list[int]] = {}
    for u, v in edge_list:
        fwd.setdefault(u, []).append(v)
        rev.setdefault(v, []).append(u)
    finish = []
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        stack = [(root, iter(sorted(set(fwd.get(root, [])))))]
        seen[root] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(sorted(set(fwd.get(nxt, []))))))
                    advanced = True
                    break
            if not advanced:
                finish.append(node)
                stack.pop()
    comp = [-1] * n
    n_comp = 0
    for root in reversed(finish):
        if comp[root] != -1:
            continue
        stack = [root]
        comp[root] = n_comp
        while stack:
            node = stack.pop()
            for nxt in rev.get(node, ()):
                if comp[nxt] == -1:
                    comp[nxt] = n_comp
                    stack.append(nxt)
        n_comp += 1
    return comp


def _qualifying_sccs(g: RatioGraph):
    """Per-component internal edge indexes, for components that are reachable,
    contain an accepting node, and contain a tick edge."""
    reach = _reachable(g)
    idx_edges = [(u, v) for u, v, _, _ in g.edges]
    comp = _sccs(g.n_nodes, idx_edges)
    internal: dict[int, list[int]] = {}
    for n, (u, v, cost, ticks) in enumerate(g.edges):
        if u in reach and v in reach and comp[u] == comp[v]:
            internal.setdefault(comp[u], []).append(n)
    out = []
    for ci in sorted(internal):
        members = {u for u in range(g.n_nodes) if comp[u] == ci}
        if not (members & g.accepting & reach):
            continue
        if not any(g.edges[n][3] for n in internal[ci]):
            continue
        out.append(internal[ci])
    return out


def _lex_negative_cycle(g: RatioGraph, edge_idxs: list[int], p: int, q: int, strict: bool):
    """Cycle with shifted weight < 0, or, non-strict, <= 0 with a tick.

    Bellman-Ford over pairs (q*cost - p*ticks, -ticks) compared
    lexicographically; silent cycles weigh (0, 0) and never qualify.
    """
    nodes = sorted({g.edges[n][0] for n in edge_idxs} | {g.edges[n][1] for n in edge_idxs})
    pos = {u: i for i, u in enumerate(nodes)}
    zero = (0, 0)

    def wt(n: int):
        u, v, cost, ticks = g.edges[n]
        first = q * cost - p * ticks
        return (first, -ticks) if not strict else (first, 0)

    dist = [zero] * len(nodes)
    pred: list[Optional[int]] = [None] * len(nodes)
    marked = None
    for _ in range(len(nodes)):
        marked = None
        for n in edge_idxs:
            u, v, _, _ = g.edges[n]
            w = wt(n)
            cand = (dist[pos[u]][0] + w[0], dist[pos[u]][1] + w[1])
            if cand < dist[pos[v]]:
                dist[pos[v]] = cand
                pred[pos[v]] = n
                marked = pos[v]
        if marked is None:
            return None
    at = marked
    for _ in range(len(nodes)):
        at = pos[g.edges[pred[at]][0]]
    cycle = []
    start = at
    while True:
        n = pred[at]
        cycle.append(n)
        at = pos[g.edges[n][0]]
        if at == start:
            break
    cycle.reverse()
    total_w = sum(q * g.edges[n][2] - p * g.edges[n][3] for n in cycle)
    total_t = sum(g.edges[n][3] for n in cycle)
    if strict:
        assert total_w < 0, "extracted cycle must be negative"
    else:
        assert total_w < 0 or (total_w == 0 and total_t > 0), "extracted cycle must be lex-negative"
    return cycle


def threshold_emptiness(g: RatioGraph, t: Threshold) -> tuple[bool, Optional[CycleWitness]]:
    """Is there a qualifying cycle with ratio <= (or <, when strict) the threshold?"""
    p, q = t.value.numerator, t.value.denominator
    for edge_idxs in _qualifying_sccs(g):
        cycle = _lex_negative_cycle(g, edge_idxs, p, q, t.strict)
        if cycle is None:
            continue
        ticks = sum(g.edges[n][3] for n in cycle)
        if ticks == 0:
            continue  # cannot happen: silent cycles weigh zero
        cost = sum(g.edges[n][2] for n in cycle)
        access = _access_path(g, g.edges[cycle[0]][0])
        return True, CycleWitness(access=tuple(access), cycle=tuple(cycle), ratio=Fraction(cost, ticks))
    return False, None


def _access_path(g: RatioGraph, target: int) -> list[int]:
    parent: dict[int, Optional[int]] = {u: None for u in sorted(g.initials)}
    if target in parent:
        return []
    adj: dict[int, list[int]] = {}
    for n, (u, v, _, _) in enumerate(g.edges):
        adj.setdefault(u, []).append(n)
    queue = sorted(g.initials)
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for n in adj.get(u, ()):
            v = g.edges[n][1]
            if v not in parent:
                parent[v] = n
                if v == target:
                    path = []
                    while parent[v] is not None:
                        path.append(parent[v])
                        v = g.edges[parent[v]][0]
                    path.reverse()
                    return path
                queue.append(v)
    raise ValueError("cycle start unreachable")


def infimum_ratio(g: RatioGraph) -> tuple[ValueResult, Optional[CycleWitness]]:
    """Exact minimum ratio over qualifying cycles, found by threshold probes.

    Candidate values have denominators bounded by the node count, so after an
    integer binary search the exact answer is the least Farey candidate the
    non-strict threshold check admits. +inf when no cycle qualifies; the -inf
    guard probes once below the least possible ratio and cannot fire on a
    well-formed graph.
    """
    maxabs = max((abs(c) for _, _, c, _ in g.edges), default=0)
    hi = Fraction(maxabs)
    probe_hit: dict[Fraction, tuple[bool, Optional[CycleWitness]]] = {}

    def probe(x: Fraction) -> bool:
        if x not in probe_hit:
            probe_hit[x] = threshold_emptiness(g, Threshold(x, strict=False))
        return probe_hit[x][0]

    if not probe(hi):
        return PLUS_INFINITY, None
    if probe(Fraction(-maxabs - 1)):
        return NEG_INFINITY, None
    lo_i, hi_i = -maxabs - 1, maxabs
    while hi_i - lo_i > 1:
        mid = (hi_i + lo_i) // 2
        if probe(Fraction(mid)):
            hi_i = mid
        else:
            lo_i = mid
    # least candidate c/t in (hi_i - 1, hi_i] with t <= n_nodes
    best = Fraction(hi_i)
    candidates = sorted(
        {
            Fraction(c, t)
            for t in range(1, g.n_nodes + 1)
            for c in range(t * (hi_i - 1) + 1, t * hi_i + 1)
        }
    )
    lo_c, hi_c = -1, len(candidates) - 1  # candidates[hi_c] == hi_i, known true
    while hi_c - lo_c > 1:
        mid = (hi_c + lo_c) // 2
        if probe(candidates[mid]):
            hi_c = mid
        else:
            lo_c = mid
    best = candidates[hi_c]
    return ValueResult.finite(best), probe_hit[best][1]

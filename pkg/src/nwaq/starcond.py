"""The negative-descent test: is the infimum over all words minus infinity?

The decision works on the reachable configuration graph. The infimum is
unbounded below iff some strongly connected component that can reach (and be
reached from) a configuration with an accepting master state contains a cycle
along which, for some j, the j least recently invoked slaves never terminate
and their summed step weights are negative. Pumping such a cycle drives the
partial averages of the returned-value sequence arbitrarily low.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .core import Configuration, LassoWord, Nwa, NondeterministicInputError, PreconditionError, is_deterministic
from .determinize import ConfigEdge, config_initials, explore
from .width import has_width


@dataclass(frozen=True)
class StarWitness:
    """A reachable negative cycle over the j least recently invoked slaves.

    The cycle never terminates a slot at position <= j, so slot identity is
    stable along it; j_sum is the (negative) total of those slots' weights
    over one turn. The anchor lies in a component containing a configuration
    whose master state is accepting.
    """

    j: int
    cycle: tuple[ConfigEdge, ...]
    anchor: Configuration
    j_sum: int

    def recompute_sum(self) -> int:
        return sum(sum(e.slot_weights[: self.j]) for e in self.cycle)


def check_star_condition(nwa: Nwa, k: int) -> Optional[StarWitness]:
    """First witness in deterministic order (ascending j, then component order),
    or None when every such cycle test is empty or no slave weight is negative."""
    ok, site = is_deterministic(nwa)
    if not ok:
        raise NondeterministicInputError(site or "input is not deterministic")
    okw, _ = has_width(nwa, k)
    if not okw:
        raise PreconditionError(f"input exceeds width {k}")
    if nwa.min_effective_weight() >= 0:
        return None

    configs, edges = explore(nwa, k)
    edges = [e for e in edges if not e.width_overflow]
    comp_of, comps = _sccs(configs, edges)
    accepting_comps = []
    for ci, members in enumerate(comps):
        if any(c.master_state in nwa.master.accepting for c in members):
            accepting_comps.append(ci)

    edges_by_comp: dict[int, list[ConfigEdge]] = {}
    for e in edges:
        ci = comp_of[e.from_config]
        if comp_of.get(e.to_config) == ci:
            edges_by_comp.setdefault(ci, []).append(e)

    for j in range(1, k + 1):
        for ci in accepting_comps:
            sub = [
                e
                for e in edges_by_comp.get(ci, [])
                if len(e.from_config.slots) >= j and all(pos > j for pos in e.returned)
            ]
            cycle = _negative_cycle(sub, j)
            if cycle is not None:
                total = sum(sum(e.slot_weights[:j]) for e in cycle)
                return StarWitness(j=j, cycle=tuple(cycle), anchor=cycle[0].from_config, j_sum=total)
    return None


def _sccs(configs, edges):
    """Kosaraju components in deterministic discovery order."""
    order_key = {c: (c.master_state, c.slots) for c in configs}
    nodes = sorted(configs, key=order_key.get)
    fwd: dict[Configuration, list[Configuration]] = {c: [] for c in nodes}
    rev: dict[Configuration, list[Configuration]] = {c: [] for c in nodes}
    for e in edges:
        if e.to_config in fwd:
            fwd[e.from_config].append(e.to_config)
            rev[e.to_config].append(e.from_config)
    for adj in (fwd, rev):
        for c in adj:
            adj[c] = sorted(set(adj[c]), key=order_key.get)
    finish: list[Configuration] = []
    seen: set[Configuration] = set()
    for root in nodes:
        if root in seen:
            continue
        stack = [(root, iter(fwd[root]))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(fwd[nxt])))
                    advanced = True
                    break
            if not advanced:
                finish.append(node)
                stack.pop()
    comp_of: dict[Configuration, int] = {}
    comps: list[list[Configuration]] = []
    for root in reversed(finish):
        if root in comp_of:
            continue
        ci = len(comps)
        members = []
        stack = [root]
        comp_of[root] = ci
        while stack:
            node = stack.pop()
            members.append(node)
            for nxt in rev[node]:
                if nxt not in comp_of:
                    comp_of[nxt] = ci
                    stack.append(nxt)
        comps.append(sorted(members, key=order_key.get))
    return comp_of, comps


def _negative_cycle(edges: list[ConfigEdge], j: int) -> Optional[list[ConfigEdge]]:
    """Bellman-Ford negative-cycle extraction over the j-prefix slot weights."""
    if not edges:
        return None
    nodes = sorted({e.from_config for e in edges} | {e.to_config for e in edges},
                   key=lambda c: (c.master_state, c.slots))
    idx = {c: i for i, c in enumerate(nodes)}
    order = sorted(
        edges,
        key=lambda e: (idx[e.from_config], e.letter, idx[e.to_config], e.slot_weights, e.returned),
    )
    dist = [0] * len(nodes)
    pred: list[Optional[ConfigEdge]] = [None] * len(nodes)
    marked = None
    for _ in range(len(nodes)):
        marked = None
        for e in order:
            w = sum(e.slot_weights[:j])
            u, v = idx[e.from_config], idx[e.to_config]
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = e
                marked = v
        if marked is None:
            return None
    # walk predecessors n steps to land inside a negative cycle
    v = marked
    for _ in range(len(nodes)):
        v = idx[pred[v].from_config]
    cycle = []
    start = v
    while True:
        e = pred[v]
        cycle.append(e)
        v = idx[e.from_config]
        if v == start:
            break
    cycle.reverse()
    assert sum(sum(e.slot_weights[:j]) for e in cycle) < 0
    return cycle


def pump_witness(nwa: Nwa, witness: StarWitness, k: int, pumps: int) -> LassoWord:
    """Lasso (path to the cycle, cycle^pumps . closing path through acceptance).

    The closing path runs from the cycle anchor through a configuration with
    an accepting master state and back to the anchor, inside the witness
    component, so the pumped word is accepted whenever the automaton can keep
    terminating the pumped slaves (the witness construction guarantees it).
    """
    letters = nwa.alphabet.letters
    configs, edges = explore(nwa, k)
    edges = [e for e in edges if not e.width_overflow]
    anchor = witness.anchor

    access = _shortest_path(edges, sorted(config_initials(nwa), key=lambda c: (c.master_state, c.slots)), {anchor})
    if access is None:
        raise PreconditionError("witness anchor unreachable")
    comp_of, comps = _sccs(configs, edges)
    comp = comp_of[anchor]
    inside = [e for e in edges if comp_of.get(e.from_config) == comp and comp_of.get(e.to_config) == comp]
    acc_configs = {c for c in comps[comp] if c.master_state in nwa.master.accepting}
    if anchor in acc_configs:
        closing: list[ConfigEdge] = []
    else:
        first = _shortest_path(inside, [anchor], acc_configs)
        if first is None:
            raise PreconditionError("no accepting configuration in the witness component")
        back = _shortest_path(inside, [first[-1].to_config], {anchor})
        closing = first + (back or [])
    cycle_letters = [letters[e.letter] for e in witness.cycle]
    prefix = tuple(letters[e.letter] for e in access)
    period = tuple(cycle_letters * pumps) + tuple(letters[e.letter] for e in closing)
    return LassoWord(prefix, period)


def _shortest_path(edges, sources, targets) -> Optional[list[ConfigEdge]]:
    targets = set(targets)
    adj: dict[Configuration, list[ConfigEdge]] = {}
    for e in edges:
        adj.setdefault(e.from_config, []).append(e)
    for lst in adj.values():
        lst.sort(key=lambda e: (e.letter, e.to_config.master_state, e.to_config.slots))
    parent: dict[Configuration, Optional[ConfigEdge]] = {c: None for c in sources}
    queue = deque(sources)
    found = None
    for c in sources:
        if c in targets:
            return []
    while queue and found is None:
        c = queue.popleft()
        for e in adj.get(c, ()):
            if e.to_config not in parent:
                parent[e.to_config] = e
                if e.to_config in targets:
                    found = e.to_config
                    break
                queue.append(e.to_config)
    if found is None:
        return None
    path = []
    node = found
    while parent[node] is not None:
        e = parent[node]
        path.append(e)
        node = e.from_config
    path.reverse()
    return path

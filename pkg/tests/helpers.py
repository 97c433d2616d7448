"""Brute-force reference implementations used as independent oracles."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from nwaq.core import WeightedAutomaton, finite_value


def slave_language(slave: WeightedAutomaton, max_len: int) -> dict[tuple[str, ...], int]:
    """Accepted words up to max_len with the minimal accepting-run value,
    found by exhaustive run enumeration (handles nondeterminism)."""
    aut = slave.base
    letters = aut.alphabet.letters
    out: dict[tuple[str, ...], int] = {}
    # frontier: (state, word, weights)
    frontier = [(q, (), ()) for q in sorted(aut.initials)]
    while frontier:
        q, word, weights = frontier.pop()
        if q in aut.accepting:
            value = finite_value(slave.value_fn, weights)
            if word not in out or value < out[word]:
                out[word] = value
        if len(word) < max_len:
            for a in range(len(letters)):
                for q2, w in aut.succ(q, a):
                    frontier.append((q2, word + (letters[a],), weights + (w,)))
    return out


def simple_cycles(n_nodes: int, edges) -> list[list[int]]:
    """All simple cycles as edge-index lists; edges are (u, v, ...) tuples."""
    adjacency: dict[int, list[int]] = {}
    for idx, e in enumerate(edges):
        adjacency.setdefault(e[0], []).append(idx)
    cycles = []

    def dfs(start: int, node: int, path: list[int], seen: set[int]):
        for idx in adjacency.get(node, ()):
            v = edges[idx][1]
            if v == start:
                cycles.append(path + [idx])
            elif v > start and v not in seen:
                dfs(start, v, path + [idx], seen | {v})

    for start in range(n_nodes):
        dfs(start, start, [], {start})
    return cycles


def min_cycle_ratio_brute(graph) -> Optional[Fraction]:
    """Minimum cost/ticks over qualifying simple cycles, or None.

    Qualifying: reachable from an initial node, in a component containing an
    accepting node, at least one tick.
    """
    from nwaq.meanpayoff import _qualifying_sccs

    best = None
    qualifying_edges = set()
    for edge_idxs in _qualifying_sccs(graph):
        qualifying_edges.update(edge_idxs)
    for cycle in simple_cycles(graph.n_nodes, graph.edges):
        if not all(idx in qualifying_edges for idx in cycle):
            continue
        ticks = sum(graph.edges[i][3] for i in cycle)
        if ticks == 0:
            continue
        cost = sum(graph.edges[i][2] for i in cycle)
        ratio = Fraction(cost, ticks)
        if best is None or ratio < best:
            best = ratio
    return best

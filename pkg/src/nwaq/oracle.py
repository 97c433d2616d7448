"""Ground-truth evaluation of nested weighted automata on lasso words.

The simulator is exact: it runs the unique run of a deterministic automaton,
releasing a slave the moment its state is accepting (checked before the next
letter is consumed) and starting invoked slaves at their invocation position.
Periodicity is detected on snapshots taken at period boundaries that carry,
per active slave, its state, accumulated value and age; a repeated snapshot
pins the recurring window exactly, so the returned limit average is exact.

A slave that survives longer than (number of its states + 2) periods past the
prefix can never terminate (its (state, phase) pairs must repeat), so the run
is rejected at that point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Configuration,
    LassoWord,
    Nwa,
    NwaError,
    NondeterministicInputError,
    PLUS_INFINITY,
    ValueResult,
    WidthExceededError,
    _check64,
    is_deterministic,
    limavg_periodic,
)


@dataclass(frozen=True)
class TraceStep:
    """One position of a run: the configuration seen before the letter, the
    slave invoked there (None for silent moves), and the values returned at
    this position, each tagged with its invocation position."""

    position: int
    config_before: Configuration
    letter: str
    invoked: Optional[int]
    returned: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RunTrace:
    steps: tuple[TraceStep, ...]


class _Tables:
    """Per-automaton lookup tables for the deterministic simulator."""

    def __init__(self, nwa: Nwa):
        ok, site = is_deterministic(nwa)
        self.deterministic = ok
        self.site = site
        self.master: dict[tuple[int, int], tuple[int, int]] = {}
        for (q, a), succs in nwa.master.by_source.items():
            if succs:
                self.master[(q, a)] = succs[0]
        self.master_initial = next(iter(sorted(nwa.master.initials)))
        self.master_accepting = nwa.master.accepting
        self.n_letters = len(nwa.alphabet)
        self.slave_step: list[dict[tuple[int, int], tuple[int, int]]] = []
        self.slave_accepting: list[frozenset[int]] = []
        self.slave_initial: list[int] = []
        self.silent_invoke: list[bool] = []
        self.max_slave_states = 1
        for idx in range(1, len(nwa.slaves) + 1):
            sl = nwa.slave(idx)
            table = {}
            for (s, a), succs in sl.base.by_source.items():
                if succs:
                    s2, w = succs[0]
                    table[(s, a)] = (s2, sl.effective_weight(w))
            self.slave_step.append(table)
            self.slave_accepting.append(sl.base.accepting)
            s0 = next(iter(sorted(sl.base.initials)))
            self.slave_initial.append(s0)
            # invoking a slave that accepts the empty word is a silent move
            self.silent_invoke.append(s0 in sl.base.accepting)
            self.max_slave_states = max(self.max_slave_states, sl.base.n_states)


def _tables(nwa: Nwa) -> _Tables:
    cached = nwa.__dict__.get("_oracle_tables")
    if cached is None:
        cached = _Tables(nwa)
        nwa.__dict__["_oracle_tables"] = cached
    return cached


class _Slot:
    __slots__ = ("slave", "state", "acc", "age", "born")

    def __init__(self, slave: int, state: int, acc: int, born: int):
        self.slave = slave
        self.state = state
        self.acc = acc
        self.age = 0
        self.born = born


class _Run:
    """Step-by-step run of a deterministic NWA; raises on width violations."""

    def __init__(self, nwa: Nwa, width_cap: int):
        if width_cap < 1:
            raise ValueError("width_cap must be positive")
        self.t = _tables(nwa)
        if not self.t.deterministic:
            raise NondeterministicInputError(self.t.site or "input is not deterministic")
        self.cap = width_cap
        self.q = self.t.master_initial
        self.slots: list[_Slot] = []
        self.alive = True
        self.position = 0

    def config(self) -> Configuration:
        return Configuration(self.q, tuple((s.slave, s.state) for s in self.slots))

    def snapshot(self) -> tuple:
        return (self.q, tuple((s.slave, s.state, s.acc, s.age) for s in self.slots))

    def step(self, letter_id: int) -> tuple[list[tuple[int, int]], Optional[int], bool]:
        """Consume one letter; returns (released (born, value) list, invoked
        slave or None for silent, master-accepting-after flag)."""
        self.position += 1
        released = []
        kept = []
        for s in self.slots:
            if s.state in self.t.slave_accepting[s.slave - 1]:
                released.append((s.born, s.acc))
            else:
                kept.append(s)
        self.slots = kept
        move = self.t.master.get((self.q, letter_id))
        if move is None:
            self.alive = False
            return released, None, False
        self.q, label = move
        invoked: Optional[int] = None
        for s in self.slots:
            nxt = self.t.slave_step[s.slave - 1].get((s.state, letter_id))
            if nxt is None:
                self.alive = False
                return released, None, False
            s.state = nxt[0]
            s.acc = _check64(s.acc + nxt[1])
            s.age += 1
        if not self.t.silent_invoke[label - 1]:
            first = self.t.slave_step[label - 1].get((self.t.slave_initial[label - 1], letter_id))
            if first is None:
                self.alive = False
                return released, None, False
            if len(self.slots) + 1 > self.cap:
                raise WidthExceededError(self.position)
            self.slots.append(_Slot(label, first[0], _check64(first[1]), self.position))
            invoked = label
        return released, invoked, self.q in self.t.master_accepting


def evaluate_lasso(nwa: Nwa, w: LassoWord, width_cap: int) -> ValueResult:
    """Exact value of the unique run of a deterministic NWA on prefix.period^omega."""
    run = _Run(nwa, width_cap)
    letter_at = _letter_lookup(nwa, w)
    plen = len(w.period)
    age_cap = len(w.prefix) + (run.t.max_slave_states + 2) * plen + 2

    seen: set[tuple] = set()
    recorded = None
    window_values: list[int] = []
    window_accept = False
    guard = 0
    while True:
        consumed = run.position
        if consumed >= len(w.prefix) and (consumed - len(w.prefix)) % plen == 0:
            snap = run.snapshot()
            if recorded is not None:
                if snap == recorded:
                    if not window_accept or not window_values:
                        return PLUS_INFINITY
                    return limavg_periodic([], window_values)
            elif snap in seen:
                recorded = snap
                window_values = []
                window_accept = run.q in run.t.master_accepting
            else:
                seen.add(snap)
            guard += 1
            if guard > 10_000_000:
                raise NwaError("periodicity not detected (internal bound exceeded)")
        released, _, acc_now = run.step(letter_at(consumed))
        if not run.alive:
            return PLUS_INFINITY
        for s in run.slots:
            if s.age > age_cap:
                return PLUS_INFINITY  # some slave can never terminate
        if recorded is not None:
            window_values.extend(v for _, v in released)
            if acc_now:
                window_accept = True


def _letter_lookup(nwa: Nwa, w: LassoWord):
    """Letter id at a 0-based consumed-count position of the lasso word."""
    ids = [nwa.alphabet.id_of(a) for a in w.prefix] + [nwa.alphabet.id_of(a) for a in w.period]
    prefix_len = len(w.prefix)
    plen = len(w.period)

    def at(consumed: int) -> int:
        if consumed < len(ids):
            return ids[consumed]
        return ids[prefix_len + (consumed - prefix_len) % plen]

    return at


def trace_lasso(nwa: Nwa, w: LassoWord, width_cap: int, steps: int) -> RunTrace:
    """First `steps` positions of the run, with per-position release records."""
    run = _Run(nwa, width_cap)
    letter_at = _letter_lookup(nwa, w)
    out = []
    for _ in range(steps):
        consumed = run.position
        config = run.config()
        letter = w.letter_at(consumed + 1)
        released, invoked, _ = run.step(letter_at(consumed))
        out.append(TraceStep(consumed + 1, config, letter, invoked, tuple(sorted(released))))
        if not run.alive:
            break
    return RunTrace(tuple(out))


def run_values(nwa: Nwa, w: LassoWord, width_cap: int, count: int) -> list[int]:
    """First `count` returned values, ordered by invocation position.

    These are the non-silent entries of the value sequence the master
    aggregates; silent positions are skipped.
    """
    run = _Run(nwa, width_cap)
    letter_at = _letter_lookup(nwa, w)
    plen = len(w.period)
    values: dict[int, int] = {}
    pending: set[int] = set()
    horizon = len(w.prefix) + (count + 2) * (run.t.max_slave_states + 2) * plen + count + 4
    for _ in range(horizon):
        consumed = run.position
        released, invoked, _ = run.step(letter_at(consumed))
        for born, v in released:
            values[born] = v
            pending.discard(born)
        if invoked is not None:
            pending.add(run.position)
        if not run.alive:
            break
        done = sorted(values)
        if len(done) >= count and not any(p < done[count - 1] for p in pending):
            return [values[p] for p in done[:count]]
    done = sorted(values)
    if len(done) >= count and not any(p < done[count - 1] for p in pending):
        return [values[p] for p in done[:count]]
    raise NwaError(f"run did not produce {count} resolved values within {horizon} steps")


def min_partial_average(nwa: Nwa, w: LassoWord, width_cap: int, count: int) -> Fraction:
    """Minimum over n <= count of the average of the first n returned values.

    This is the dip of the partial averages whose liminf the master value
    function takes; pumping a negative cycle drives it down without bound.
    """
    vals = run_values(nwa, w, width_cap, count)
    best = None
    total = 0
    for n, v in enumerate(vals, start=1):
        total += v
        avg = Fraction(total, n)
        if best is None or avg < best:
            best = avg
    assert best is not None
    return best


def enumerate_lasso_infimum(
    nwa: Nwa, max_prefix: int, max_period: int, width_cap: int
) -> tuple[ValueResult, Optional[LassoWord]]:
    """Minimum oracle value over all lassos within the size bounds, with witness.

    Deterministic input: every letter lasso with |prefix| <= max_prefix and
    1 <= |period| <= max_period is evaluated (dead branches are pruned, and
    values are memoized on the configuration reached after the prefix, which
    determines the periodic window). Nondeterministic input: run lassos of the
    same bounds are enumerated in the configuration graph; the result is an
    upper bound on the true infimum. Ties are broken toward the shorter, then
    lexicographically least period, then prefix.
    """
    ok, _ = is_deterministic(nwa)
    if ok:
        return _enumerate_det(nwa, max_prefix, max_period, width_cap)
    return _enumerate_nondet(nwa, max_prefix, max_period, width_cap)


def _snapshot_graph(nwa: Nwa, width_cap: int):
    """Reachable (master state, slot states) snapshots with per-letter moves.

    Snapshots abstract accumulations and ages away, which is enough to decide
    liveness and to key period evaluations. Letters whose step would exceed
    the width cap are treated as dead (their lassos abort).
    """
    from .reduce import _a_step

    start = (_tables(nwa).master_initial, ())
    index = {start: 0}
    nodes = [start]
    moves: list[list[tuple[int, int]]] = []  # node -> [(letter, target node)]
    todo = [0]
    while todo:
        ni = todo.pop()
        while len(moves) <= ni:
            moves.append([])
        q, slots = nodes[ni]
        out = []
        for a in range(len(nwa.alphabet)):
            step = _a_step(nwa, q, slots, a)
            if step is None:
                continue
            q2, slots2, _, _ = step
            if len(slots2) > width_cap:
                continue
            key = (q2, slots2)
            if key not in index:
                index[key] = len(nodes)
                nodes.append(key)
                todo.append(index[key])
            out.append((a, index[key]))
        moves[ni] = out
    while len(moves) < len(nodes):
        moves.append([])
    return nodes, moves


def lasso_values(nwa: Nwa, max_prefix: int, max_period: int, width_cap: int):
    """Yield (lasso, exact value) for every lasso within the size bounds whose
    run does not die outright; the omitted ones are all +inf.

    Values are memoized on the configuration reached after the prefix, and a
    cheap snapshot-winding walk rejects dying periods before full evaluation.
    Deterministic automata only.
    """
    letters = nwa.alphabet.letters
    nodes, moves = _snapshot_graph(nwa, width_cap)
    move_map = [dict(m) for m in moves]
    memo: dict[tuple[int, tuple[int, ...]], ValueResult] = {}

    def survives_winding(ni: int, period: tuple[int, ...]) -> bool:
        # the run dies unless the snapshot walk outlives enough windings to
        # close a boundary cycle
        at = ni
        seen_boundaries = {at}
        for _ in range(len(nodes) + 1):
            for a in period:
                nxt = move_map[at].get(a)
                if nxt is None:
                    return False
                at = nxt
            if at in seen_boundaries:
                return True
            seen_boundaries.add(at)
        return True

    prefixes: list[tuple[tuple[int, ...], int]] = []
    stack = [((), 0)]
    while stack:
        path, ni = stack.pop()
        prefixes.append((path, ni))
        if len(path) < max_prefix:
            for a, nj in reversed(moves[ni]):
                stack.append((path + (a,), nj))

    periods_from: dict[int, list[tuple[int, ...]]] = {}

    def periods(ni: int) -> list[tuple[int, ...]]:
        if ni not in periods_from:
            out = []
            st = [((), ni)]
            while st:
                path, nj = st.pop()
                if path:
                    out.append(path)
                if len(path) < max_period:
                    for a, nk in reversed(moves[nj]):
                        st.append((path + (a,), nk))
            periods_from[ni] = out
        return periods_from[ni]

    for prefix, ni in prefixes:
        for period in periods(ni):
            mkey = (ni, period)
            value = memo.get(mkey)
            if value is None:
                if not survives_winding(ni, period):
                    value = PLUS_INFINITY
                else:
                    word = LassoWord(
                        tuple(letters[a] for a in prefix), tuple(letters[a] for a in period)
                    )
                    try:
                        value = evaluate_lasso(nwa, word, width_cap)
                    except WidthExceededError:
                        value = PLUS_INFINITY
                memo[mkey] = value
            yield LassoWord(
                tuple(letters[a] for a in prefix), tuple(letters[a] for a in period)
            ), value


def _enumerate_det(nwa: Nwa, max_prefix: int, max_period: int, width_cap: int):
    best: Optional[ValueResult] = None
    best_key = None
    best_witness = None
    idx = nwa.alphabet.id_of
    for word, value in lasso_values(nwa, max_prefix, max_period, width_cap):
        if value is PLUS_INFINITY:
            continue
        key = (
            value.sort_key(),
            len(word.period),
            tuple(idx(a) for a in word.period),
            len(word.prefix),
            tuple(idx(a) for a in word.prefix),
        )
        if best_key is None or key < best_key:
            best, best_key, best_witness = value, key, word
    if best is None:
        return PLUS_INFINITY, None
    return best, best_witness


def _enumerate_nondet(nwa: Nwa, max_prefix: int, max_period: int, width_cap: int):
    from .determinize import config_initials, explore

    _, all_edges = explore(nwa, width_cap)
    adjacency: dict = {}
    for e in all_edges:
        if not e.width_overflow:
            adjacency.setdefault(e.from_config, []).append(e)
    for lst in adjacency.values():
        lst.sort(key=lambda e: (e.letter, e.to_config.master_state, e.to_config.slots, e.slot_weights))

    best: Optional[ValueResult] = None
    best_key = None
    best_witness = None

    def consider(value: ValueResult, prefix_edges, cycle_edges):
        nonlocal best, best_key, best_witness
        prefix = tuple(nwa.alphabet.letters[e.letter] for e in prefix_edges)
        period = tuple(nwa.alphabet.letters[e.letter] for e in cycle_edges)
        key = (
            value.sort_key(),
            len(period),
            tuple(e.letter for e in cycle_edges),
            len(prefix),
            tuple(e.letter for e in prefix_edges),
        )
        if best_key is None or key < best_key:
            best, best_key, best_witness = value, key, LassoWord(prefix, period)

    prefix_stack = [((), c) for c in sorted(config_initials(nwa), key=lambda c: (c.master_state, c.slots))]
    prefix_paths = []
    while prefix_stack:
        path, c = prefix_stack.pop()
        prefix_paths.append((path, c))
        if len(path) < max_prefix:
            for e in adjacency.get(c, ()):
                prefix_stack.append((path + (e,), e.to_config))

    evaluated: dict[tuple, ValueResult] = {}
    for path, anchor in prefix_paths:
        cycle_stack = [((), anchor)]
        while cycle_stack:
            cyc, c = cycle_stack.pop()
            if cyc and c == anchor:
                key = (anchor, cyc)
                if key not in evaluated:
                    evaluated[key] = _evaluate_edge_lasso(nwa, path, cyc)
                if evaluated[key] is not PLUS_INFINITY:
                    consider(evaluated[key], path, cyc)
            if len(cyc) < max_period:
                for e in adjacency.get(c, ()):
                    cycle_stack.append((cyc + (e,), e.to_config))
    if best is None:
        return PLUS_INFINITY, None
    return best, best_witness


def _evaluate_edge_lasso(nwa: Nwa, prefix_edges, cycle_edges) -> ValueResult:
    """Value of the run pinned by an edge path and edge cycle in the
    configuration graph; the twin of evaluate_lasso for chosen runs."""
    max_states = max((sl.base.n_states for sl in nwa.slaves), default=1)
    plen = len(cycle_edges)
    age_cap = len(prefix_edges) + (max_states + 2) * plen + 2

    # decorated slots aligned with the configuration's slots
    slots: list[list[int]] = []  # [acc, age]
    seen: set[tuple] = set()
    recorded = None
    window_values: list[int] = []
    window_accept = False

    consumed = 0
    while True:
        if consumed >= len(prefix_edges) and (consumed - len(prefix_edges)) % plen == 0:
            snap = tuple((s[0], s[1]) for s in slots)
            if recorded is not None:
                if snap == recorded:
                    if not window_accept or not window_values:
                        return PLUS_INFINITY
                    return limavg_periodic([], window_values)
            elif snap in seen:
                recorded = snap
                window_values = []
                window_accept = False
            else:
                seen.add(snap)
        if consumed < len(prefix_edges):
            edge = prefix_edges[consumed]
        else:
            edge = cycle_edges[(consumed - len(prefix_edges)) % plen]
        consumed += 1
        released_positions = {pos - 1 for pos in edge.returned}
        released_values = [slots[pos - 1][0] for pos in edge.returned]
        survivors = [s for i, s in enumerate(slots) if i not in released_positions]
        for s, dw in zip(survivors, edge.slot_weights):
            s[0] = _check64(s[0] + dw)
            s[1] += 1
            if s[1] > age_cap:
                return PLUS_INFINITY
        if edge.invoked is not None:
            survivors.append([_check64(edge.slot_weights[-1]), 0])
        slots = survivors
        if recorded is not None:
            window_values.extend(released_values)
            if edge.master_accepting:
                window_accept = True

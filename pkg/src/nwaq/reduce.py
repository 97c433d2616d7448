"""Reductions: width-k automata to width 1, and width 1 to a limit-average
automaton with silent moves over run-fragment letters.

The width-1 construction tracks the master together with all active slaves in
the new master's state and runs a single compound slave that collects the sum
of the tracked slaves' step weights. One compound instance runs per input
invocation, covering the input steps from that invocation up to the next one
(or until its last tracked slave terminates); consuming happens one step
behind the input, with the previous step's weight carried in the state, so
the instance can see in its own state whether the step it just covered
invoked a new slave and terminate exactly there. Counts of returned values
and their period sums match the input on every lasso whose slaves all
terminate within the period. Master acceptance and every-slave-terminates
form a generalized Buchi condition compiled to plain Buchi with the usual
two-phase counter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    LabeledAutomaton,
    NEG_INFINITY,
    Nwa,
    NwaError,
    NondeterministicInputError,
    PreconditionError,
    ValueFn,
    ValueResult,
    WeightedAutomaton,
    _check64,
    is_deterministic,
)
from .oracle import _tables
from .width import has_width


class NegInfinityFragmentError(NwaError):
    """A fragment's minimal slave value is unbounded below.

    Signals that the overall infimum is minus infinity; the negative-descent
    check run beforehand normally pre-empts this.
    """

    def __init__(self, q1: int, letter: str, q2: int, slave: int):
        super().__init__(f"fragment ({q1}, {letter}, {q2}, B{slave}) has no minimal value")
        self.site = (q1, letter, q2, slave)


def _a_step(nwa: Nwa, q: int, slots: tuple, a: int):
    """One input step from (master state, tracked slots) on a letter id.

    Returns (q2, slots2, invoked_real, step_weight) or None when the run dies.
    Accepting-state slots are released first; an invoked slave consumes the
    letter unless it accepts the empty word, which is a silent move.
    """
    t = _tables(nwa)
    move = t.master.get((q, a))
    if move is None:
        return None
    q2, label = move
    weight = 0
    slots2 = []
    for i, s in slots:
        if s in t.slave_accepting[i - 1]:
            continue
        nxt = t.slave_step[i - 1].get((s, a))
        if nxt is None:
            return None
        slots2.append((i, nxt[0]))
        weight += nxt[1]
    invoked_real = False
    if not t.silent_invoke[label - 1]:
        first = t.slave_step[label - 1].get((t.slave_initial[label - 1], a))
        if first is None:
            return None
        slots2.append((label, first[0]))
        weight += first[1]
        invoked_real = True
    return q2, tuple(slots2), invoked_real, _check64(weight)


def _all_accepting(nwa: Nwa, slots: tuple) -> bool:
    t = _tables(nwa)
    return bool(slots) and all(s in t.slave_accepting[i - 1] for i, s in slots)


def reduce_width1(nwa: Nwa, k: int) -> Nwa:
    """Width-1 automaton with the same lasso values wherever both accept.

    Callers must have established that the negative-descent condition fails;
    the construction itself only needs determinism and width k. On lassos in
    which every slave terminates within the period the value is preserved
    exactly: one compound instance returns per input invocation and the
    per-period weight totals agree.
    """
    ok, site = is_deterministic(nwa)
    if not ok:
        raise NondeterministicInputError(site or "input is not deterministic")
    okw, _ = has_width(nwa, k)
    if not okw:
        raise PreconditionError(f"input exceeds width {k}")
    t = _tables(nwa)
    n_letters = len(nwa.alphabet)

    # core state: (input master state, input slots, weight of the step just
    # taken, whether that step invoked, whether a compound instance runs,
    # master-acceptance seen since the last instance boundary, turnover seen
    # since the last instance boundary). The sticky flags move the Buchi sets
    # onto boundary states, where fragment letters start and end.
    q0 = t.master_initial
    core0 = (q0, (), 0, False, 0, q0 in t.master_accepting, True)
    core_states = [core0]
    core_index = {core0: 0}
    # (source core, letter, target core, spawn site or None)
    core_trans: list[tuple[tuple, int, tuple, Optional[tuple]]] = []
    todo = [core0]
    while todo:
        core = todo.pop()
        q, slots, pending, jflag, bit, f1s, f2s = core
        for a in range(n_letters):
            step = _a_step(nwa, q, slots, a)
            if step is None:
                continue
            q2, slots2, invoked_real, weight = step
            spawn = bit == 0 and jflag
            instance_acc = invoked_real or not slots2
            bit2 = 1 if (spawn or bit == 1) and not instance_acc else 0
            carry = bit == 1  # the window spans one compound instance
            f1s2 = (q2 in t.master_accepting) or (f1s and carry)
            f2s2 = (not slots2 or _all_accepting(nwa, slots2)) or (f2s and carry)
            core2 = (q2, slots2, weight, invoked_real, bit2, f1s2, f2s2)
            if core2 not in core_index:
                core_index[core2] = len(core_states)
                core_states.append(core2)
                todo.append(core2)
            core_trans.append((core, a, core2, (q, slots, pending) if spawn else None))

    sites = sorted({site for _, _, _, site in core_trans if site is not None})
    site_index = {s: n + 1 for n, s in enumerate(sites)}
    dummy_index = len(sites) + 1

    def f1(core) -> bool:
        return core[4] == 0 and core[5]

    def f2(core) -> bool:
        return core[4] == 0 and core[6]

    # degeneralize: phase advances when leaving a state of the awaited set
    prod0 = (core0, 1)
    prod_states = [prod0]
    prod_index = {prod0: 0}
    master_trans = []
    todo2 = [prod0]
    by_core: dict[tuple, list] = {}
    for item in core_trans:
        by_core.setdefault(item[0], []).append(item)
    while todo2:
        prod = todo2.pop()
        core, ph = prod
        if ph == 1:
            ph2 = 2 if f1(core) else 1
        else:
            ph2 = 1 if f2(core) else 2
        for _, a, core2, site in by_core.get(core, ()):
            prod2 = (core2, ph2)
            if prod2 not in prod_index:
                prod_index[prod2] = len(prod_states)
                prod_states.append(prod2)
                todo2.append(prod2)
            label = site_index[site] if site is not None else dummy_index
            master_trans.append((prod_index[prod], a, prod_index[prod2], label))

    def core_name(core):
        q, slots, pending, jflag, bit, f1s, f2s = core
        inner = ",".join(f"B{i}.{nwa.slave(i).base.state_names[s]}" for i, s in slots)
        flags = ("!" if jflag else "") + ("F" if f1s else "") + ("T" if f2s else "")
        return f"{nwa.master.state_names[q]}[{inner}]w{pending}{flags}{bit}"

    master = LabeledAutomaton(
        alphabet=nwa.alphabet,
        n_states=len(prod_states),
        state_names=tuple(f"{core_name(c)}p{ph}" for c, ph in prod_states),
        initials=frozenset({0}),
        transitions=tuple(sorted(master_trans)),
        accepting=frozenset(i for i, (c, ph) in enumerate(prod_states) if ph == 1 and f1(c)),
    )

    slaves = tuple(_compound_slave(nwa, site) for site in sites)
    dummy = WeightedAutomaton(
        LabeledAutomaton(nwa.alphabet, 1, ("d0",), frozenset({0}), (), frozenset({0})),
        ValueFn.SUM,
    )
    return Nwa(master, slaves + (dummy,), name=(nwa.name + "_w1") if nwa.name else "w1")


def _compound_slave(nwa: Nwa, site: tuple) -> WeightedAutomaton:
    """The compound instance spawned one step after an invocation site.

    States past the entry are (master state, tracked slots, carried weight,
    cut flag): the carried weight is the tracked slaves' total for the step
    just covered and is paid on the next transition. A state is accepting
    when the covered step invoked a new slave (cut) or left no tracked slave.
    Accepting states have no outgoing transitions.
    """
    n_letters = len(nwa.alphabet)
    q_site, slots_site, pending_site = site
    entry = ("entry",)
    states = [entry]
    index = {entry: 0}
    trans = []

    def accepting_state(core) -> bool:
        _, slots, _, cut = core
        return cut or not slots

    todo = []
    for a in range(n_letters):
        step = _a_step(nwa, q_site, slots_site, a)
        if step is None:
            continue
        q2, slots2, invoked_real, weight = step
        core2 = (q2, slots2, weight, invoked_real)
        if core2 not in index:
            index[core2] = len(states)
            states.append(core2)
            if not accepting_state(core2):
                todo.append(core2)
        trans.append((0, a, index[core2], pending_site))
    while todo:
        core = todo.pop()
        q, slots, pending, _ = core
        for a in range(n_letters):
            step = _a_step(nwa, q, slots, a)
            if step is None:
                continue
            q2, slots2, invoked_real, weight = step
            core2 = (q2, slots2, weight, invoked_real)
            if core2 not in index:
                index[core2] = len(states)
                states.append(core2)
                if not accepting_state(core2):
                    todo.append(core2)
            trans.append((index[core], a, index[core2], pending))

    def name(core):
        if core == entry:
            return "entry"
        q, slots, pending, cut = core
        inner = ",".join(f"B{i}.{nwa.slave(i).base.state_names[s]}" for i, s in slots)
        return f"{nwa.master.state_names[q]}[{inner}]w{pending}{'!' if cut else ''}"

    return WeightedAutomaton(
        LabeledAutomaton(
            alphabet=nwa.alphabet,
            n_states=len(states),
            state_names=tuple(name(c) for c in states),
            initials=frozenset({0}),
            transitions=tuple(sorted(trans)),
            accepting=frozenset(i for i, c in enumerate(states) if c != entry and accepting_state(c)),
        ),
        ValueFn.SUM,
    )


# ---------------------------------------------------------------------------
# Fragment letters and the silent-move limit-average automaton


@dataclass(frozen=True)
class FragmentLetter:
    """Silent(q1, q2) for a nonempty dummy-only master stretch, or
    Valued(q1, a, q2, i) for one complete run of slave i invoked on a."""

    q1: int
    q2: int
    letter: Optional[str] = None
    slave: Optional[int] = None

    @property
    def silent(self) -> bool:
        return self.slave is None

    def __str__(self) -> str:
        if self.silent:
            return f"({self.q1}->{self.q2})"
        return f"({self.q1},{self.letter},B{self.slave}->{self.q2})"


@dataclass(frozen=True)
class SilentLimAvgAutomaton:
    """Deterministic limit-average automaton over fragment letters.

    Transitions carry the minimal value of the fragment they summarize, or
    None for silent letters; two silent letters never chain. realizations
    maps each letter to one input word attaining the minimum.
    """

    n_states: int
    state_names: tuple[str, ...]
    initial: int
    accepting: frozenset[int]
    edges: tuple[tuple[int, FragmentLetter, int, Optional[int]], ...]
    realizations: dict[FragmentLetter, tuple[str, ...]]


def min_slave_value(nwa: Nwa, q1: int, a: str, q2: int, i: int) -> Optional[ValueResult]:
    """Minimal value slave i can return on a word moving the master q1 -> q2.

    The master must invoke slave i at q1 on the first letter a; afterwards it
    may only take silent-invoking transitions while the slave runs. None when
    no such word exists; minus infinity when a negative product cycle can
    reach the terminating states.
    """
    got = _fragment_values(nwa, q1, nwa.alphabet.id_of(a))
    if got is None:
        return None
    slave, per_target = got
    if slave != i:
        return None
    hit = per_target.get(q2)
    if hit is None:
        return None
    value, _ = hit
    if value is None:
        return NEG_INFINITY
    return ValueResult.finite(value)


def _fragment_values(nwa: Nwa, q1: int, a: int):
    """All fragment endpoints for the invocation at (q1, a).

    Returns (slave index, {q2: (min value or None for unbounded, word)}), or
    None when (q1, a) does not invoke a slave that consumes a.
    """
    t = _tables(nwa)
    move = t.master.get((q1, a))
    if move is None:
        return None
    m1, label = move
    if t.silent_invoke[label - 1]:
        return None
    first = t.slave_step[label - 1].get((t.slave_initial[label - 1], a))
    if first is None:
        return None
    s1, w0 = first
    acc = t.slave_accepting[label - 1]

    # product of the master over silent-invoking moves with the running slave
    nodes = [(m1, s1)]
    index = {(m1, s1): 0}
    edges = []  # (u, v, weight, letter id)
    pos = 0
    while pos < len(nodes):
        m, s = nodes[pos]
        u = pos
        pos += 1
        if s in acc:
            continue  # the slave terminates here, no continuation
        for b in range(len(nwa.alphabet)):
            mv = t.master.get((m, b))
            if mv is None or not t.silent_invoke[mv[1] - 1]:
                continue
            sv = t.slave_step[label - 1].get((s, b))
            if sv is None:
                continue
            node = (mv[0], sv[0])
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            edges.append((u, index[node], sv[1], b))

    n = len(nodes)
    INF = None
    dist: list[Optional[int]] = [INF] * n
    dist[0] = w0
    pred: list[Optional[tuple[int, int, int]]] = [None] * n
    for _ in range(n):
        changed = False
        for u, v, w, b in edges:
            if dist[u] is not None and (dist[v] is None or dist[u] + w < dist[v]):
                dist[v] = dist[u] + w
                pred[v] = (u, b, w)
                changed = True
        if not changed:
            break
    on_neg = set()
    for u, v, w, b in edges:
        if dist[u] is not None and (dist[v] is None or dist[u] + w < dist[v]):
            on_neg.add(v)
    # propagate unboundedness forward
    frontier = list(on_neg)
    adj: dict[int, list[int]] = {}
    for u, v, _, _ in edges:
        adj.setdefault(u, []).append(v)
    while frontier:
        u = frontier.pop()
        for v in adj.get(u, ()):
            if v not in on_neg:
                on_neg.add(v)
                frontier.append(v)

    per_target: dict[int, tuple[Optional[int], Optional[tuple[str, ...]]]] = {}
    letters = nwa.alphabet.letters
    for node, pos_ in index.items():
        m, s = node
        if s not in acc or dist[pos_] is None:
            continue
        if pos_ in on_neg:
            per_target[m] = (None, None)
            continue
        word = [letters[a]]
        cur = pos_
        chain = []
        while pred[cur] is not None:
            u, b, _ = pred[cur]
            chain.append(letters[b])
            cur = u
        chain.reverse()
        word.extend(chain)
        old = per_target.get(m)
        if old is None or (old[0] is not None and dist[pos_] < old[0]):
            per_target[m] = (dist[pos_], tuple(word))
    return label, per_target


def fragment_automaton(nwa: Nwa) -> SilentLimAvgAutomaton:
    """Summarize a width-1 deterministic automaton by its run fragments.

    States pair a master state at a fragment boundary with a just-read-silent
    flag that forbids two silent letters in a row. Valued letters exist for
    every realizable fragment and carry its minimal value; a fragment with no
    minimal value raises NegInfinityFragmentError.
    """
    ok, site = is_deterministic(nwa)
    if not ok:
        raise NondeterministicInputError(site or "input is not deterministic")
    okw, _ = has_width(nwa, 1)
    if not okw:
        raise PreconditionError("fragment automaton needs width-1 input")
    t = _tables(nwa)
    letters = nwa.alphabet.letters

    silent_next: dict[int, dict[int, tuple[str, ...]]] = {}

    def silent_closure(q: int) -> dict[int, tuple[str, ...]]:
        # shortest dummy-only nonempty paths from q, by BFS
        if q in silent_next:
            return silent_next[q]
        out: dict[int, tuple[str, ...]] = {}
        frontier = [(q, ())]
        while frontier:
            nxt = []
            for m, word in frontier:
                for b in range(len(letters)):
                    mv = t.master.get((m, b))
                    if mv is None or not t.silent_invoke[mv[1] - 1]:
                        continue
                    m2 = mv[0]
                    w2 = word + (letters[b],)
                    if m2 not in out:
                        out[m2] = w2
                        nxt.append((m2, w2))
            frontier = nxt
        silent_next[q] = out
        return out

    boundaries = [t.master_initial]
    seen = {t.master_initial}
    valued: dict[tuple[int, int], tuple[int, dict]] = {}
    pos = 0
    while pos < len(boundaries):
        q = boundaries[pos]
        pos += 1
        for q2 in silent_closure(q):
            if q2 not in seen:
                seen.add(q2)
                boundaries.append(q2)
        for a in range(len(letters)):
            got = _fragment_values(nwa, q, a)
            if got is None:
                continue
            slave, per_target = got
            for q2, (value, _) in per_target.items():
                if value is None:
                    raise NegInfinityFragmentError(q, letters[a], q2, slave)
            valued[(q, a)] = (slave, per_target)
            for q2 in per_target:
                if q2 not in seen:
                    seen.add(q2)
                    boundaries.append(q2)

    # assemble states (boundary, silent flag); all states first, then edges
    state_index: dict[tuple[int, int], int] = {}
    state_list: list[tuple[int, int]] = []

    def intern(q: int, flag: int) -> int:
        key = (q, flag)
        if key not in state_index:
            state_index[key] = len(state_list)
            state_list.append(key)
        return state_index[key]

    initial = intern(t.master_initial, 0)
    for q in boundaries:
        intern(q, 0)
        for q2 in sorted(silent_closure(q)):
            intern(q2, 1)
    edges = []
    realizations: dict[FragmentLetter, tuple[str, ...]] = {}
    for q in boundaries:
        for q2, word in sorted(silent_closure(q).items()):
            letter = FragmentLetter(q1=q, q2=q2)
            realizations[letter] = word
            edges.append((state_index[(q, 0)], letter, state_index[(q2, 1)], None))
    for (q, a), (slave, per_target) in sorted(valued.items()):
        for q2, (value, word) in sorted(per_target.items()):
            letter = FragmentLetter(q1=q, q2=q2, letter=letters[a], slave=slave)
            realizations[letter] = word
            for flag in (0, 1):
                if (q, flag) in state_index:
                    edges.append((state_index[(q, flag)], letter, state_index[(q2, 0)], value))

    accepting = frozenset(
        i for i, (q, _) in enumerate(state_list) if q in t.master_accepting
    )
    names = tuple(f"{nwa.master.state_names[q]}/{flag}" for q, flag in state_list)
    return SilentLimAvgAutomaton(
        n_states=len(state_list),
        state_names=names,
        initial=initial,
        accepting=accepting,
        edges=tuple(edges),
        realizations=realizations,
    )

"""Automata with monitor counters and the translations to and from nested automata.

Counters never influence transitions. Each transition carries one instruction
per counter: start (activate at 0), terminate (return the value to the start
position), add an integer (counter must be active), or a skip marker (counter
must be inactive). Violating an instruction's requirement kills the run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional

from .core import (
    Alphabet,
    LabeledAutomaton,
    LassoWord,
    Nwa,
    NwaError,
    NondeterministicInputError,
    PLUS_INFINITY,
    PreconditionError,
    ValueFn,
    ValueResult,
    WeightedAutomaton,
    limavg_periodic,
)


class InstrKind(enum.Enum):
    START = "s"
    TERMINATE = "t"
    ADD = "add"
    SKIP = "."


@dataclass(frozen=True)
class Instr:
    kind: InstrKind
    amount: int = 0

    @staticmethod
    def start() -> "Instr":
        return Instr(InstrKind.START)

    @staticmethod
    def terminate() -> "Instr":
        return Instr(InstrKind.TERMINATE)

    @staticmethod
    def add(amount: int) -> "Instr":
        return Instr(InstrKind.ADD, amount)

    @staticmethod
    def skip() -> "Instr":
        return Instr(InstrKind.SKIP)

    def __str__(self) -> str:
        return str(self.amount) if self.kind is InstrKind.ADD else self.kind.value


@dataclass(frozen=True)
class Mca:
    """Automaton with n monitor counters over infinite words, LimAvg-valued."""

    alphabet: Alphabet
    n_states: int
    state_names: tuple[str, ...]
    initials: frozenset[int]
    accepting: frozenset[int]
    n_counters: int
    transitions: tuple[tuple[int, int, int, tuple[Instr, ...]], ...]  # (from, letter, to, vector)
    name: str = ""

    @cached_property
    def by_source(self) -> dict[tuple[int, int], tuple[tuple[int, tuple[Instr, ...]], ...]]:
        table: dict[tuple[int, int], list] = {}
        for q, a, q2, vec in self.transitions:
            table.setdefault((q, a), []).append((q2, vec))
        return {k: tuple(sorted(v, key=lambda t: (t[0], tuple(map(str, t[1]))))) for k, v in table.items()}

    def is_deterministic(self) -> bool:
        return len(self.initials) == 1 and all(len(v) <= 1 for v in self.by_source.values())


def validate_mca(mca: Mca) -> list[str]:
    """Diagnostics; empty iff the structural invariants hold."""
    out: list[str] = []
    ok = range(mca.n_states)
    if mca.n_counters < 0:
        out.append("bad-counter-count")
    if not mca.initials:
        out.append("mca: no initial state")
    for q in sorted(mca.initials | mca.accepting):
        if q not in ok:
            out.append(f"mca: state {q} out of range")
    for q, a, q2, vec in mca.transitions:
        if q not in ok or q2 not in ok:
            out.append(f"mca: transition ({q},{a},{q2}) endpoint out of range")
        if not (0 <= a < len(mca.alphabet)):
            out.append(f"mca: transition ({q},{a},{q2}) letter id out of range")
        if len(vec) != mca.n_counters:
            out.append(f"mca: transition ({q},{a},{q2}) vector length {len(vec)} != {mca.n_counters}")
        if sum(1 for ins in vec if ins.kind is InstrKind.START) > 1:
            out.append(f"mca: transition ({q},{a},{q2}) starts more than one counter")
    return out


def evaluate_lasso_mca(mca: Mca, w: LassoWord) -> ValueResult:
    """Exact value of a deterministic monitor-counter automaton on a lasso word.

    The run dies (+inf) on a missing transition or a violated instruction
    requirement. Acceptance needs accepting states and counter activations
    infinitely often, and every activated counter eventually terminated.
    The run is simulated until the (state, active counters with values and
    ages) snapshot repeats at a period boundary, which pins the recurring
    window exactly.
    """
    if not mca.is_deterministic():
        raise NondeterministicInputError("evaluate_lasso_mca needs a deterministic automaton")
    plen = len(w.period)
    # an active counter's fate is pinned by (state, phase); longer survival loops forever
    age_cap = len(w.prefix) + (mca.n_states + 2) * plen + 2

    state = next(iter(mca.initials))
    counters: dict[int, tuple[int, int]] = {}  # counter -> (value, age)
    seen: set[tuple] = set()
    recorded_key = None
    window_values: list[Optional[int]] = []
    window_accept = False
    window_start = False
    consumed = 0

    while True:
        at_boundary = consumed >= len(w.prefix) and (consumed - len(w.prefix)) % plen == 0
        if at_boundary:
            key = (state, tuple(sorted((j, v, g) for j, (v, g) in counters.items())))
            if recorded_key is not None:
                if key == recorded_key:
                    if not window_accept or not window_start:
                        return PLUS_INFINITY
                    return limavg_periodic([], window_values)
            elif key in seen:
                recorded_key = key
                window_values = []
                window_accept = state in mca.accepting
                window_start = False
            else:
                seen.add(key)
        consumed += 1
        a = mca.alphabet.id_of(w.letter_at(consumed))
        step = mca.by_source.get((state, a), ())
        if not step:
            return PLUS_INFINITY
        state, vec = step[0]
        assigned: Optional[int] = None
        for j, ins in enumerate(vec):
            if ins.kind is InstrKind.START:
                if j in counters:
                    return PLUS_INFINITY
                counters[j] = (0, 0)
                if recorded_key is not None:
                    window_start = True
            elif ins.kind is InstrKind.TERMINATE:
                if j not in counters:
                    return PLUS_INFINITY
                assigned = counters.pop(j)[0]
            elif ins.kind is InstrKind.ADD:
                if j not in counters:
                    return PLUS_INFINITY
                counters[j] = (counters[j][0] + ins.amount, counters[j][1])
            else:  # SKIP asserts the counter is inactive
                if j in counters:
                    return PLUS_INFINITY
        for j, (v, g) in list(counters.items()):
            if g + 1 > age_cap:
                return PLUS_INFINITY  # counter never terminated
            counters[j] = (v, g + 1)
        if recorded_key is not None:
            window_values.append(assigned)
            if state in mca.accepting:
                window_accept = True


def mca_to_nwa(mca: Mca) -> Nwa:
    """Equivalent nested automaton: one tracking slave per counter plus a dummy.

    Slave i mirrors the transition structure, weighting each transition by the
    add amount for counter i and accepting exactly where counter i terminates.
    The master invokes slave i on transitions starting counter i.
    """
    if not mca.is_deterministic():
        raise NondeterministicInputError("mca_to_nwa is stated for deterministic input")
    k = mca.n_counters
    dummy_index = k + 1
    master_trans = []
    for q, a, q2, vec in mca.transitions:
        label = dummy_index
        for j, ins in enumerate(vec):
            if ins.kind is InstrKind.START:
                label = j + 1
        master_trans.append((q, a, q2, label))
    master = LabeledAutomaton(
        alphabet=mca.alphabet,
        n_states=mca.n_states,
        state_names=mca.state_names,
        initials=mca.initials,
        transitions=tuple(sorted(master_trans)),
        accepting=mca.accepting,
    )
    slaves = []
    for j in range(k):
        # states: 0 = entry, 1..n = tracked state copies, n+1 = accepting sink
        entry = 0
        off = 1
        sink = mca.n_states + 1
        trans = []
        for q, a, q2, vec in mca.transitions:
            ins = vec[j]
            if ins.kind is InstrKind.START:
                trans.append((entry, a, off + q2, 0))
            elif ins.kind is InstrKind.ADD:
                trans.append((off + q, a, off + q2, ins.amount))
            elif ins.kind is InstrKind.TERMINATE:
                trans.append((off + q, a, sink, 0))
        names = ("start",) + tuple(f"c{j+1}_{s}" for s in mca.state_names) + ("done",)
        slaves.append(
            WeightedAutomaton(
                LabeledAutomaton(
                    alphabet=mca.alphabet,
                    n_states=mca.n_states + 2,
                    state_names=names,
                    initials=frozenset({entry}),
                    transitions=tuple(sorted(trans)),
                    accepting=frozenset({sink}),
                ),
                ValueFn.SUM,
            )
        )
    dummy = WeightedAutomaton(
        LabeledAutomaton(mca.alphabet, 1, ("d0",), frozenset({0}), (), frozenset({0})),
        ValueFn.SUM,
    )
    slaves.append(dummy)
    return Nwa(master, tuple(slaves), name=(mca.name + "_as_nwa") if mca.name else "")


def nwa_to_mca(nwa: Nwa, k: int) -> Mca:
    """Product-state monitor-counter automaton simulating a width-k nested automaton.

    States track the master and up to k running slaves, each pinned to a
    counter. Invocation becomes a start on the lowest free counter; since a
    start pins the counter to 0, the slave's first-letter weight is folded
    into its next add. A terminate occupies the counter's instruction slot for
    one step, so a fresh run arriving at the release step takes the next free
    counter; k+1 counters always suffice and are allocated only when needed.
    """
    from .width import has_width

    ok, witness = has_width(nwa, k)
    if not ok:
        raise PreconditionError(f"input exceeds width {k}, witness {witness}")

    capacity = k + 1
    # slot: None | (slave_index, slave_state, pending_weight)
    def successors(q: int, slots: tuple, a: int) -> Iterator[tuple[int, tuple, tuple[Instr, ...]]]:
        releasing = [
            j
            for j, slot in enumerate(slots)
            if slot is not None and slot[1] in nwa.slave(slot[0]).base.accepting
        ]
        base = list(slots)
        for j in releasing:
            base[j] = None
        for q2, label in nwa.master.succ(q, a):
            # moves for surviving slots, all required
            per_slot: list[list[tuple[int, tuple, Instr]]] = []
            dead = False
            for j, slot in enumerate(base):
                if slot is None:
                    continue
                i, s, pending = slot
                moves = []
                for s2, wt in nwa.slave(i).base.succ(s, a):
                    eff = nwa.slave(i).effective_weight(wt)
                    moves.append((j, (i, s2, 0), Instr.add(eff + pending)))
                if not moves:
                    dead = True
                    break
                per_slot.append(moves)
            if dead:
                continue
            # choices for the invoked slave, None meaning a silent move
            new_choices: list[Optional[tuple[int, int, int]]]
            if nwa.is_dummy(label):
                new_choices = [None]
            else:
                aut = nwa.slave(label).base
                starts: list[Optional[tuple[int, int, int]]] = []
                silent = False
                for s0 in sorted(aut.initials):
                    if s0 in aut.accepting:
                        silent = True  # empty-word acceptance: silent move
                        continue
                    for s1, w0 in aut.succ(s0, a):
                        eff0 = nwa.slave(label).effective_weight(w0)
                        starts.append((label, s1, eff0))
                if silent:
                    starts.append(None)
                if not starts:
                    continue  # invoked slave dies immediately, no run
                new_choices = starts
            for combo in _product(per_slot):
                for new in new_choices:
                    slots2 = list(base)
                    vec = [Instr.skip()] * capacity
                    for j in releasing:
                        vec[j] = Instr.terminate()
                    for j, slot2, ins in combo:
                        slots2[j] = slot2
                        vec[j] = ins
                    if new is not None:
                        i, s1, w0 = new
                        free = next(
                            (j for j in range(capacity) if slots2[j] is None and vec[j].kind is InstrKind.SKIP),
                            None,
                        )
                        if free is None:
                            continue  # cannot happen below width k
                        if s1 in nwa.slave(i).base.accepting:
                            if w0 != 0:
                                raise NwaError(
                                    "one-letter slave run with nonzero weight cannot be "
                                    "expressed with monitor counters"
                                )
                            # run of a single weight-0 letter: counter starts and
                            # terminates on consecutive steps, slot freed at release
                        slots2[free] = (i, s1, w0)
                        vec[free] = Instr.start()
                    yield q2, tuple(slots2), tuple(vec)

    q0s = sorted(nwa.master.initials)
    start_states = [(q, (None,) * capacity) for q in q0s]
    index: dict[tuple, int] = {}
    names: list[str] = []
    order: list[tuple] = []

    def intern(st) -> int:
        if st not in index:
            index[st] = len(order)
            order.append(st)
            q, slots = st
            parts = [nwa.master.state_names[q]]
            for slot in slots:
                parts.append(
                    "_" if slot is None else f"B{slot[0]}.{nwa.slave(slot[0]).base.state_names[slot[1]]}.{slot[2]}"
                )
            names.append("|".join(parts))
        return index[st]

    for st in start_states:
        intern(st)
    out_trans = []
    todo = list(start_states)
    seen = set(start_states)
    used = 0
    while todo:
        st = todo.pop()
        q, slots = st
        for a in range(len(nwa.alphabet)):
            for q2, slots2, vec in successors(q, slots, a):
                st2 = (q2, slots2)
                out_trans.append((intern(st), a, intern(st2), vec))
                for j, ins in enumerate(vec):
                    if ins.kind is not InstrKind.SKIP:
                        used = max(used, j + 1)
                if st2 not in seen:
                    seen.add(st2)
                    todo.append(st2)
    n_counters = used
    trimmed = tuple(
        (q, a, q2, vec[:n_counters]) for q, a, q2, vec in sorted(
            out_trans, key=lambda t: (t[0], t[1], t[2], tuple(map(str, t[3])))
        )
    )
    accepting = frozenset(i for i, (q, _) in enumerate(order) if q in nwa.master.accepting)
    return Mca(
        alphabet=nwa.alphabet,
        n_states=len(order),
        state_names=tuple(names),
        initials=frozenset(intern(st) for st in start_states),
        accepting=accepting,
        n_counters=n_counters,
        transitions=trimmed,
        name=(nwa.name + "_as_mca") if nwa.name else "",
    )


def _product(choices):
    if not choices:
        yield ()
        return
    head, *rest = choices
    for h in head:
        for r in _product(rest):
            yield (h,) + r

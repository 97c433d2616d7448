"""Core data model: alphabets, labeled/weighted automata, nested automata,
configurations, exact values, and the finite/limit-average value functions.

All types are immutable after construction; operations are pure functions.
Weights are constrained to signed 64-bit range and accumulation is checked,
so a decision is never silently corrupted by wraparound.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class NwaError(Exception):
    """Base class for errors raised by this package."""


class OverflowLimitError(NwaError):
    """Signed 64-bit accumulation limit exceeded."""


class NondeterministicInputError(NwaError):
    """An operation that requires a deterministic automaton got one that is not."""


class WidthExceededError(NwaError):
    """More slave automata became simultaneously active than the allowed cap."""

    def __init__(self, position: int):
        super().__init__(f"width cap exceeded at position {position}")
        self.position = position


class PreconditionError(NwaError):
    """A documented operation precondition does not hold."""


def _check64(x: int) -> int:
    if x < INT64_MIN or x > INT64_MAX:
        raise OverflowLimitError(f"value {x} exceeds signed 64-bit range")
    return x


class ValueFn(enum.Enum):
    """Value functions: SUM / SUM_PLUS aggregate finite runs, LIMAVG infinite ones."""

    SUM = "sum"
    SUM_PLUS = "sum+"
    LIMAVG = "limavg"


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free set of letter identifiers, indexable by dense ids."""

    letters: tuple[str, ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("alphabet letters must be distinct")

    @cached_property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.letters)}

    def __len__(self) -> int:
        return len(self.letters)

    def id_of(self, letter: str) -> int:
        try:
            return self.index[letter]
        except KeyError:
            raise KeyError(f"letter {letter!r} not in alphabet") from None


@dataclass(frozen=True)
class LabeledAutomaton:
    """Finite automaton whose transitions carry an integer label.

    States are dense integers 0..n_states-1 with display names kept for
    round-tripping textual formats. For slaves the label is a weight, for
    masters it is a slave index.
    """

    alphabet: Alphabet
    n_states: int
    state_names: tuple[str, ...]
    initials: frozenset[int]
    transitions: tuple[tuple[int, int, int, int], ...]  # (from, letter_id, to, label)
    accepting: frozenset[int]

    @cached_property
    def by_source(self) -> dict[tuple[int, int], tuple[tuple[int, int], ...]]:
        """(state, letter_id) -> ((to, label), ...) in canonical order."""
        table: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for q, a, q2, lab in self.transitions:
            table.setdefault((q, a), []).append((q2, lab))
        return {k: tuple(sorted(v)) for k, v in table.items()}

    def succ(self, state: int, letter_id: int) -> tuple[tuple[int, int], ...]:
        return self.by_source.get((state, letter_id), ())

    def det_succ(self, state: int, letter_id: int) -> Optional[tuple[int, int]]:
        """The unique (to, label) successor, or None when the run dies."""
        out = self.succ(state, letter_id)
        if not out:
            return None
        if len(out) > 1:
            raise NondeterministicInputError(
                f"state {state} has {len(out)} transitions on letter id {letter_id}"
            )
        return out[0]

    def is_deterministic(self) -> bool:
        if len(self.initials) != 1:
            return False
        return all(len(v) <= 1 for v in self.by_source.values())


@dataclass(frozen=True)
class WeightedAutomaton:
    """Integer-weighted automaton over finite words with a Sum-family value function.

    SUM_PLUS takes absolute values of the labels at evaluation time; the labels
    themselves may be any integer in 64-bit range.
    """

    base: LabeledAutomaton
    value_fn: ValueFn

    def effective_weight(self, label: int) -> int:
        return abs(label) if self.value_fn is ValueFn.SUM_PLUS else label


@dataclass(frozen=True)
class Nwa:
    """Nested weighted automaton: a master whose labels index slave automata.

    Master labels are 1-based slave indexes. A slave is a dummy iff its unique
    initial state is accepting and it has no transitions; invoking a dummy is a
    silent move.
    """

    master: LabeledAutomaton
    slaves: tuple[WeightedAutomaton, ...]
    master_value_fn: ValueFn = ValueFn.LIMAVG
    name: str = ""

    @property
    def alphabet(self) -> Alphabet:
        return self.master.alphabet

    def slave(self, index: int) -> WeightedAutomaton:
        """Slave by 1-based index."""
        return self.slaves[index - 1]

    def is_dummy(self, index: int) -> bool:
        s = self.slave(index).base
        if s.transitions or len(s.initials) != 1:
            return False
        return next(iter(s.initials)) in s.accepting

    def slave_initial(self, index: int) -> int:
        s = self.slave(index).base
        if len(s.initials) != 1:
            raise NondeterministicInputError(f"slave {index} has {len(s.initials)} initial states")
        return next(iter(s.initials))

    def min_effective_weight(self) -> int:
        """Least effective slave weight; 0 when no slave has a transition."""
        best = 0
        for sl in self.slaves:
            for _, _, _, lab in sl.base.transitions:
                w = sl.effective_weight(lab)
                if w < best:
                    best = w
        return best


@dataclass(frozen=True)
class Configuration:
    """Master state plus the states of active slaves, least recently invoked first."""

    master_state: int
    slots: tuple[tuple[int, int], ...] = ()  # (slave index, slave state)

    def __str__(self) -> str:
        inner = ", ".join(f"B{i}@{s}" for i, s in self.slots)
        return f"({self.master_state}; [{inner}])"


class ValueTag(enum.Enum):
    FINITE = "finite"
    NEG_INFINITY = "neg-infinity"
    PLUS_INFINITY = "plus-infinity"
    BOTTOM = "bottom"


@dataclass(frozen=True, order=False)
class ValueResult:
    """Value of a word: an exact rational, one of the infinities, or bottom."""

    tag: ValueTag
    value: Optional[Fraction] = None

    def __post_init__(self):
        if self.tag is ValueTag.FINITE:
            if self.value is None:
                raise ValueError("finite result needs a value")
            object.__setattr__(self, "value", Fraction(self.value))
        elif self.value is not None:
            raise ValueError(f"{self.tag} carries no value")

    @staticmethod
    def finite(value) -> "ValueResult":
        return ValueResult(ValueTag.FINITE, Fraction(value))

    def is_finite(self) -> bool:
        return self.tag is ValueTag.FINITE

    def sort_key(self):
        """Total order with -inf < finite < +inf; bottom is not comparable."""
        if self.tag is ValueTag.BOTTOM:
            raise ValueError("bottom has no place in the value order")
        rank = {ValueTag.NEG_INFINITY: 0, ValueTag.FINITE: 1, ValueTag.PLUS_INFINITY: 2}[self.tag]
        return (rank, self.value if self.value is not None else Fraction(0))

    def __str__(self) -> str:
        if self.tag is ValueTag.FINITE:
            return str(self.value)
        return {ValueTag.NEG_INFINITY: "-inf", ValueTag.PLUS_INFINITY: "+inf", ValueTag.BOTTOM: "bottom"}[self.tag]


NEG_INFINITY = ValueResult(ValueTag.NEG_INFINITY)
PLUS_INFINITY = ValueResult(ValueTag.PLUS_INFINITY)
BOTTOM = ValueResult(ValueTag.BOTTOM)


@dataclass(frozen=True)
class Threshold:
    """Rational threshold; strict=True reads '<', otherwise '<='."""

    value: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def admits(self, v: Fraction) -> bool:
        return v < self.value if self.strict else v <= self.value

    def __str__(self) -> str:
        return f"{'<' if self.strict else '<='} {self.value}"


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word prefix . period^omega over letter identifiers."""

    prefix: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        if not self.period:
            raise ValueError("lasso period must be nonempty")

    def letter_at(self, position: int) -> str:
        """1-based position in the infinite word."""
        i = position - 1
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __str__(self) -> str:
        return f"{' '.join(self.prefix)} | {' '.join(self.period)}"


# ---------------------------------------------------------------------------
# Operations


def finite_value(value_fn: ValueFn, weights: Sequence[int]) -> int:
    """Sum or absolute-sum of a finite weight sequence, 64-bit checked.

    The empty sequence yields 0 by convention; callers that must treat an
    empty run as silent handle that before calling.
    """
    if value_fn not in (ValueFn.SUM, ValueFn.SUM_PLUS):
        raise ValueError(f"finite_value needs a finite-word value function, got {value_fn}")
    total = 0
    for w in weights:
        total += abs(w) if value_fn is ValueFn.SUM_PLUS else w
        _check64(total)
    return total


MaybeInt = Optional[int]  # None is the silent (bottom) entry in value sequences


def limavg_periodic(prefix_vals: Sequence[MaybeInt], period_vals: Sequence[MaybeInt]) -> ValueResult:
    """Limit average of an ultimately periodic value sequence with silent entries.

    Silent (None) entries are removed first. A period with no non-silent entry
    means only finitely many values occur, which fails acceptance, hence +inf.
    Otherwise the liminf of partial averages equals the period mean and the
    prefix does not affect it.
    """
    if not period_vals:
        raise ValueError("period must be nonempty")
    period = [v for v in period_vals if v is not None]
    if not period:
        return PLUS_INFINITY
    total = 0
    for v in period:
        total += v
        _check64(total)
    return ValueResult.finite(Fraction(total, len(period)))


def validate_nwa(nwa: Nwa) -> list[str]:
    """Structural diagnostics; empty list iff all type invariants hold."""
    out: list[str] = []
    out.extend(_validate_labeled(nwa.master, "master"))
    n = len(nwa.slaves)
    for q, a, q2, lab in nwa.master.transitions:
        if not (1 <= lab <= n):
            out.append(f"bad-slave-index: master transition ({q},{a},{q2}) invokes slave {lab} of {n}")
    for i, sl in enumerate(nwa.slaves, start=1):
        out.extend(_validate_labeled(sl.base, f"slave {i}"))
        if sl.value_fn not in (ValueFn.SUM, ValueFn.SUM_PLUS):
            out.append(f"bad-slave-valuefn: slave {i} has {sl.value_fn.value}")
        for q, a, q2, lab in sl.base.transitions:
            if lab < INT64_MIN or lab > INT64_MAX:
                out.append(f"bad-weight: slave {i} transition ({q},{a},{q2}) weight {lab} out of 64-bit range")
        if sl.base.alphabet.letters != nwa.alphabet.letters:
            out.append(f"bad-alphabet: slave {i} alphabet differs from master alphabet")
    if nwa.master_value_fn is not ValueFn.LIMAVG:
        out.append(f"bad-master-valuefn: {nwa.master_value_fn.value}")
    return out


def _validate_labeled(aut: LabeledAutomaton, where: str) -> list[str]:
    out = []
    if aut.n_states <= 0:
        out.append(f"{where}: no states")
    if len(aut.state_names) != aut.n_states:
        out.append(f"{where}: {len(aut.state_names)} names for {aut.n_states} states")
    ok = range(aut.n_states)
    for q in aut.initials:
        if q not in ok:
            out.append(f"{where}: initial state {q} out of range")
    if not aut.initials:
        out.append(f"{where}: no initial state")
    for q in aut.accepting:
        if q not in ok:
            out.append(f"{where}: accepting state {q} out of range")
    for q, a, q2, _ in aut.transitions:
        if q not in ok or q2 not in ok:
            out.append(f"{where}: transition ({q},{a},{q2}) endpoint out of range")
        if not (0 <= a < len(aut.alphabet)):
            out.append(f"{where}: transition ({q},{a},{q2}) letter id out of range")
    return out


def is_deterministic(nwa: Nwa) -> tuple[bool, Optional[str]]:
    """Whether master and slaves are deterministic and slave languages prefix-free.

    Prefix-freeness is decided structurally on the trimmed slave: the language
    is prefix-free iff no reachable accepting state has an outgoing transition
    into the co-reachable part.
    """
    if len(nwa.master.initials) != 1:
        return False, "master: multiple initial states"
    for key, succs in sorted(nwa.master.by_source.items()):
        if len(succs) > 1:
            return False, f"master: {len(succs)} transitions from state {key[0]} on letter id {key[1]}"
    for i, sl in enumerate(nwa.slaves, start=1):
        aut = sl.base
        if len(aut.initials) != 1:
            return False, f"slave {i}: multiple initial states"
        for key, succs in sorted(aut.by_source.items()):
            if len(succs) > 1:
                return False, f"slave {i}: {len(succs)} transitions from state {key[0]} on letter id {key[1]}"
        site = _prefix_free_violation(aut)
        if site is not None:
            return False, f"slave {i}: accepting state {site} has a continuation, language not prefix-free"
    return True, None


def _reachable(aut: LabeledAutomaton) -> set[int]:
    seen = set(aut.initials)
    todo = list(aut.initials)
    fwd: dict[int, list[int]] = {}
    for q, _, q2, _ in aut.transitions:
        fwd.setdefault(q, []).append(q2)
    while todo:
        q = todo.pop()
        for q2 in fwd.get(q, ()):
            if q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return seen


def _coreachable(aut: LabeledAutomaton) -> set[int]:
    seen = set(aut.accepting)
    todo = list(aut.accepting)
    back: dict[int, list[int]] = {}
    for q, _, q2, _ in aut.transitions:
        back.setdefault(q2, []).append(q)
    while todo:
        q = todo.pop()
        for q0 in back.get(q, ()):
            if q0 not in seen:
                seen.add(q0)
                todo.append(q0)
    return seen


def _prefix_free_violation(aut: LabeledAutomaton) -> Optional[int]:
    reach = _reachable(aut)
    coreach = _coreachable(aut)
    for q, _, q2, _ in sorted(aut.transitions):
        if q in aut.accepting and q in reach and q2 in coreach:
            return q
    return None


def normalize_slaves(nwa: Nwa) -> Nwa:
    """Equivalent NWA in which no slave accepting state has outgoing transitions.

    Each offending accepting state s is cloned: s keeps its transitions and
    loses acceptance, while a fresh accepting copy receives every transition
    into s (and initiality, where s was initial). Language and per-word
    minimal values of each slave are unchanged.
    """
    new_slaves = []
    changed = False
    for sl in nwa.slaves:
        aut = sl.base
        offenders = sorted({q for q, _, _, _ in aut.transitions if q in aut.accepting})
        if not offenders:
            new_slaves.append(sl)
            continue
        changed = True
        clone_of = {}
        names = list(aut.state_names)
        n = aut.n_states
        for s in offenders:
            clone_of[s] = n
            names.append(aut.state_names[s] + "'acc")
            n += 1
        transitions = []
        for q, a, q2, lab in aut.transitions:
            transitions.append((q, a, q2, lab))
            if q2 in clone_of:
                transitions.append((q, a, clone_of[q2], lab))
        initials = set(aut.initials)
        for s in offenders:
            if s in aut.initials:
                initials.add(clone_of[s])
        accepting = (set(aut.accepting) - set(offenders)) | set(clone_of.values())
        new_slaves.append(
            WeightedAutomaton(
                LabeledAutomaton(
                    alphabet=aut.alphabet,
                    n_states=n,
                    state_names=tuple(names),
                    initials=frozenset(initials),
                    transitions=tuple(sorted(set(transitions))),
                    accepting=frozenset(accepting),
                ),
                sl.value_fn,
            )
        )
    if not changed:
        return nwa
    return Nwa(nwa.master, tuple(new_slaves), nwa.master_value_fn, nwa.name)

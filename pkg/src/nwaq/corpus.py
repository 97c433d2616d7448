"""Golden automata used across the test suites.

Each instance is reconstructed from its prose description and validated in
tests against the documented facts (determinism, width, specific word values,
infima). The request/grant counter slave here yields the response-time
sequence 5,4,3,1,1 on r r r # r g r g..., which pins its weight structure:
1 per letter before the grant, 0 on the grant itself.
"""

from __future__ import annotations

from .core import Alphabet, LabeledAutomaton, Nwa, ValueFn, WeightedAutomaton
from .mca import Instr, Mca


def _automaton(alphabet: Alphabet, states: list[str], initials, transitions, accepting) -> LabeledAutomaton:
    idx = {s: i for i, s in enumerate(states)}
    return LabeledAutomaton(
        alphabet=alphabet,
        n_states=len(states),
        state_names=tuple(states),
        initials=frozenset(idx[s] for s in initials),
        transitions=tuple(sorted((idx[q], alphabet.id_of(a), idx[q2], lab) for q, a, q2, lab in transitions)),
        accepting=frozenset(idx[s] for s in accepting),
    )


def _dummy(alphabet: Alphabet) -> WeightedAutomaton:
    return WeightedAutomaton(_automaton(alphabet, ["d0"], ["d0"], [], ["d0"]), ValueFn.SUM)


def _response_time_slave(alphabet: Alphabet, grant: str = "g") -> WeightedAutomaton:
    """Sum+ slave counting letters from invocation up to, excluding, the grant."""
    trans = [("s0", a, "s0", 1) for a in alphabet.letters if a != grant]
    trans.append(("s0", grant, "s1", 0))
    return WeightedAutomaton(_automaton(alphabet, ["s0", "s1"], ["s0"], trans, ["s1"]), ValueFn.SUM_PLUS)


def art() -> Nwa:
    """ART: every request invokes the response-time slave; unbounded width."""
    sigma = Alphabet(("r", "g", "hash"))
    master = _automaton(
        sigma,
        ["m0"],
        ["m0"],
        [("m0", "r", "m0", 1), ("m0", "g", "m0", 2), ("m0", "hash", "m0", 2)],
        ["m0"],
    )
    return Nwa(master, (_response_time_slave(sigma), _dummy(sigma)), name="art")


def art1() -> Nwa:
    """1-ART: ART restricted to (r hash* g hash*)^omega; width 1."""
    sigma = Alphabet(("r", "g", "hash"))
    master = _automaton(
        sigma,
        ["u_init", "u_wait", "u_idle"],
        ["u_init"],
        [
            ("u_init", "r", "u_wait", 1),
            ("u_wait", "hash", "u_wait", 2),
            ("u_wait", "g", "u_idle", 2),
            ("u_idle", "hash", "u_idle", 2),
            ("u_idle", "r", "u_wait", 1),
        ],
        ["u_idle"],
    )
    return Nwa(master, (_response_time_slave(sigma), _dummy(sigma)), name="art1")


def k_art(k: int) -> Nwa:
    """k-ART: at most k requests pending before each grant; width k."""
    if k < 1:
        raise ValueError("k must be positive")
    sigma = Alphabet(("r", "g", "hash"))
    states = [f"p{i}" for i in range(k + 1)]
    trans = []
    for i in range(k + 1):
        trans.append((f"p{i}", "hash", f"p{i}", 2))
        if i < k:
            trans.append((f"p{i}", "r", f"p{i+1}", 1))
        if i >= 1:
            trans.append((f"p{i}", "g", "p0", 2))
    master = _automaton(sigma, states, ["p0"], trans, ["p0"])
    return Nwa(master, (_response_time_slave(sigma), _dummy(sigma)), name=f"k_art_{k}")


def art_types(k: int) -> Nwa:
    """1-ART[k]: k request/grant types, each non-overlapping with itself; width k.

    Master states are the sets of pending types; between two grants of a type
    there is at most one request of that type.
    """
    if k < 1:
        raise ValueError("k must be positive")
    letters = tuple(f"r{i}" for i in range(1, k + 1)) + tuple(f"g{i}" for i in range(1, k + 1)) + ("hash",)
    sigma = Alphabet(letters)
    subsets = []
    for mask in range(1 << k):
        subsets.append(frozenset(i + 1 for i in range(k) if mask & (1 << i)))
    name_of = {s: "S" + "".join(str(i) for i in sorted(s)) if s else "S" for s in subsets}
    dummy_index = k + 1
    trans = []
    for s in subsets:
        trans.append((name_of[s], "hash", name_of[s], dummy_index))
        for i in range(1, k + 1):
            if i not in s:
                trans.append((name_of[s], f"r{i}", name_of[s | {i}], i))
            else:
                trans.append((name_of[s], f"g{i}", name_of[s - {i}], dummy_index))
    master = _automaton(sigma, [name_of[s] for s in subsets], [name_of[frozenset()]], trans, [name_of[frozenset()]])
    slaves = tuple(_response_time_slave(sigma, grant=f"g{i}") for i in range(1, k + 1)) + (_dummy(sigma),)
    return Nwa(master, slaves, name=f"art_types_{k}")


def average_excess() -> Nwa:
    """Average excess over dollar-separated blocks; deterministic, width 1.

    The block slave is invoked at the first content letter of each block and
    reads through the closing dollar, summing +1/-1/0 for r/g/#. Invoking it
    at the block's first letter rather than at the separator keeps a single
    slave active at a time under run-from-invocation-position semantics.
    """
    sigma = Alphabet(("r", "g", "hash", "dollar"))
    content = ("r", "g", "hash")
    master_trans = [("m_pre", a, "m_pre", 2) for a in content]
    master_trans.append(("m_pre", "dollar", "m_sep", 2))
    master_trans.append(("m_sep", "dollar", "m_sep", 2))
    master_trans.extend(("m_sep", a, "m_in", 1) for a in content)
    master_trans.extend(("m_in", a, "m_in", 2) for a in content)
    master_trans.append(("m_in", "dollar", "m_sep", 2))
    master = _automaton(sigma, ["m_pre", "m_sep", "m_in"], ["m_pre"], master_trans, ["m_sep"])
    slave_trans = [("c0", "r", "c0", 1), ("c0", "g", "c0", -1), ("c0", "hash", "c0", 0), ("c0", "dollar", "c1", 0)]
    block = WeightedAutomaton(_automaton(sigma, ["c0", "c1"], ["c0"], slave_trans, ["c1"]), ValueFn.SUM)
    return Nwa(master, (block, _dummy(sigma)), name="average_excess")


def _counting_slave(sigma: Alphabet, step: int) -> WeightedAutomaton:
    """Sum slave adding `step` per a-letter, terminating at the first hash."""
    trans = [
        ("v0", "one", "v0", 0),
        ("v0", "two", "v0", 0),
        ("v0", "a", "v0", step),
        ("v0", "hash", "v1", 0),
    ]
    return WeightedAutomaton(_automaton(sigma, ["v0", "v1"], ["v0"], trans, ["v1"]), ValueFn.SUM)


def cond_a1() -> Nwa:
    """Blocks 1 2 a^m #: the incrementing slave is invoked first; infimum 0."""
    sigma = Alphabet(("one", "two", "a", "hash"))
    master = _automaton(
        sigma,
        ["m0", "m1", "m2"],
        ["m0"],
        [
            ("m0", "one", "m1", 1),
            ("m1", "two", "m2", 2),
            ("m2", "a", "m2", 3),
            ("m2", "hash", "m0", 3),
        ],
        ["m0"],
    )
    return Nwa(master, (_counting_slave(sigma, 1), _counting_slave(sigma, -1), _dummy(sigma)), name="cond_a1")


def cond_a2() -> Nwa:
    """Blocks 2 1 a^m #: the decrementing slave is invoked first; infimum -inf."""
    sigma = Alphabet(("one", "two", "a", "hash"))
    master = _automaton(
        sigma,
        ["n0", "n1", "n2"],
        ["n0"],
        [
            ("n0", "two", "n1", 2),
            ("n1", "one", "n2", 1),
            ("n2", "a", "n2", 3),
            ("n2", "hash", "n0", 3),
        ],
        ["n0"],
    )
    return Nwa(master, (_counting_slave(sigma, 1), _counting_slave(sigma, -1), _dummy(sigma)), name="cond_a2")


def mca_counter() -> Mca:
    """One-counter automaton: start on #, add 1 per a, terminate on the next #."""
    sigma = Alphabet(("hash", "a"))
    states = ("q0", "q1")
    idx = {s: i for i, s in enumerate(states)}
    trans = [
        (idx["q0"], sigma.id_of("hash"), idx["q1"], (Instr.start(),)),
        (idx["q0"], sigma.id_of("a"), idx["q0"], (Instr.skip(),)),
        (idx["q1"], sigma.id_of("a"), idx["q1"], (Instr.add(1),)),
        (idx["q1"], sigma.id_of("hash"), idx["q0"], (Instr.terminate(),)),
    ]
    return Mca(
        alphabet=sigma,
        n_states=2,
        state_names=states,
        initials=frozenset({idx["q0"]}),
        accepting=frozenset({idx["q0"]}),
        n_counters=1,
        transitions=tuple(sorted(trans, key=lambda t: (t[0], t[1], t[2]))),
        name="mca_counter",
    )


def corpus() -> dict[str, Nwa]:
    """All NWA instances, keyed by name."""
    items = [
        art(),
        art1(),
        k_art(2),
        k_art(3),
        art_types(2),
        art_types(3),
        average_excess(),
        cond_a1(),
        cond_a2(),
    ]
    return {n.name: n for n in items}


#: documented width bound per corpus automaton, None for unbounded
KNOWN_WIDTH: dict[str, int | None] = {
    "art": None,
    "art1": 1,
    "k_art_2": 2,
    "k_art_3": 3,
    "art_types_2": 2,
    "art_types_3": 3,
    "average_excess": 1,
    "cond_a1": 2,
    "cond_a2": 2,
}

#: corpus instances on which the negative-descent condition fails (finite infimum)
STAR_FAILING = ("art1", "k_art_2", "k_art_3", "art_types_2", "art_types_3", "cond_a1")

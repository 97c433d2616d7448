import random

from nwaq.core import (
    Alphabet,
    Configuration,
    LabeledAutomaton,
    Nwa,
    ValueFn,
    WeightedAutomaton,
    is_deterministic,
    normalize_slaves,
)
from nwaq.determinize import (
    config_bound,
    config_initials,
    config_successors,
    count_configurations,
    explore,
    materialize_deterministic,
)
from nwaq.oracle import enumerate_lasso_infimum
from nwaq.width import has_width


def _tiny(alphabet, states, initials, trans, acc):
    idx = {s: i for i, s in enumerate(states)}
    return LabeledAutomaton(
        alphabet,
        len(states),
        tuple(states),
        frozenset(idx[s] for s in initials),
        tuple(sorted((idx[q], alphabet.id_of(a), idx[p], w) for q, a, p, w in trans)),
        frozenset(idx[s] for s in acc),
    )


def test_config_initials(a_art1):
    assert config_initials(a_art1) == {Configuration(next(iter(a_art1.master.initials)), ())}


def test_config_initials_two_masters():
    sigma = Alphabet(("a",))
    dummy = WeightedAutomaton(_tiny(sigma, ["d"], ["d"], [], ["d"]), ValueFn.SUM)
    master = _tiny(sigma, ["m0", "m1"], ["m0", "m1"], [("m0", "a", "m1", 1)], ["m1"])
    assert len(config_initials(Nwa(master, (dummy,)))) == 2


def test_config_initials_unchanged_by_normalization(a_ae):
    assert config_initials(normalize_slaves(a_ae)) == config_initials(a_ae)


def test_deterministic_single_edge(a_art1):
    configs, edges = explore(a_art1, 1)
    per_key = {}
    for e in edges:
        if not e.width_overflow:
            per_key.setdefault((e.from_config, e.letter), []).append(e)
    assert all(len(v) == 1 for v in per_key.values())


def test_nondet_master_and_slot_choices_multiply():
    sigma = Alphabet(("a",))
    slave = WeightedAutomaton(
        _tiny(sigma, ["s0", "s1"], ["s0"], [("s0", "a", "s0", 1), ("s0", "a", "s1", 2)], ["s1"]),
        ValueFn.SUM,
    )
    master = _tiny(sigma, ["m0", "m1"], ["m0"], [("m0", "a", "m0", 1), ("m0", "a", "m1", 1)], ["m0"])
    nwa = Nwa(master, (slave,))
    start = Configuration(0, ((1, 0),))  # one active slave with two moves
    edges = config_successors(nwa, start, 0, cap=4)
    # 2 master choices x 2 slot choices x 2 fresh-slot choices
    assert len(edges) == 8


def test_forced_release_recorded(a_art1):
    # the slot sits in an accepting state; every edge releases it
    accepting_state = next(iter(a_art1.slaves[0].base.accepting))
    c = Configuration(2, ((1, accepting_state),))
    for a in range(len(a_art1.alphabet)):
        for e in config_successors(a_art1, c, a, cap=2):
            assert e.returned == (1,)


def test_count_configurations(a_art1, a_ae):
    n = count_configurations(a_art1, 1)
    assert 0 < n <= config_bound(a_art1, 1)
    # brute count by explicit exploration
    configs, _ = explore(a_ae, 1)
    assert count_configurations(a_ae, 1) == len(configs)


def test_count_dummy_only():
    sigma = Alphabet(("a", "b"))
    dummy = WeightedAutomaton(_tiny(sigma, ["d"], ["d"], [], ["d"]), ValueFn.SUM)
    master = _tiny(sigma, ["m0", "m1"], ["m0"], [("m0", "a", "m1", 1), ("m1", "b", "m0", 1)], ["m0"])
    assert count_configurations(Nwa(master, (dummy,)), 2) == 2


def _random_nondet_nwa(seed: int) -> Nwa:
    rng = random.Random(seed)
    sigma = Alphabet(("a", "b"))
    n_master = rng.randint(2, 3)
    n_slaves = rng.randint(1, 2)
    slaves = []
    for _ in range(n_slaves):
        n_states = rng.randint(2, 3)
        states = [f"s{i}" for i in range(n_states)]
        trans = []
        for _ in range(rng.randint(2, 5)):
            trans.append(
                (
                    rng.randrange(n_states - 1),
                    rng.choice(sigma.letters),
                    rng.randrange(n_states),
                    rng.randint(-2, 2),
                )
            )
        aut = LabeledAutomaton(
            sigma,
            n_states,
            tuple(states),
            frozenset({0}),
            tuple(sorted({(q, sigma.id_of(a), p, w) for q, a, p, w in trans})),
            frozenset({n_states - 1}),
        )
        slaves.append(WeightedAutomaton(aut, rng.choice((ValueFn.SUM, ValueFn.SUM_PLUS))))
    dummy = WeightedAutomaton(_tiny(sigma, ["d"], ["d"], [], ["d"]), ValueFn.SUM)
    slaves.append(dummy)
    dummy_index = len(slaves)
    m_states = [f"m{i}" for i in range(n_master)]
    trans = []
    for _ in range(rng.randint(3, 6)):
        trans.append(
            (
                rng.randrange(n_master),
                rng.choice(sigma.letters),
                rng.randrange(n_master),
                rng.randint(1, dummy_index),
            )
        )
    master = LabeledAutomaton(
        sigma,
        n_master,
        tuple(m_states),
        frozenset({0}),
        tuple(sorted({(q, sigma.id_of(a), p, l) for q, a, p, l in trans})),
        frozenset({rng.randrange(n_master)}),
    )
    return Nwa(master, tuple(slaves), name=f"rand{seed}")


def test_materialize_deterministic_output_properties():
    for seed in range(6):
        nwa = _random_nondet_nwa(seed)
        k = 2
        det = materialize_deterministic(nwa, k)
        ok, site = is_deterministic(det)
        assert ok, site
        assert has_width(det, k)[0]


def test_materialize_preserves_bounded_infimum():
    for seed in range(8):
        nwa = _random_nondet_nwa(100 + seed)
        det = materialize_deterministic(nwa, 2)
        vi, _ = enumerate_lasso_infimum(nwa, 2, 4, 2)
        vo, _ = enumerate_lasso_infimum(det, 2, 4, 2)
        assert vi == vo, (seed, vi, vo)


def test_materialize_deterministic_input_matches_config_graph(a_art1):
    det = materialize_deterministic(a_art1, 1)
    ok, _ = is_deterministic(det)
    assert ok
    configs, edges = explore(a_art1, 1)
    live = [e for e in edges if not e.width_overflow]
    # one output letter per live edge of the input explorer
    assert len(det.alphabet) == len(live)
    vi, _ = enumerate_lasso_infimum(a_art1, 2, 4, 1)
    vo, _ = enumerate_lasso_infimum(det, 2, 4, 1)
    assert vi == vo


def test_materialize_edges_biject_with_letters():
    # each choice letter appears as exactly one live edge of the output explorer
    from collections import Counter

    for seed in range(4):
        nwa = _random_nondet_nwa(300 + seed)
        det = materialize_deterministic(nwa, 2)
        _, edges = explore(det, 2)
        live = [e for e in edges if not e.width_overflow]
        if not live:
            continue  # degenerate sample: the input has no live step at all
        counts = Counter(e.letter for e in live)
        assert len(live) == len(det.alphabet)
        assert max(counts.values()) == 1


def test_materialize_omits_unreachable_slaves():
    sigma = Alphabet(("a",))
    used = WeightedAutomaton(
        _tiny(sigma, ["s0", "s1"], ["s0"], [("s0", "a", "s1", 1)], ["s1"]), ValueFn.SUM
    )
    unused = WeightedAutomaton(
        _tiny(sigma, ["u0", "u1"], ["u0"], [("u0", "a", "u1", 5)], ["u1"]), ValueFn.SUM
    )
    dummy = WeightedAutomaton(_tiny(sigma, ["d"], ["d"], [], ["d"]), ValueFn.SUM)
    master = _tiny(sigma, ["m"], ["m"], [("m", "a", "m", 1)], ["m"])
    nwa = Nwa(master, (used, unused, dummy))
    det = materialize_deterministic(nwa, 2)
    # slave 2 never runs: only copies of slave 1 plus the dummy remain
    assert len(det.slaves) <= 1 + 2  # at most two copies of slave 1 and a dummy

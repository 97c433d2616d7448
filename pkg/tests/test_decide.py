from fractions import Fraction

from nwaq.core import (
    Alphabet,
    LabeledAutomaton,
    LassoWord,
    NEG_INFINITY,
    Nwa,
    PLUS_INFINITY,
    Threshold,
    ValueFn,
    ValueResult,
    WeightedAutomaton,
)
from nwaq.corpus import KNOWN_WIDTH, STAR_FAILING, art_types, k_art
from nwaq.decide import Pipeline, emptiness, infimum, mirror, universality_deterministic
from nwaq.oracle import evaluate_lasso, lasso_values, min_partial_average


def test_cond_examples(a_cond1, a_cond2):
    assert emptiness(a_cond1, 2, Threshold(Fraction(0)))[0]
    assert not emptiness(a_cond1, 2, Threshold(Fraction(-1)))[0]
    assert emptiness(a_cond2, 2, Threshold(Fraction(-(10**6))))[0]
    assert infimum(a_cond1, 2)[0] == ValueResult.finite(0)
    assert infimum(a_cond2, 2)[0] is NEG_INFINITY


def test_ae_unbounded(a_ae):
    answer, cert = emptiness(a_ae, 1, Threshold(Fraction(-(10**6))))
    assert answer
    # the pumped witness is deep enough for the queried threshold
    assert len(cert.pumped.period) > 10**6
    assert infimum(a_ae, 1)[0] is NEG_INFINITY


def test_art1_threshold_boundary(a_art1):
    assert infimum(a_art1, 1)[0] == ValueResult.finite(1)
    assert emptiness(a_art1, 1, Threshold(Fraction(1)))[0]
    # the infimum 1 is attained by (r g)^omega, so the strict query fails
    assert not emptiness(a_art1, 1, Threshold(Fraction(1), strict=True))[0]


def test_finite_certificates_replay(a_cond1, a_art1):
    for nwa, k in ((a_cond1, 2), (a_art1, 1)):
        value, cert = infimum(nwa, k)
        assert cert.kind == "lasso"
        assert evaluate_lasso(nwa, cert.lasso, k) == value


def test_star_certificate_dip(a_cond2, a_ae):
    for nwa, k in ((a_cond2, 2), (a_ae, 1)):
        t = Threshold(Fraction(-150))
        answer, cert = emptiness(nwa, k, t)
        assert answer and cert.kind == "star"
        assert min_partial_average(nwa, cert.pumped, k, 8) <= t.value


def test_pipeline_oracle_soundness(all_corpus):
    for name in STAR_FAILING:
        nwa = all_corpus[name]
        k = KNOWN_WIDTH[name]
        pipe = Pipeline(nwa, k)
        values = {v.value for _, v in lasso_values(nwa, 2, 6, k) if v is not PLUS_INFINITY}
        for v in sorted(values):
            assert pipe.emptiness(Threshold(v))[0], (name, v)


def test_pipeline_oracle_tightness(all_corpus):
    from nwaq.oracle import enumerate_lasso_infimum

    bounds = {
        "art1": (3, 10),
        "cond_a1": (3, 10),
        "k_art_2": (3, 10),
        "k_art_3": (3, 9),
        "art_types_2": (2, 6),
        "art_types_3": (2, 5),
    }
    for name in STAR_FAILING:
        nwa = all_corpus[name]
        k = KNOWN_WIDTH[name]
        pipe = Pipeline(nwa, k)
        star_value, _ = pipe.infimum()
        assert star_value.is_finite()
        below = Threshold(star_value.value - Fraction(1, 1000))
        assert not pipe.emptiness(below)[0], name
        mp, mper = bounds[name]
        enum_value, _ = enumerate_lasso_infimum(nwa, mp, mper, k)
        assert enum_value.is_finite()
        assert enum_value.value - star_value.value <= Fraction(1, 2), name


def test_mirror_negates_lasso_values(all_corpus):
    words = {
        "art1": LassoWord((), ("r", "hash", "g")),
        "average_excess": LassoWord((), ("dollar", "r", "g", "g")),
        "cond_a1": LassoWord((), ("one", "two", "a", "hash")),
    }
    for name, word in words.items():
        nwa = all_corpus[name]
        k = KNOWN_WIDTH[name]
        v = evaluate_lasso(nwa, word, k)
        m = evaluate_lasso(mirror(nwa), word, k)
        assert m.value == -v.value


def test_universality_constant_value():
    sigma = Alphabet(("a", "b"))

    def tiny(states, initials, trans, acc):
        idx = {s: i for i, s in enumerate(states)}
        return LabeledAutomaton(
            sigma,
            len(states),
            tuple(states),
            frozenset(idx[s] for s in initials),
            tuple(sorted((idx[q], sigma.id_of(x), idx[p], w) for q, x, p, w in trans)),
            frozenset(idx[s] for s in acc),
        )

    # every non-silent value is exactly 3
    slave = WeightedAutomaton(tiny(["s0", "s1"], ["s0"], [("s0", "a", "s1", 3)], ["s1"]), ValueFn.SUM)
    dummy = WeightedAutomaton(tiny(["d"], ["d"], [], ["d"]), ValueFn.SUM)
    master = tiny(["m"], ["m"], [("m", "a", "m", 1), ("m", "b", "m", 2)], ["m"])
    nwa = Nwa(master, (slave, dummy))
    assert universality_deterministic(nwa, 1, Threshold(Fraction(3)))
    assert not universality_deterministic(nwa, 1, Threshold(Fraction(2)))


def test_universality_art1(a_art1):
    # (r g)^omega reaches value 1 > 1/2
    assert not universality_deterministic(a_art1, 1, Threshold(Fraction(1, 2)))


def test_universality_ae_unbounded_above(a_ae):
    assert not universality_deterministic(a_ae, 1, Threshold(Fraction(10**6)))


def test_nondeterministic_pipeline():
    sigma = Alphabet(("a", "b"))

    def tiny(states, initials, trans, acc):
        idx = {s: i for i, s in enumerate(states)}
        return LabeledAutomaton(
            sigma,
            len(states),
            tuple(states),
            frozenset(idx[s] for s in initials),
            tuple(sorted((idx[q], sigma.id_of(x), idx[p], w) for q, x, p, w in trans)),
            frozenset(idx[s] for s in acc),
        )

    # the slave returns 1 after one letter or -1 after an a b pair
    slave = WeightedAutomaton(
        tiny(
            ["s0", "sa", "sb"],
            ["s0"],
            [("s0", "a", "sa", 1), ("s0", "a", "sb", -1), ("sb", "b", "sa", 0)],
            ["sa"],
        ),
        ValueFn.SUM,
    )
    dummy = WeightedAutomaton(tiny(["d"], ["d"], [], ["d"]), ValueFn.SUM)
    master = tiny(
        ["m0", "m1"], ["m0"], [("m0", "a", "m0", 1), ("m0", "a", "m1", 1), ("m1", "b", "m0", 2), ("m0", "b", "m0", 2)], ["m0"]
    )
    nwa = Nwa(master, (slave, dummy), name="nd1")
    value, cert = infimum(nwa, 2)
    assert value.is_finite()
    # nondeterministic certificates are projected to the original alphabet
    assert all(a in sigma.letters for a in cert.lasso.prefix + cert.lasso.period)
    from nwaq.oracle import enumerate_lasso_infimum

    bound, _ = enumerate_lasso_infimum(nwa, 2, 4, 2)
    assert value.sort_key() <= bound.sort_key()

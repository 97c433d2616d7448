from nwaq.core import LassoWord, NEG_INFINITY, ValueResult, is_deterministic, validate_nwa
from nwaq.corpus import KNOWN_WIDTH, corpus, mca_counter
from nwaq.decide import infimum
from nwaq.mca import validate_mca
from nwaq.oracle import evaluate_lasso, run_values
from nwaq.width import has_width, minimal_width


def test_every_instance_documented_facts(all_corpus):
    for name, nwa in all_corpus.items():
        assert validate_nwa(nwa) == [], name
        assert is_deterministic(nwa)[0], name
        want = KNOWN_WIDTH[name]
        if want is None:
            assert minimal_width(nwa, 4) is None, name
        else:
            assert minimal_width(nwa, 4) == want, name
    assert validate_mca(mca_counter()) == []


def test_art1_width(a_art1):
    assert has_width(a_art1, 1)[0]


def test_ae_paper_word_value(a_ae):
    word = LassoWord((), ("dollar", "r", "r", "hash", "g"))
    assert evaluate_lasso(a_ae, word, 1) == ValueResult.finite(1)


def test_art_paper_sequence(a_art):
    word = LassoWord(("r", "r", "r", "hash", "r", "g"), ("r", "g"))
    assert run_values(a_art, word, 64, 5) == [5, 4, 3, 1, 1]


def test_cond_a2_infimum(a_cond2):
    assert infimum(a_cond2, 2)[0] is NEG_INFINITY

"""Acceptance criteria, one test per criterion, each printing a verdict line.

All comparisons are exact (rationals or structural equality); each criterion
also asserts its stated runtime budget.
"""

import json
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from helpers import min_cycle_ratio_brute
from nwaq.cli import main as cli_main
from nwaq.core import LassoWord, NEG_INFINITY, PLUS_INFINITY, Threshold, ValueResult, WidthExceededError
from nwaq.corpus import KNOWN_WIDTH, STAR_FAILING, art, art1, average_excess, cond_a1, cond_a2, corpus, k_art, mca_counter
from nwaq.decide import Pipeline
from nwaq.determinize import materialize_deterministic
from nwaq.mca import evaluate_lasso_mca, mca_to_nwa, nwa_to_mca
from nwaq.meanpayoff import RatioGraph, infimum_ratio, threshold_emptiness
from nwaq.oracle import (
    enumerate_lasso_infimum,
    evaluate_lasso,
    lasso_values,
    min_partial_average,
    run_values,
)
from nwaq.reduce import reduce_width1
from nwaq.starcond import check_star_condition, pump_witness
from nwaq.textio import parse_mca, parse_nwa, render_mca, render_nwa
from nwaq.width import has_width

DATA = Path(__file__).resolve().parent.parent / "src" / "nwaq" / "corpus_data"


class _Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        verdict = "PASS" if exc_type is None else "FAIL"
        print(f"ACCEPTANCE {self.name}: {verdict} ({elapsed:.2f}s / {self.seconds:.0f}s budget)")
        if exc_type is None:
            assert elapsed < self.seconds, f"{self.name} beyond its runtime budget"
        return False


def test_criterion_1_paper_values_exact():
    with _Budget("1 paper values", 4.0):
        t0 = time.monotonic()
        assert Pipeline(cond_a1(), 2).infimum()[0] == ValueResult.finite(0)
        assert time.monotonic() - t0 < 1.0
        t0 = time.monotonic()
        assert Pipeline(cond_a2(), 2).infimum()[0] is NEG_INFINITY
        assert time.monotonic() - t0 < 1.0
        t0 = time.monotonic()
        word = LassoWord((), ("dollar", "r", "r", "hash", "g"))
        assert evaluate_lasso(average_excess(), word, 1) == ValueResult.finite(1)
        assert time.monotonic() - t0 < 1.0
        t0 = time.monotonic()
        seq = run_values(art(), LassoWord(("r", "r", "r", "hash", "r", "g"), ("r", "g")), 64, 5)
        assert seq == [5, 4, 3, 1, 1]
        assert time.monotonic() - t0 < 1.0


def test_criterion_2_width_facts():
    with _Budget("2 width facts", 5.0):
        assert has_width(art1(), 1) == (True, None)
        a = art()
        for k in range(1, 5):
            ok, witness = has_width(a, k)
            assert not ok
            with pytest.raises(WidthExceededError) as err:
                evaluate_lasso(a, LassoWord(witness, ("r",)), k)
            assert err.value.position == len(witness)
        for k in (2, 3):
            nwa = k_art(k)
            assert has_width(nwa, k)[0]
            assert not has_width(nwa, k - 1)[0]


def test_criterion_3_star_soundness():
    with _Budget("3 descent-condition soundness", 5.0):
        for nwa, k in ((cond_a2(), 2), (average_excess(), 1)):
            witness = check_star_condition(nwa, k)
            assert witness is not None
            dips = []
            for m in (1, 2, 4, 8):
                lasso = pump_witness(nwa, witness, k, pumps=16 * m)
                assert evaluate_lasso(nwa, lasso, k) is not PLUS_INFINITY
                dips.append(min_partial_average(nwa, lasso, k, 8))
            assert all(b < a for a, b in zip(dips, dips[1:])), nwa.name
            assert dips[-1] < Fraction(-100), nwa.name


def test_criterion_4_pipeline_oracle_agreement():
    with _Budget("4 pipeline-oracle agreement", 60.0):
        for name in STAR_FAILING:
            nwa = corpus()[name]
            k = KNOWN_WIDTH[name]
            pipe = Pipeline(nwa, k)
            finite_values = set()
            for _, value in lasso_values(nwa, 2, 6, k):
                if value is not PLUS_INFINITY:
                    finite_values.add(value.value)
            assert finite_values, name
            for v in sorted(finite_values):
                assert pipe.emptiness(Threshold(v))[0], (name, v)
            inf_value, _ = pipe.infimum()
            assert inf_value.is_finite()
            assert not pipe.emptiness(Threshold(inf_value.value - Fraction(1, 1000)))[0], name


def _random_lassos(alphabet, count, max_prefix, max_period, seed):
    rng = random.Random(seed)
    letters = alphabet.letters
    return [
        LassoWord(
            tuple(rng.choice(letters) for _ in range(rng.randint(0, max_prefix))),
            tuple(rng.choice(letters) for _ in range(rng.randint(1, max_period))),
        )
        for _ in range(count)
    ]


def test_criterion_5_translation_equivalence():
    with _Budget("5 translation equivalence", 30.0):
        m = mca_counter()
        as_nwa = mca_to_nwa(m)
        for word in _random_lassos(m.alphabet, 50, 3, 6, seed=5001):
            assert evaluate_lasso_mca(m, word) == evaluate_lasso(as_nwa, word, 1), word
        round_trip = nwa_to_mca(as_nwa, 1)
        for word in _random_lassos(m.alphabet, 50, 3, 6, seed=5002):
            assert evaluate_lasso_mca(m, word) == evaluate_lasso_mca(round_trip, word), word
        for nwa, k, seed in ((art1(), 1, 5003), (average_excess(), 1, 5004)):
            as_mca = nwa_to_mca(nwa, k)
            for word in _random_lassos(nwa.alphabet, 50, 3, 6, seed=seed):
                assert evaluate_lasso(nwa, word, k) == evaluate_lasso_mca(as_mca, word), word


def _random_ratio_graph(rng):
    n = rng.randint(2, 8)
    m = rng.randint(1, 16)
    edges = []
    for _ in range(m):
        ticks = rng.randint(0, 1)
        edges.append((rng.randrange(n), rng.randrange(n), rng.randint(-8, 8) if ticks else 0, ticks))
    return RatioGraph(
        n, tuple(edges), frozenset({rng.randrange(n)}), frozenset(rng.sample(range(n), rng.randint(0, n)))
    )


def test_criterion_6_meanpayoff_oracle():
    with _Budget("6 mean-payoff oracle", 60.0):
        rng = random.Random(6001)
        for trial in range(1000):
            g = _random_ratio_graph(rng)
            expected = min_cycle_ratio_brute(g)
            value, _ = infimum_ratio(g)
            if expected is None:
                assert value is PLUS_INFINITY, trial
                continue
            assert value == ValueResult.finite(expected), trial
            for t in (expected - 1, expected - Fraction(1, 7), expected, expected + Fraction(1, 7)):
                assert threshold_emptiness(g, Threshold(t))[0] == (expected <= t), trial
            assert not threshold_emptiness(g, Threshold(expected, strict=True))[0], trial


def test_criterion_7_reduction_fidelity():
    with _Budget("7 reduction fidelity", 60.0):
        for name in STAR_FAILING:
            nwa = corpus()[name]
            k = KNOWN_WIDTH[name]
            reduced = reduce_width1(nwa, k)
            assert has_width(reduced, 1) == (True, None), name
            for word, value in lasso_values(nwa, 2, 6, k):
                assert evaluate_lasso(reduced, word, 1) == value, (name, word)


def _random_nondet(seed):
    from nwaq.core import Alphabet, LabeledAutomaton, Nwa, ValueFn, WeightedAutomaton, is_deterministic

    rng = random.Random(seed)
    sigma = Alphabet(("a", "b"))
    n_master = rng.randint(2, 3)
    slaves = []
    for _ in range(rng.randint(1, 2)):
        n = rng.randint(2, 3)
        trans = set()
        for _ in range(rng.randint(3, 6)):
            trans.add((rng.randrange(n - 1), rng.randrange(2), rng.randrange(n), rng.randint(-2, 2)))
        # a short accepting path keeps slave terminations reachable
        trans.add((0, rng.randrange(2), n - 1, rng.randint(-2, 2)))
        slaves.append(
            WeightedAutomaton(
                LabeledAutomaton(
                    sigma,
                    n,
                    tuple(f"s{i}" for i in range(n)),
                    frozenset({0}),
                    tuple(sorted(trans)),
                    frozenset({n - 1}),
                ),
                rng.choice((ValueFn.SUM, ValueFn.SUM_PLUS)),
            )
        )
    slaves.append(
        WeightedAutomaton(
            LabeledAutomaton(sigma, 1, ("d",), frozenset({0}), (), frozenset({0})), ValueFn.SUM
        )
    )
    trans = set()
    for _ in range(rng.randint(4, 7)):
        trans.add((rng.randrange(n_master), rng.randrange(2), rng.randrange(n_master), rng.randint(1, len(slaves))))
    # force a nondeterministic choice on some (state, letter)
    q, a = rng.randrange(n_master), rng.randrange(2)
    trans.add((q, a, rng.randrange(n_master), len(slaves)))
    trans.add((q, a, (q + 1) % n_master, rng.randint(1, len(slaves))))
    master = LabeledAutomaton(
        sigma,
        n_master,
        tuple(f"m{i}" for i in range(n_master)),
        frozenset({0}),
        tuple(sorted(trans)),
        frozenset({0, rng.randrange(n_master)}),
    )
    nwa = Nwa(master, tuple(slaves), name=f"rand{seed}")
    return nwa if not is_deterministic(nwa)[0] else None


def test_criterion_8_determinization_fidelity():
    with _Budget("8 determinization fidelity", 120.0):
        done = 0
        nontrivial = 0
        seed = 0
        while done < 20:
            seed += 1
            nwa = _random_nondet(8000 + seed)
            if nwa is None:
                continue
            k = random.Random(seed).randint(1, 2)
            det = materialize_deterministic(nwa, k)
            vi, _ = enumerate_lasso_infimum(nwa, 2, 4, k)
            vo, _ = enumerate_lasso_infimum(det, 2, 4, k)
            assert vi == vo, (seed, k, vi, vo)
            if vi is not PLUS_INFINITY:
                nontrivial += 1
            done += 1
        assert nontrivial >= 10, f"only {nontrivial} instances had finite bounded infima"


def test_criterion_9_cli_contract(tmp_path, capsys):
    with _Budget("9 cli contract", 30.0):
        # canonical round trips for every shipped corpus file
        for path in sorted(DATA.iterdir()):
            text = path.read_text()
            if path.suffix == ".nwa":
                assert render_nwa(parse_nwa(text)) == text, path.name
            else:
                assert render_mca(parse_mca(text)) == text, path.name
        # emitted certificates replay under eval within the queried threshold
        cases = [("cond_a1", 2, "0"), ("art1", 1, "1"), ("k_art_2", 2, "3/2")]
        for name, k, t in cases:
            cert_path = tmp_path / f"{name}.json"
            code = cli_main(
                ["empty", str(DATA / f"{name}.nwa"), "--k", str(k), "--le", t, "--certificate", str(cert_path)]
            )
            capsys.readouterr()
            assert code == 0, name
            cert = json.loads(cert_path.read_text())
            code = cli_main(
                ["eval", str(DATA / f"{name}.nwa"), "--word", cert["witness"], "--cap", str(k)]
            )
            out = json.loads(capsys.readouterr().out)
            assert code == 0
            value = Fraction(out["value"]["p"], out["value"]["q"])
            assert value <= Fraction(t), name
        # star certificates carry a pumped word whose average dip meets the threshold
        for name, k in (("cond_a2", 2), ("average_excess", 1)):
            cert_path = tmp_path / f"{name}.json"
            code = cli_main(
                ["empty", str(DATA / f"{name}.nwa"), "--k", str(k), "--le", "-150", "--certificate", str(cert_path)]
            )
            capsys.readouterr()
            assert code == 0, name
            cert = json.loads(cert_path.read_text())
            assert cert["kind"] == "star"
            from nwaq.textio import parse_word

            pumped = parse_word(cert["witness"]["pumped"])
            nwa = parse_nwa((DATA / f"{name}.nwa").read_text())
            assert min_partial_average(nwa, pumped, k, 8) <= Fraction(-150), name
        # exit codes: yes, no, usage, limit
        assert cli_main(["width", str(DATA / "art1.nwa"), "--k", "1"]) == 0
        capsys.readouterr()
        assert cli_main(["width", str(DATA / "art.nwa"), "--k", "3"]) == 1
        capsys.readouterr()
        assert cli_main(["width", str(DATA / "art.nwa")]) == 2
        capsys.readouterr()

import itertools

import numpy as np
import pytest

from fibbraid import _kernels
from fibbraid.anyon_core import (Alphabet, BraidWord, GeneratorToken, evaluate_braid,
                                 generator_matrix, generator_table, parse_braid_string)
from fibbraid.braid_search import (RANDOM_CHUNK, BudgetExceededError, Objective, SearchConfig,
                                   SearchMode, SearchRecord, _make_record, chunk_words,
                                   enumerate_words, incremental_evaluator, partition_search,
                                   run_search, score_matrices, word_count)
from fibbraid.gate_metrics import CNOT_TARGET, decompose, distance_to_gate, unitarity_measure
from fibbraid.local_invariants import class_distance, closest_class, get_class, invariants_u4

CNOT_CLASS = Objective.to_class(get_class("CNOT"))
SWAP_CLASS = Objective.to_class(get_class("SWAP"))
CNOT_GATE = Objective.to_gate(CNOT_TARGET)
SURVEY = Objective.survey()


def naive_search(config: SearchConfig) -> list[SearchRecord]:
    """Reference: full product per word, one word at a time, plain sort."""
    records = []
    for length in config.length_range:
        for word in enumerate_words(config.alphabet, length, config.reduce_words):
            m = evaluate_braid(word)
            s = score_matrices(m[None], config)
            if s.accepted[0]:
                records.append(_make_record(s, 0, word))
    records.sort(key=lambda r: (r.objective_distance, r.length, r.operator))
    return records if config.top_k is None else records[:config.top_k]


def has_cancelling_pair(digits):
    return any(b == (a + 5) % 10 for a, b in zip(digits, digits[1:]))


# -- word space ---------------------------------------------------------------

def test_enumerate_examples():
    assert [str(w) for w in enumerate_words("basic", 1)] == ["0", "1", "2", "3", "4"]
    assert len(list(enumerate_words("basic", 2))) == 25
    assert len(list(enumerate_words("extended", 2, reduce_words=True))) == 90


@pytest.mark.parametrize("alphabet,reduce", [("basic", False), ("extended", False), ("extended", True)])
@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_enumerate_counts_and_order(alphabet, reduce, length):
    words = [str(w) for w in enumerate_words(alphabet, length, reduce)]
    n = Alphabet(alphabet).size
    brute = ["".join(map(str, t)) for t in itertools.product(range(n), repeat=length)
             if not (reduce and has_cancelling_pair(t))]
    assert words == brute
    assert word_count(alphabet, length, reduce) == len(brute)


def test_enumerate_rejects_zero_length():
    with pytest.raises(ValueError):
        list(enumerate_words("basic", 0))


def test_incremental_evaluator():
    np.testing.assert_array_equal(incremental_evaluator(np.eye(5), GeneratorToken(1)),
                                  generator_matrix(GeneratorToken(1)))
    word = parse_braid_string("0104230")
    m = np.eye(5, dtype=complex)
    for tok in word:
        m = incremental_evaluator(m, tok)
    assert np.max(np.abs(m - evaluate_braid(word))) < 1e-12


@pytest.mark.parametrize("alphabet,depth", [("basic", 6), ("extended", 4)])
def test_dfs_leaves_equal_batch_evaluation(alphabet, depth):
    alphabet = Alphabet(alphabet)
    table = generator_table(alphabet)
    ng = alphabet.size
    cap = ng ** depth
    codes = np.empty(cap, dtype=np.int64)
    mats = np.empty((cap, 5, 5), dtype=complex)
    n, leaves = _kernels.dfs_leaves(np.eye(5, dtype=complex), 0, -1, table, depth,
                                    np.ones((ng, ng), dtype=np.bool_), 0.0, codes, mats)
    assert n == leaves == cap
    np.testing.assert_array_equal(codes, np.arange(cap))
    for code, digits in enumerate(itertools.product(range(ng), repeat=depth)):
        ref = evaluate_braid(BraidWord.from_digits(digits, alphabet))
        assert np.array_equal(mats[code], ref), digits


# -- scoring ------------------------------------------------------------------

def all_words_matrices(length):
    words = list(enumerate_words("basic", length))
    return words, np.stack([evaluate_braid(w) for w in words])


def test_scores_agree_with_public_metrics():
    words, mats = all_words_matrices(5)
    thr = 0.5
    for obj in (CNOT_GATE, CNOT_CLASS, SURVEY):
        cfg = SearchConfig(obj, 5, unitarity_threshold=thr, with_invariants=True)
        s = score_matrices(mats, cfg)
        for i, m in enumerate(mats):
            a = decompose(m).a_block
            du = unitarity_measure(a)
            assert abs(s.m11_norm[i] - abs(m[0, 0])) < 1e-15
            if not s.accepted[i]:
                assert du >= thr - 1e-12
                continue
            assert abs(s.d_unitary[i] - du) < 1e-12
            assert du < thr
            inv = invariants_u4(a)
            np.testing.assert_allclose(s.inv[i], [inv.g1, inv.g2, inv.g3, inv.g3_imag_residual],
                                       atol=1e-11)
            if obj is CNOT_GATE:
                assert abs(s.objective[i] - distance_to_gate(a, CNOT_TARGET)) < 1e-12
            elif obj is CNOT_CLASS:
                assert abs(s.objective[i] - class_distance(inv, get_class("CNOT"))) < 1e-10
            else:
                assert abs(s.objective[i] - closest_class(inv)[1]) < 1e-10


def test_screen_matches_unitarity_of_block():
    # For a unitary 5x5 product, d^U(A) = 1 - |M11|^2; the compiled screen relies on it.
    _, mats = all_words_matrices(6)
    for m in mats[::7]:
        a = decompose(m).a_block
        assert abs(unitarity_measure(a) - (1 - abs(m[0, 0]) ** 2)) < 1e-12


def test_strict_leakage_filter():
    cfg = SearchConfig(SURVEY, (1, 5), top_k=None, unitarity_threshold=0.5,
                       strict_leakage=True, leakage_threshold=1e-6)
    res = run_search(cfg)
    assert res.records
    assert all(r.leakage_delta < 1e-6 for r in res)
    loose = run_search(SearchConfig(SURVEY, (1, 5), top_k=None, unitarity_threshold=0.5))
    assert len(loose) > len(res)


# -- run_search ---------------------------------------------------------------

def test_length_one_survey():
    res = run_search(SearchConfig(SURVEY, 1, top_k=None, unitarity_threshold=10.0))
    assert res.evaluated == 5 and len(res) == 5
    by_op = {r.operator: r for r in res}
    for op in "0134":
        assert by_op[op].closest == "ID" and by_op[op].objective_distance < 1e-10
        assert by_op[op].d_unitary < 1e-12
    assert by_op["2"].d_unitary > 0.1
    default = run_search(SearchConfig(SURVEY, 1, top_k=None))
    assert sorted(r.operator for r in default) == ["0", "1", "3", "4"]


def test_length_nine_swap():
    res = run_search(SearchConfig(SWAP_CLASS, 9, unitarity_threshold=1e-8))
    best = res[0]
    assert best.objective_distance < 1e-10 and best.d_unitary < 1e-10
    assert best.leakage_delta < 1e-10
    assert best.closest == "SWAP"


@pytest.mark.parametrize("cfg", [
    SearchConfig(CNOT_GATE, (1, 5), top_k=25),
    SearchConfig(CNOT_CLASS, (1, 5), top_k=10),
    SearchConfig(SURVEY, (1, 5), top_k=None),
    SearchConfig(CNOT_CLASS, (1, 3), alphabet="extended", top_k=15),
    SearchConfig(SURVEY, (1, 4), alphabet="extended", reduce_words=True, top_k=40),
], ids=["gate", "class", "survey", "ext-class", "ext-reduced-survey"])
def test_matches_naive_reference(cfg):
    assert run_search(cfg).records == naive_search(cfg)


@pytest.mark.parametrize("alphabet,reduce", [("basic", False), ("extended", False), ("extended", True)])
def test_exhaustive_completeness(alphabet, reduce):
    for length in range(1, 5):
        res = run_search(SearchConfig(SURVEY, length, alphabet=alphabet, reduce_words=reduce))
        assert res.evaluated == word_count(alphabet, length, reduce)
    res = run_search(SearchConfig(SURVEY, (1, 4), alphabet=alphabet, reduce_words=reduce))
    assert res.evaluated == sum(word_count(alphabet, n, reduce) for n in range(1, 5))


def test_accepted_counter_exact():
    cfg = SearchConfig(CNOT_GATE, (1, 5), top_k=None)
    res = run_search(cfg)
    assert res.accepted == len(res) == len(naive_search(cfg))


def test_filter_soundness_and_ranking():
    res = run_search(SearchConfig(CNOT_CLASS, (3, 7), top_k=200, unitarity_threshold=0.05))
    assert len(res) == 200
    assert all(r.d_unitary < 0.05 for r in res)
    keys = [r.sort_key() for r in res]
    assert keys == sorted(keys)
    distances = [r.objective_distance for r in res]
    assert all(a <= b for a, b in zip(distances, distances[1:]))


def test_worker_count_independence():
    cfg = SearchConfig(CNOT_CLASS, 8, top_k=50)
    assert partition_search(cfg, 1).records == partition_search(cfg, 4).records


def test_budget_exclusive_bound():
    with pytest.raises(BudgetExceededError, match="budget"):
        run_search(SearchConfig(SURVEY, 3, budget=125))
    assert run_search(SearchConfig(SURVEY, 3, budget=126)).evaluated == 125
    with pytest.raises(BudgetExceededError):
        run_search(SearchConfig(CNOT_CLASS, 14))


@pytest.mark.parametrize("kwargs", [dict(lengths=0), dict(lengths=(3, 2)), dict(top_k=0),
                                    dict(mode="random", sample_count=0),
                                    dict(accept_target=0), dict(unitarity_threshold=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(SURVEY, **{"lengths": 3, **kwargs})


def test_gate_objective_invariants_optional():
    res = run_search(SearchConfig(CNOT_GATE, 3))
    assert all(r.invariants is None for r in res)
    res = run_search(SearchConfig(CNOT_GATE, 3, with_invariants=True))
    assert all(r.invariants is not None for r in res)


# -- random mode --------------------------------------------------------------

def random_cfg(**kw):
    base = dict(objective=SURVEY, lengths=12, mode=SearchMode.RANDOM, sample_count=20000, seed=11)
    base.update(kw)
    return SearchConfig(**base)


def test_random_repeatable():
    cfg = random_cfg(top_k=30)
    assert run_search(cfg).records == run_search(cfg).records
    assert run_search(cfg).records != run_search(random_cfg(top_k=30, seed=12)).records


def test_random_worker_independence():
    cfg = random_cfg(top_k=None)
    assert partition_search(cfg, 1).records == partition_search(cfg, 2).records
    cfg = random_cfg(accept_target=50, top_k=None)
    assert partition_search(cfg, 1).records == partition_search(cfg, 3).records


def test_random_draws_follow_documented_streams():
    n = 2 * RANDOM_CHUNK + 100
    cfg = SearchConfig(CNOT_GATE, 6, mode="random", sample_count=n, seed=2, top_k=None,
                       unitarity_threshold=10.0)
    res = partition_search(cfg, 2)
    assert res.evaluated == n and len(res) == n
    expected = np.concatenate([
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(2, spawn_key=(6, c))))
        .integers(0, 5, size=(RANDOM_CHUNK, 6), dtype=np.uint8) for c in range(3)])[:n]
    got = sorted((r.draw, r.operator) for r in res)
    assert [d for d, _ in got] == list(range(n))
    assert [op for _, op in got] == ["".join(map(str, row)) for row in expected]
    np.testing.assert_array_equal(chunk_words("basic", 6, 2, 1), expected[RANDOM_CHUNK:2 * RANDOM_CHUNK])


def test_random_accept_target_keeps_first_accepted():
    full = run_search(random_cfg(top_k=None))
    first = sorted(full.records, key=lambda r: r.draw)[:40]
    res = run_search(random_cfg(top_k=None, accept_target=40))
    assert len(res) == 40 == res.accepted
    assert sorted(res.records, key=lambda r: r.draw) == first


def test_random_dedup_and_reduce():
    res = run_search(random_cfg(lengths=2, top_k=None, dedup=True, unitarity_threshold=10.0))
    ops = [r.operator for r in res]
    assert len(ops) == len(set(ops)) == 25
    res = run_search(random_cfg(alphabet="extended", reduce_words=True, top_k=None,
                                unitarity_threshold=10.0, sample_count=3000, lengths=6))
    assert res.records and not any(has_cancelling_pair([int(c) for c in r.operator]) for r in res)


def test_random_records_match_direct_evaluation():
    res = run_search(random_cfg(top_k=20))
    for r in res:
        a = decompose(evaluate_braid(r.word)).a_block
        assert abs(r.d_unitary - unitarity_measure(a)) < 1e-12
        assert abs(r.objective_distance - closest_class(invariants_u4(a))[1]) < 1e-9


def test_provenance():
    res = run_search(random_cfg(top_k=5))
    p = res.provenance
    assert p["prng"]["algorithm"] == "numpy.random.PCG64"
    assert p["config"]["seed"] == 11 and p["config"]["mode"] == "random"
    assert p["evaluated"] == 20000

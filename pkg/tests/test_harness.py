import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medpoet import harness
from medpoet.corpus import Corpus, Sample, load_tsv
from medpoet.edittree import build_edit_tree, canonical_key
from medpoet.poet import PoetStore, build_store
from medpoet.synthetic import inject_one_edit_error, shared_rule_corpus


def pair_corpus(sizes):
    samples = []
    for k, n in enumerate(sizes):
        samples += [Sample(f"w{k}x{i}", f"pos=V,per={k}", "pos=V,tense=PST", f"w{k}y{i}") for i in range(n)]
    return Corpus(samples)


def test_exact_match():
    assert harness.exact_match(["a", "b", "c"], ["a", "x", "c"]) == pytest.approx(2 / 3)
    assert harness.exact_match([], []) == 0.0
    with pytest.raises(ValueError):
        harness.exact_match(["a"], [])


@pytest.fixture(scope="module")
def big():
    return pair_corpus([2500, 2600])


def test_celex_fold_sizes(big):
    folds = harness.make_celex_folds(big, seed=0)
    assert len(folds) == 5
    for f in folds:
        for pair, n in zip(sorted(big.tag_pairs), (500, 500)):
            assert sum(s.pair == pair for s in f.train) == 500
            assert sum(s.pair == pair for s in f.dev) == 1000
            assert sum(s.pair == pair for s in f.test) == 1000


def test_celex_folds_partition_and_rotate(big):
    folds = harness.make_celex_folds(big, seed=0)
    for f in folds:
        parts = [set(f.train), set(f.dev), set(f.test)]
        assert sum(map(len, parts)) == len(set().union(*parts))
    trains = [set(f.train) for f in folds]
    for i in range(5):
        for j in range(i + 1, 5):
            assert not trains[i] & trains[j]


def test_celex_folds_deterministic(big):
    a = harness.make_celex_folds(big, seed=7)
    b = harness.make_celex_folds(big, seed=7)
    c = harness.make_celex_folds(big, seed=8)
    assert [f.train.samples for f in a] == [f.train.samples for f in b]
    assert a[0].train.samples != c[0].train.samples


def test_small_pairs_scale_down():
    folds = harness.make_celex_folds(pair_corpus([25]))
    assert [(len(f.train), len(f.dev), len(f.test)) for f in folds] == [(5, 10, 10)] * 5
    with pytest.raises(ValueError, match="at least 3"):
        harness.make_celex_folds(pair_corpus([25, 2]))


def test_reduce_one_pair():
    data = pair_corpus([512, 40])
    pair, other = sorted(data.tag_pairs)
    small = harness.reduce_tagpair(data, pair, 0.0625, seed=0)
    assert sum(s.pair == pair for s in small) == 32
    assert [s for s in small if s.pair == other] == [s for s in data if s.pair == other]
    assert harness.reduce_tagpair(data, pair, 1.0).samples == data.samples
    with pytest.raises(KeyError):
        harness.reduce_tagpair(data, ("x", "y"), 0.5)
    with pytest.raises(ValueError):
        harness.reduce_tagpair(data, pair, 0.0)


def test_reductions_nest():
    data = pair_corpus([300, 77])
    for pair in data.tag_pairs:
        chain = [set(harness.reduce_tagpair(data, pair, f, seed=3)) for f in harness.halving_fractions()]
        for larger, smaller in zip(chain, chain[1:]):
            assert smaller < larger


def test_reduce_all_takes_ceilings():
    data = pair_corpus([10, 7, 1])
    reduced = harness.reduce_all(data, 0.25, seed=0)
    counts = sorted(len(v) for v in reduced.by_pair().values())
    assert counts == [1, 2, 3]
    # agrees with the single-pair reduction on each pair
    for pair in data.tag_pairs:
        one = harness.reduce_tagpair(data, pair, 0.25, seed=0)
        assert [s for s in one if s.pair == pair] == [s for s in reduced if s.pair == pair]


def test_halving_fractions():
    assert harness.halving_fractions() == [1.0, 0.5, 0.25, 0.125, 0.0625]


def test_all_gold_members():
    test = shared_rule_corpus(5, pairs=2)
    golds = [s.target_form for s in test]
    r = harness.evaluate_predictions([golds] * 3, test)
    assert r.accuracy == 1.0 and r.member_accuracies == [1.0] * 3 and r.member_std == 0.0
    assert r.mode == "ensemble"


def off_by_one_fixture():
    test = shared_rule_corpus(6, pairs=3, seed=2)
    preds = inject_one_edit_error([s.target_form for s in test], every=1)
    return test, preds


def test_poet_micro_fixture_fully_corrected():
    test, preds = off_by_one_fixture()
    store = build_store(test)
    r = harness.evaluate_predictions([preds], test, store, np.random.default_rng(0))
    assert r.accuracy == 0.0
    assert r.corrected_accuracy == 1.0 and r.poet_delta == 1.0


def test_empty_store_passes_through():
    test, preds = off_by_one_fixture()
    preds[1] = test[1].target_form
    r = harness.evaluate_predictions([preds], test, PoetStore({}))
    assert r.corrected_accuracy == r.accuracy == 1 / len(test)


def test_missing_gold_rejected():
    test = Corpus([Sample("ab", "s", "t")])
    with pytest.raises(ValueError, match="gold"):
        harness.evaluate_predictions([["x"]], test)
    with pytest.raises(ValueError):
        harness.evaluate_predictions([], shared_rule_corpus(1, pairs=1))


def test_report_matches_prediction_file(tmp_path):
    test, preds = off_by_one_fixture()
    other = list(preds)
    for i in range(0, len(test), 3):
        preds[i] = test[i].target_form
    r = harness.evaluate_predictions([preds, other, preds], test, build_store(test[:5]),
                                     np.random.default_rng(1))
    pred_path = harness.write_report(r, tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    lines = pred_path.read_text().splitlines()
    header = lines[0].lstrip("#").split("\t")
    rows = [dict(zip(header, l.split("\t"))) for l in lines[1:]]
    assert len(rows) == data["total"] == len(test)
    assert data["accuracy"] == sum(x["prediction"] == x["gold"] for x in rows) / len(rows)
    assert data["poet_accuracy"] == sum(x["corrected"] == x["gold"] for x in rows) / len(rows)
    for p in data["per_pair"]:
        sub = [x for x in rows if (x["source_tag"], x["target_tag"]) == (p["source_tag"], p["target_tag"])]
        assert p["count"] == len(sub)
        assert p["correct"] == sum(x["prediction"] == x["gold"] for x in sub)
    assert data["member_std"] == pytest.approx(np.std(data["member_accuracies"]))
    text = harness.format_report(r)
    assert "ensemble accuracy" in text and "with POET" in text


forms = st.text("abc", min_size=1, max_size=5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(forms, forms), min_size=1, max_size=6), st.lists(forms, min_size=6, max_size=6))
def test_poet_keeps_membership(train_pairs, guesses):
    train = Corpus([Sample(s, "a", "b", t) for s, t in train_pairs])
    store = build_store(train)
    test = Corpus([Sample(s, "a", "b", t) for s, t in train_pairs])
    r = harness.evaluate_predictions([guesses[:len(test)]], test, store, np.random.default_rng(0))
    for rec in r.records:
        tree_ok = canonical_key(build_edit_tree(rec["source_form"], rec["corrected"])) in \
            dict(store.trees("a", "b"))
        assert tree_ok or rec["corrected"] == rec["prediction"]


def test_write_predictions_roundtrip(tmp_path):
    test = shared_rule_corpus(3, pairs=2)
    harness.write_predictions(test, [s.target_form for s in test], tmp_path / "p.tsv")
    assert load_tsv(tmp_path / "p.tsv").samples == test.samples

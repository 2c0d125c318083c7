import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from unhide.data import RatingsDataset
from unhide.mf import PMF
from unhide.nn import Dense, MLPClassifier, ReLU, Sigmoid
from unhide.synth import PlantedSpec, generate
from unhide.unhide import (
    DeepSelector,
    FeatureRanking,
    LocalizeConfig,
    item_weight,
    localize,
    min_max_normalize,
    relevancy,
    select_threshold,
    select_top_n,
    top_items,
)

vectors = arrays(np.float64, st.integers(1, 30), elements=st.floats(-1e6, 1e6, allow_nan=False))
unit_pairs = st.integers(1, 30).flatmap(
    lambda k: st.tuples(*[arrays(np.float64, k, elements=st.floats(0, 1))] * 2))


def single_unit():
    return MLPClassifier.from_layers([Dense([[1.0], [0.0]], [0.0]), Sigmoid()])


def test_zero_residual_leaves_input_unchanged():
    # h(0) = 0.5 is never a target, so use a net whose output at zero is exactly 1
    model = MLPClassifier.from_layers([Dense([[1.0], [0.0]], [1000.0]), Sigmoid()])
    res = localize(model, 0, LocalizeConfig(target=1.0))
    assert np.array_equal(res.raw, np.zeros(2))
    assert all(v == 0.0 for v in res.loss_trace)


def test_one_plain_step():
    res = localize(single_unit(), 0, LocalizeConfig(target=1.0, iterations=1, normalize_gradient=False))
    np.testing.assert_allclose(res.raw, [0.0125, 0.0], rtol=0, atol=1e-15)
    assert res.loss_trace[0] == 0.125 and len(res.loss_trace) == 2


def test_one_normalized_step():
    res = localize(single_unit(), 0, LocalizeConfig(target=1.0, iterations=1))
    # the raw direction (t - h) * h'(0) = 0.125 is normalized, then scaled by 0.1
    d = 0.5 * 0.25
    want = 0.1 * d / (d / np.sqrt(2) + 1e-5)
    assert res.raw[0] == pytest.approx(want, abs=1e-15)
    assert res.raw[0] == pytest.approx(0.141405, abs=1e-6)
    assert res.raw[1] == 0.0


def test_algorithm_sign_moves_away_from_target():
    res = localize(single_unit(), 0, LocalizeConfig(target=1.0, iterations=5, algorithm_sign=True))
    assert res.raw[0] < 0 and res.final_loss > res.initial_loss


def test_stop_loss_ends_early():
    res = localize(single_unit(), 0, LocalizeConfig(target=1.0, iterations=200, stop_loss=0.01))
    assert res.final_loss <= 0.01 and len(res.loss_trace) < 201


def test_config_validation():
    for bad in ({"step": 0}, {"iterations": 0}, {"target": 0.5}, {"init": "normal"}):
        with pytest.raises(ValueError):
            LocalizeConfig(**bad)


def test_archetypes_separate_on_a_trained_model(rng):
    X = rng.normal(size=(400, 5))
    y = (X[:, 2] > 0).astype(int)
    model = MLPClassifier(n_epochs=60, learning_rate=0.01, random_state=0).fit(X, y)
    hi = localize(model, 0, LocalizeConfig(target=1.0))
    lo = localize(model, 0, LocalizeConfig(target=0.0))
    assert hi.output > lo.output
    assert hi.final_loss < hi.initial_loss and lo.final_loss < lo.initial_loss
    assert all(v >= 0 for v in hi.loss_trace + lo.loss_trace)


def test_min_max_examples():
    assert min_max_normalize([2.0, 4.0, 6.0]).tolist() == [0.0, 0.5, 1.0]
    assert min_max_normalize([3.0, 3.0, 3.0]).tolist() == [0.5, 0.5, 0.5]


@settings(max_examples=1000, deadline=None)
@given(p=vectors, a=st.floats(1e-3, 1e3), b=st.floats(-1e3, 1e3))
def test_min_max_properties(p, a, b):
    out = min_max_normalize(p)
    assert np.all((out >= 0) & (out <= 1))
    if np.ptp(p) == 0:
        assert np.all(out == 0.5)
    else:
        assert out.min() == 0.0 and out.max() == 1.0
        if np.ptp(p) > 1e-3:
            np.testing.assert_allclose(min_max_normalize(a * p + b), out, atol=1e-6)


def test_relevancy_examples():
    assert relevancy([1, 0.5, 0], [0, 0.5, 1]).tolist() == [1.0, 0.0, 1.0]
    assert relevancy([0.2, 0.7], [0.2, 0.7]).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        relevancy([0.1], [0.1, 0.2])


@settings(max_examples=1000, deadline=None)
@given(pair=unit_pairs, n=st.integers(1, 30))
def test_relevancy_symmetry(pair, n):
    a, b = pair
    r = relevancy(a, b)
    assert np.array_equal(r, relevancy(b, a))
    assert np.all((r >= 0) & (r <= 1))
    n = min(n, len(a))
    assert np.array_equal(select_top_n(r, n), select_top_n(relevancy(b, a), n))


def test_top_n_examples():
    assert select_top_n([0.9, 0.9, 0.1], 1).tolist() == [0]
    assert select_top_n([0.1, 0.3, 0.2], 3).tolist() == [1, 2, 0]
    for n in (0, 4):
        with pytest.raises(ValueError):
            select_top_n([0.1, 0.3, 0.2], n)


def full_sort_oracle(scores, n):
    return [j for _, j in sorted((-s, j) for j, s in enumerate(scores))][:n]


def test_top_n_agrees_with_full_sort(rng):
    for _ in range(1000):
        k = int(rng.integers(1, 40))
        # coarse values force many ties
        scores = rng.integers(0, 5, k) / 4
        n = int(rng.integers(1, k + 1))
        assert select_top_n(scores, n).tolist() == full_sort_oracle(scores.tolist(), n)


@settings(max_examples=1000, deadline=None)
@given(scores=arrays(np.float64, st.integers(1, 30), elements=st.sampled_from([0.0, 0.25, 0.5, 1.0])),
       n=st.integers(1, 30))
def test_tie_break_is_deterministic(scores, n):
    n = min(n, len(scores))
    first = select_top_n(scores, n).tolist()
    assert first == select_top_n(scores.copy(), n).tolist() == full_sort_oracle(scores.tolist(), n)


def test_threshold_examples():
    assert select_threshold([0.6, 0.5, 0.4], 0.5).tolist() == [0]
    assert select_threshold([0.6, 1.0, 0.4], 1.0).tolist() == []


@settings(max_examples=1000, deadline=None)
@given(scores=arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 1)),
       t=st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_threshold_is_monotone(scores, t):
    lo, hi = sorted(t)
    assert set(select_threshold(scores, hi)) <= set(select_threshold(scores, lo))


def test_feature_ranking():
    r = FeatureRanking("x", [0.2, 0.8, 0.8, 0.1])
    assert r.ranking.tolist() == [1, 2, 0, 3]
    assert r.top(2).tolist() == [1, 2] and r.above(0.5).tolist() == [1, 2]
    with pytest.raises(ValueError):
        FeatureRanking("x", [0.1, 0.2], ranking=[0, 0])


def test_item_weight_examples():
    assert item_weight([0.9, 0.3, 0.8], [1.0, 5.0, 2.0], [0, 2]) == pytest.approx(2.5, abs=1e-15)
    assert item_weight([0.9, 0.3, 0.8], [1.0, 5.0, 2.0], []) == 0
    with pytest.raises(IndexError):
        item_weight([0.9, 0.3], [1.0, 5.0], [2])


def test_item_weight_matches_masked_dot(rng):
    for _ in range(200):
        k = int(rng.integers(1, 30))
        p, q = rng.random(k), rng.normal(size=k)
        sel = np.flatnonzero(rng.random(k) < 0.4)
        masked = np.where(np.isin(np.arange(k), sel), p, 0.0)
        assert abs(item_weight(p, q, sel) - float(np.dot(masked, q))) < 1e-12


def tiny_catalog():
    records = [(str(u), i, 3.0) for u in range(5) for i in ("a", "b")] + [("0", "c", 4.0)]
    dataset = RatingsDataset.from_records(records, (1, 5))
    pmf = PMF(n_factors=2)
    pmf.user_factors_ = np.zeros((5, 2))
    pmf.item_factors_ = np.array([[1.0, 0.0], [2.5, 0.0], [9.0, 0.0]])
    return dataset, pmf


def test_top_items_filters_and_orders():
    dataset, pmf = tiny_catalog()
    assert top_items(pmf, dataset, [1.0, 0.0], [0], min_ratings=10) == []
    out = top_items(pmf, dataset, [1.0, 0.0], [0], min_ratings=5, titles={"a": "Alpha"})
    assert [r["item_id"] for r in out] == ["b", "a"]
    assert [r["weight"] for r in out] == [2.5, 1.0]
    assert out[1]["title"] == "Alpha" and out[0]["num_ratings"] == 5


@pytest.mark.slow
def test_planted_single_factor_is_recovered():
    hits = 0
    for seed in range(5):
        X, y, signal = generate(PlantedSpec(n=2000, K=100, signal=(17,), noise=0.02, seed=seed))
        sel = DeepSelector(random_state=seed).fit(X, y)
        hits += int(17 in sel.ranking_.top(3))
    assert hits >= 4


def test_deep_selector_support_mask(rng):
    X = rng.normal(size=(300, 6))
    y = (X[:, 4] > 0).astype(int)
    sel = DeepSelector(n_features_to_select=2, n_epochs=30, learning_rate=0.01).fit(X, y)
    assert sel.get_support().sum() == 2
    assert sel.transform(X).shape == (300, 2)
    assert set(sel.get_support(indices=True)) == set(sel.ranking_.top(2))

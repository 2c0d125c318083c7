import numpy as np
import pytest

from unhide.experiments import (
    RESULT_COLUMNS,
    ExperimentGrid,
    ResultTable,
    accuracy,
    balanced_accuracy,
    paired_comparison,
    run_experiment_1,
    run_experiment_2,
    run_experiment_3,
)
from unhide.nn import MLPClassifier
from unhide.synth import PlantedSpec, generate
from unhide.unhide import FeatureRanking, group_archetypes, relevancy


def test_accuracy_examples():
    assert accuracy([0, 1, 1], [0, 1, 1]) == 1.0
    assert accuracy([0, 1, 1], [1, 0, 0]) == 0.0
    with pytest.raises(ValueError):
        accuracy([1], [1, 0])
    with pytest.raises(ValueError):
        accuracy([], [])


def test_balanced_accuracy_is_mean_recall():
    # recall 1/1 on class 0, 1/3 on class 1
    assert balanced_accuracy([0, 1, 0, 0], [0, 1, 1, 1]) == pytest.approx(2 / 3)


def trained_model(rng, K=8):
    X = rng.normal(size=(300, K))
    y = (X[:, 1] - X[:, 6] > 0).astype(int)
    return MLPClassifier(n_epochs=40, learning_rate=0.01, random_state=0).fit(X, y)


def test_experiment_1_full_and_empty_masks(rng):
    model = trained_model(rng)
    major, minor = group_archetypes(model)
    rankings = {"a": FeatureRanking("a", rng.random(8)), "b": FeatureRanking("b", rng.random(8))}
    table = run_experiment_1(model, major.raw, minor.raw, rankings, [0, 3, 8])
    assert len(table) == 2 * 3 * 2 and table.columns == ("method", "n", "target", "output")
    h0 = float(model.forward(np.zeros(8))[0])
    for m in rankings:
        assert table.select(method=m, n=8, target=1)[0]["output"] == float(model.forward(major.raw)[0])
        assert table.select(method=m, n=8, target=0)[0]["output"] == float(model.forward(minor.raw)[0])
        assert all(r["output"] == h0 for r in table.select(method=m, n=0))


def test_experiment_1_few_deep_factors_reach_the_targets(rng):
    model = trained_model(rng)
    major, minor = group_archetypes(model)
    deep = FeatureRanking("deep", relevancy(major.normalized, minor.normalized))
    table = run_experiment_1(model, major, minor, {"deep": deep}, [3])
    assert abs(table.select(target=1)[0]["output"] - 1) < 0.3
    assert abs(table.select(target=0)[0]["output"] - 0) < 0.3


def small_data():
    X, y, _ = generate(PlantedSpec(n=300, K=6, signal=(2,), noise=0.1, seed=0))
    return X, y


def test_experiment_2_at_full_width_ignores_the_method():
    X, y = small_data()
    table = run_experiment_2(X, y, ["deep", "variance", "random"], [6], [0, 1],
                             deep_params={"n_epochs": 10})
    assert len(table) == 3 * 2
    for seed in (0, 1):
        accs = {r["accuracy"] for r in table.select(seed=seed)}
        assert len(accs) == 1


def test_experiment_3_is_deterministic():
    X, y = small_data()
    kw = dict(methods=["variance", "logistic"], n=3, classifiers=["logistic", "svm", "forest"],
              seeds=[0, 1], classifier_params={"forest": {"n_estimators": 5}})
    a, b = run_experiment_3(X, y, **kw), run_experiment_3(X, y, **kw)
    assert len(a) == 2 * 3 * 2
    assert a.to_csv() == b.to_csv()
    assert a.rows == b.rows


def test_grid_validation():
    X, y = small_data()
    with pytest.raises(ValueError):
        run_experiment_2(X, y, ["variance"], [7], [0])
    with pytest.raises(ValueError):
        ExperimentGrid(seeds=())
    with pytest.raises(ValueError):
        ExperimentGrid(masking="drop")


def test_degenerate_split_is_reported_not_raised():
    X = np.random.default_rng(0).normal(size=(20, 3))
    y = np.zeros(20, dtype=int)
    y[0] = 1
    table = run_experiment_2(X, y, ["variance"], [2], [0, 1, 2, 3, 4, 5, 6, 7])
    assert table.errors and all(e["error"] == "degenerate split" for e in table.errors)


def test_paired_comparison_counts():
    t = ResultTable()
    for seed, (d, r, v) in enumerate([(0.8, 0.7, 0.8), (0.6, 0.7, 0.5)]):
        for method, acc in (("deep", d), ("random", r), ("variance", v)):
            t.add(method=method, n=5, classifier="mlp", seed=seed, split="test", accuracy=acc)
    assert paired_comparison(t) == {"random": {"wins": 1, "losses": 1, "ties": 0},
                                    "variance": {"wins": 1, "losses": 0, "ties": 1}}


def test_csv_round_trip(tmp_path):
    t = ResultTable()
    t.add(method="deep", n=5, classifier="mlp", seed=0, split="test", accuracy=0.1 + 0.2)
    path = tmp_path / "t.csv"
    t.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(RESULT_COLUMNS) == "method,n,classifier,seed,split,accuracy"
    back = ResultTable.from_csv(path)
    assert back.rows[0]["accuracy"] == 0.1 + 0.2 and back.rows[0]["n"] == 5
    assert back.mean(by=("method",)) == {("deep",): 0.1 + 0.2}

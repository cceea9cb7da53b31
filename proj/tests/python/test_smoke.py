import math

import numpy as np
import pytest

import stoc


def small_config(mode="stoc-full", representation="goad", gamma=0.1):
    c = stoc.StocConfig()
    c.mode = mode
    c.representation = representation
    c.gamma = gamma
    c.transforms = 4
    c.projection_dims = 8
    c.train_steps = 40
    c.seed = 3
    return c


@pytest.fixture(scope="module")
def blobs():
    t = stoc.synth_blobs(300, 30, 4, 6.0, 1)
    return np.asarray(t.features), np.asarray(t.labels)


def test_synth_blobs_shapes(blobs):
    x, y = blobs
    assert x.shape == (330, 4)
    assert y.sum() == 30


def test_metrics_match_hand_values():
    s = [0.1, 0.4, 0.35, 0.8]
    y = [0, 0, 1, 1]
    assert stoc.auc(s, y) == pytest.approx(75.0)
    assert stoc.average_precision(s, y) == pytest.approx(100 * (1 + 2 / 3) / 2)
    assert stoc.f1_at_ratio([4, 3, 2, 1], [0, 1, 1, 0]) == pytest.approx(50.0)
    assert stoc.recall_at_precision([6, 5, 4, 3, 2, 1], [1, 1, 0, 1, 0, 0], 70) == (
        pytest.approx(100.0)
    )
    with pytest.raises(ValueError):
        stoc.auc([1.0, 2.0], [1, 1])


def test_percentile_threshold():
    assert stoc.percentile_threshold(list(range(1, 11)), 0.2) == 9
    assert math.isinf(stoc.percentile_threshold([1.0, 2.0], 0.0))


def test_gde_scores_mean_lowest(blobs):
    x, _ = blobs
    g = stoc.GdeModel.fit(x[:300])
    scores = g.score(x)
    assert scores.shape == (330,)
    assert g.score(g.mean.reshape(1, -1))[0] <= scores.min()


def test_refine_data_rejects_anomalies(blobs):
    x, y = blobs
    r = stoc.refine_data(x, k=5, gamma=0.2, seed=1)
    rejected = set(r.rejected_indices)
    assert sum(1 for i in range(300, 330) if i in rejected) >= 24
    assert len(r.kept_indices) + len(rejected) == 330
    assert stoc.refine_data(x, gamma=0.0).rejected_indices == []


def test_fit_predict_and_gamma_zero(blobs):
    x, y = blobs
    base = stoc.fit(x, small_config(mode="baseline", gamma=0.0)).predict(x)
    full = stoc.fit(x, small_config(gamma=0.0)).predict(x)
    np.testing.assert_array_equal(base, full)
    p = stoc.fit(x, small_config(), diagnostic_labels=y.tolist())
    assert p.mode == "stoc-full"
    assert p.history[-1]["epoch"] == 0
    assert p.history[-1]["anomalies_excluded"] is not None


def test_checkpoint_round_trip(blobs, tmp_path):
    x, _ = blobs
    c = small_config()
    p = stoc.fit(x, c)
    path = str(tmp_path / "pipe.ckpt")
    p.save(path, c)
    np.testing.assert_array_equal(stoc.load_pipeline(path).predict(x), p.predict(x))


def test_split_and_standardize():
    t = stoc.synth_blobs(200, 20, 3, 6.0, 2)
    s = stoc.make_split(t, 0.05, 1, 2)
    assert len(s.train_indices) == 100
    assert sum(s.train_true_labels) == 5
    train, test = stoc.standardize(s.train_features, s.test_features)
    np.testing.assert_allclose(train.mean(axis=0), 0.0, atol=1e-12)
    assert test.shape[0] == len(s.test_indices)


def test_validate_config_names_field():
    assert len(stoc.validate_config({"dataset": "synth"})) == 16
    with pytest.raises(stoc.ConfigError, match="gamma"):
        stoc.validate_config({"dataset": "synth", "gamma": 1.5})


def test_run_experiment(tmp_path):
    report = stoc.run_experiment(
        {
            "dataset": "synth",
            "synth": {"n_normal": 300, "n_anomaly": 30, "dims": 4},
            "ratios": [0.0, 0.05],
            "modes": ["baseline", "stoc-fixed"],
            "representation": "raw",
            "splits": 1,
            "seeds": 2,
            "out": str(tmp_path),
        }
    )
    assert len(report["runs"]) == 8
    assert report["failed_runs"] == 0
    assert (tmp_path / "runs.csv").exists()

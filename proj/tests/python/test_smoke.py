import numpy as np
import pytest

import loadclust as lc


def test_cvi_hand_values():
    x = np.array([[0.0], [1.0], [9.0], [10.0]])
    labels = [0, 0, 1, 1]
    assert lc.calinski_harabasz(x, labels) == pytest.approx(162.0)
    assert lc.davies_bouldin(x, labels) == pytest.approx(1 / 9)
    assert lc.dunn_index(x, labels) == pytest.approx(8.0)
    assert lc.xie_beni(x, labels) == pytest.approx(0.25 / 81)
    assert lc.silhouette(np.array([[0.0], [1.0], [5.0]]), [0, 0, 1]) == pytest.approx(0.516667, abs=1e-5)


def test_profiles_reduce_and_cluster():
    ids, x, truth = lc.synthetic_profiles(households=16, days=20, noise_sigma=0.0, seed=3)
    assert x.shape == (16, 24)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
    red = lc.pca(x, dims=3)
    assert red["transformed"].shape == (16, 3)
    assert red["cevr"][-1] == pytest.approx(1.0)
    fa = lc.feature_agglomeration(x, dims=6)
    assert sorted(i for g in fa["groups"] for i in g) == list(range(24))
    for result in (
        lc.kmeans(red["transformed"], 4, seed=1),
        lc.spectral(red["transformed"], 4, seed=1),
        lc.agglomerative(red["transformed"], k=4),
        lc.fcm(red["transformed"], 4, seed=1),
    ):
        assert len(set(result["labels"])) == 4
        # Same partition as the archetypes, up to renaming.
        pairs = set(zip(result["labels"], truth))
        assert len(pairs) == 4


def test_fcm_memberships_and_fuzzy_xb():
    _, x, _ = lc.synthetic_profiles(households=12, days=10, seed=5)
    r = lc.fcm(x, 3, m=2.0, seed=2)
    assert np.allclose(r["memberships"].sum(axis=1), 1.0)
    assert lc.xie_beni_fuzzy(x, r["memberships"], 2.0) > 0


def test_tuning_helpers():
    rng = np.random.default_rng(0)
    centers = np.array([[0, 0], [10, 0], [5, 8.66]])
    x = np.vstack([c + 0.5 * rng.standard_normal((15, 2)) for c in centers])
    assert lc.gap_statistic(x, k_max=6, n_refs=10, seed=1)["best"] == 3
    sweep = lc.fpc_sweep(x, k_max=6)
    assert all(1 / k - 1e-12 <= f <= 1 + 1e-12 for k, f in zip(sweep["x"], sweep["y"]))
    assert lc.elbow_k_for_ac(x)["best"] == 3
    assert lc.detect_elbow([1, 2, 3, 4, 5], [4, 2, 0, 2, 4]) == (3.0, False)


def test_errors_map_to_python_exceptions():
    with pytest.raises(lc.ArgumentError):
        lc.kmeans(np.zeros((3, 2)), 5)
    with pytest.raises(lc.ConfigError):
        lc.compare({"no_such_key": 1})
    assert issubclass(lc.ConfigError, lc.Error)


def test_compare_report(tmp_path):
    cfg = {
        "data": {"synthetic": {"households": 12, "days": 20}},
        "validation": {"trials": 5},
        "frameworks": ["pca-kmc", "fa-ac"],
    }
    report = lc.compare(cfg, output=tmp_path)
    assert [f["name"] for f in report["frameworks"]] == ["PCA & KMC", "FA & AC"]
    assert (tmp_path / "cvi_original.csv").exists()
    assert lc.compare(cfg) == report
    assert lc.default_config()["seed"] == 42

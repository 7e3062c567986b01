import numpy as np
import pytest

from trend.toys import SCENARIOS, generate_features, run_scenario


def test_scenarios_registered():
    assert set(SCENARIOS) == {1, 2}
    assert SCENARIOS[1].stream_names == ("truth", "model1", "model2")
    assert SCENARIOS[2].stream_names == ("truth", "model")


def test_generate_features_shapes_and_tags():
    features = generate_features(SCENARIOS[1], 1500, seed=3)
    assert set(features) == {"truth", "model1", "model2"}
    for name, m in features.items():
        assert (m.n, m.d) == (1500, 1)
        assert name in m.tag and "seed=3" in m.tag
    assert float(features["truth"].values.min()) >= 0.0


def test_generate_features_deterministic():
    a = generate_features(SCENARIOS[2], 1200, seed=9)
    b = generate_features(SCENARIOS[2], 1200, seed=9)
    np.testing.assert_array_equal(a["model"].values, b["model"].values)


def test_streams_differ():
    features = generate_features(SCENARIOS[1], 1200, seed=9)
    assert not np.array_equal(features["truth"].values, features["model1"].values)


def test_run_scenario_structure_and_determinism():
    r1 = run_scenario(SCENARIOS[1], 3000, seed=12)
    r2 = run_scenario(SCENARIOS[1], 3000, seed=12)
    assert r1.trend_scores == r2.trend_scores
    assert r1.fid_scores == r2.fid_scores
    assert r1.self_trend == r2.self_trend
    assert r1.self_fid == r2.self_fid
    assert set(r1.trend_scores) == {"model1", "model2"}
    assert all(0.0 <= v <= 1.0 for v in r1.trend_scores.values())
    assert all(v >= 0.0 for v in r1.fid_scores.values())
    record = r1.to_record()
    assert record["scenario"] == "scenario1"
    assert record["n"] == 3000


def test_scenario1_ordering_holds_at_moderate_n():
    result = run_scenario(SCENARIOS[1], 20_000, seed=1729)
    assert result.trend_scores["model2"] < result.trend_scores["model1"]


def test_scenario2_far_exceeds_self_floor():
    result = run_scenario(SCENARIOS[2], 20_000, seed=1729)
    assert result.trend_scores["model"] > 10.0 * result.self_trend


def test_generate_features_rejects_empty():
    with pytest.raises(ValueError):
        generate_features(SCENARIOS[1], 0, seed=1)

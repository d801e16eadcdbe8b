import json

import numpy as np
import pytest

import invmc


def test_benchmarks_listed():
    assert invmc.benchmark_names() == ["arbitrage", "hydro", "battery"]


def test_unknown_benchmark_and_bad_override():
    with pytest.raises(KeyError):
        invmc.Benchmark("nope")
    with pytest.raises(ValueError):
        invmc.Benchmark("arbitrage", '{"bogus": 1}')


def test_paths_round_trip():
    b = invmc.Benchmark("arbitrage", '{"dt": 0.02}')
    paths = b.simulate(20, 3)
    a = paths.to_numpy()
    assert a.shape == (20, b.horizon + 1, 1)
    assert np.allclose(a[:, 0, 0], b.x0[0])
    back = invmc.PathSet.from_numpy(a)
    assert np.array_equal(back.to_numpy(), a)


def test_regress_later_beats_myopic():
    b = invmc.Benchmark("arbitrage", '{"dt": 0.02}')
    train = b.simulate(300, 1)
    test = b.simulate(300, 2)
    result = invmc.solve(b, train, "RL", "value")
    report = invmc.evaluate(result.policy, b, test)
    base = invmc.myopic(b, test)
    assert report.constraint_violations == 0
    assert report.mean_value > base.mean_value
    assert len(report.per_path_values) == 300

    again = invmc.solve(b, train, "RL", "value")
    assert again.policy.to_json() == result.policy.to_json()
    restored = invmc.Policy.from_json(result.policy.to_json())
    d = restored.decide(b, 0, b.x0, b.i0)
    assert d["control"][0] in (-11.5, 0.0, 11.5)


def test_least_squares_matches_numpy():
    rng = np.random.default_rng(0)
    design = rng.normal(size=(50, 4))
    y = rng.normal(size=50)
    beta, rank = invmc.fit_least_squares(design, y)
    ref = np.linalg.lstsq(design, y, rcond=None)[0]
    assert rank == 4
    assert np.allclose(beta, ref, atol=1e-10)


def test_run_experiment(tmp_path):
    config = {
        "benchmark": "arbitrage",
        "overrides": {"dt": 0.02},
        "eval": {"paths": 50, "seed": 3},
        "runs": [
            {"id": "my", "algorithm": "myopic"},
            {"id": "rl", "algorithm": "RL", "mode": "value", "M": 100, "baseline": "my"},
        ],
    }
    rows = invmc.run_experiment(config, tmp_path)
    assert [r["run_id"] for r in rows] == ["my", "rl"]
    assert rows[1]["uplift"] == pytest.approx(rows[1]["eval_mean"] - rows[0]["eval_mean"])
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["runs"]) == 2

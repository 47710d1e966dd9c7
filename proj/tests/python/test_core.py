import numpy as np
import pytest

import ibridge

# Reference values computed offline with statsmodels (survdiff, SurvfuncRight).
TIMES = np.array([2, 3, 3, 5, 6, 7, 7, 8, 10, 12, 13, 15, 16, 18, 20], dtype=float)
EVENTS = np.array([1, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0], dtype=np.int32)
GROUP = np.array([0, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1], dtype=np.int32)
KM_TIMES = [2, 3, 5, 6, 7, 8, 10, 13, 16, 18]
KM_SURV = [0.9333333333333333, 0.8666666666666667, 0.7944444444444445, 0.7222222222222222,
           0.65, 0.56875, 0.48750000000000004, 0.39, 0.26, 0.13]


def test_version_and_presets():
    assert ibridge.__version__
    names = ibridge.presets()
    assert "table2-ar08-case1-h25" in names
    assert "nhl-synthetic" in names


def test_lambda_tau():
    assert ibridge.lambda_to_tau(2.0, 0.5) == pytest.approx(1.0, rel=1e-14)
    assert ibridge.lambda_to_tau(4.0, 0.5) == pytest.approx(4.0, rel=1e-14)
    assert ibridge.tau_to_lambda(ibridge.lambda_to_tau(0.3, 0.7), 0.7) == pytest.approx(0.3, rel=1e-13)
    with pytest.raises(ValueError):
        ibridge.lambda_to_tau(1.0, 1.5)


def test_km_weights_match_survival_jumps():
    order, weights = ibridge.km_weights(np.log(TIMES), EVENTS)
    sorted_t = TIMES[order]
    sorted_e = EVENTS[order]
    assert np.all(weights >= 0)
    assert weights.sum() <= 1 + 1e-12
    surv_before = 1.0
    for t, s in zip(KM_TIMES, KM_SURV):
        mask = (sorted_t == t) & (sorted_e == 1)
        assert weights[mask].sum() == pytest.approx(surv_before - s, abs=1e-12)
        surv_before = s
    assert np.all(weights[sorted_e == 0] == 0)


def test_logrank_reference():
    stat, p = ibridge.logrank(TIMES, EVENTS, GROUP)
    assert stat == pytest.approx(1.1490608722988496, rel=1e-12)
    assert p == pytest.approx(0.28374582823179006, rel=1e-10)


@pytest.fixture(scope="module")
def dataset():
    return ibridge.simulate("table7-ar08-case1-homo", seed=3)


def test_simulate(dataset):
    assert dataset.n == 300
    assert dataset.subtype_ids == ["subtype1", "subtype2", "subtype3"]
    assert len(dataset.gene_ids) == 200
    assert len(dataset.truth) == 12
    assert 0.2 < dataset.censoring < 0.4
    g = dataset.genotype(0)
    assert g.shape == (100, 1000)
    assert set(np.unique(g)) <= {0.0, 1.0, 2.0}
    assert np.all(dataset.times(1) > 0)
    again = ibridge.simulate("table7-ar08-case1-homo", seed=3)
    assert np.array_equal(again.genotype(2), dataset.genotype(2))
    with pytest.raises(ValueError):
        ibridge.simulate("no-such-preset")


def test_csv_round_trip(dataset, tmp_path):
    dataset.save_csv(str(tmp_path))
    back = ibridge.Dataset.load_csv(str(tmp_path))
    assert back.n == dataset.n
    assert back.truth is None
    assert np.array_equal(back.events(0), dataset.events(0))
    assert np.allclose(back.times(2), dataset.times(2), rtol=0, atol=0)
    with pytest.raises(RuntimeError):
        ibridge.Dataset.load_csv(str(tmp_path / "missing"))


def test_fit_recovers_truth(dataset):
    result = ibridge.fit(dataset, gammas=[0.7], grid_size=20, threads=1)
    selected = set(result["selected"])
    truth = set(dataset.truth)
    assert len(selected & truth) >= 11
    assert len(selected) <= 16
    assert result["outer_monotone_violations"] == 0
    assert result["kkt_failures"] == 0
    assert len(result["grid"]) == 20
    trace = result["objective_trace"]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(trace, trace[1:]))
    assert all(v > 0 for v in result["norms"].values())

import json

import numpy as np
import pytest

from usefs import ensemble, synthetic
from usefs.data_model import filter_by_completion, ingest_csv, read_schema
from usefs.imputation import impute_mean
from usefs.synthetic import SyntheticSpec, generate

SMALL = SyntheticSpec(n_pos=20, n_neg=80, n_informative=3, n_noise_numerical=8, n_noise_categorical=3)


def test_deterministic():
    a, ta = generate(SMALL)
    b, tb = generate(SMALL)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.outcome, b.outcome)
    assert ta == tb
    c, _ = generate(SyntheticSpec(**{**SMALL.__dict__, "seed": 1}))
    assert not np.array_equal(np.nan_to_num(a.values), np.nan_to_num(c.values))


def test_shape_and_exact_imbalance():
    d, truth = generate(SMALL)
    assert (d.n_rows, d.n_features) == (100, 14)
    assert int(d.outcome.sum()) == 20
    assert len(truth.informative_features) == 3
    assert sum(d.is_categorical()) == 3
    assert d.is_categorical()[truth.informative_features].sum() == 0


def test_label_noise_flips_labels():
    d, _ = generate(SyntheticSpec(**{**SMALL.__dict__, "label_noise": 0.5}))
    assert int(d.outcome.sum()) != 20


def test_missing_ramp_within_three_sd():
    spec = SyntheticSpec(n_pos=100, n_neg=900, n_informative=5, n_noise_numerical=15, n_noise_categorical=5, missing_profile=(0.0, 0.6))
    d, truth = generate(spec)
    n = d.n_rows
    for j, rate in enumerate(truth.true_missing_rates):
        observed = d.missing[:, j].mean()
        sd = np.sqrt(rate * (1 - rate) / n)
        assert abs(observed - rate) <= 3 * sd + 1e-12
    assert truth.true_missing_rates == pytest.approx(np.linspace(0, 0.6, 25).tolist())


def test_informative_mode_puts_signal_on_sparse_columns():
    spec = SyntheticSpec(**{**SMALL.__dict__, "missing_mode": "informative"})
    _, truth = generate(spec)
    rates = np.array(truth.true_missing_rates)
    inf = truth.informative_features
    noise = np.setdiff1d(np.arange(rates.size), inf)
    assert rates[inf].min() >= 0.25 - 1e-12
    assert rates[inf].mean() > rates[noise].mean()


def test_explicit_rates_and_validation():
    rates = [0.1] * 14
    _, truth = generate(SyntheticSpec(**{**SMALL.__dict__, "missing_profile": rates}))
    assert truth.true_missing_rates == rates
    for bad in (
        {"missing_profile": [0.1] * 3},
        {"missing_profile": (0.5, 0.1)},
        {"missing_profile": (0.0, 1.0)},
        {"n_neg": 5},
        {"missing_mode": "mnar"},
        {"label_noise": 2.0},
    ):
        with pytest.raises(ValueError):
            generate(SyntheticSpec(**{**SMALL.__dict__, **bad}))


def test_write_roundtrips(tmp_path):
    paths = synthetic.write(SMALL, tmp_path, "toy")
    d, truth = generate(SMALL)
    back = ingest_csv(paths["csv"], read_schema(paths["schema"]))
    np.testing.assert_array_equal(back.missing, d.missing)
    # category ids are renumbered on ingest, labels are not
    assert [back.labels_for(j) for j in range(d.n_features)] == [d.labels_for(j) for j in range(d.n_features)]
    meta = json.loads(paths["truth"].read_text())
    assert meta["informative_features"] == truth.informative_features


def test_table_scale_survives_filter():
    spec = SyntheticSpec(n_pos=66, n_neg=601, n_informative=20, n_noise_numerical=891, n_noise_categorical=100, missing_profile=(0.0, 0.3))
    d, _ = generate(spec)
    assert (d.n_rows, d.n_features) == (667, 1011)
    f = filter_by_completion(d, 0.7)
    assert f.n_features > 0.9 * d.n_features


def test_null_effect_gives_chance_auc():
    aucs = []
    for s in range(5):
        spec = SyntheticSpec(n_pos=20, n_neg=80, n_informative=3, n_noise_numerical=3, n_noise_categorical=0, effect_size=0.0, missing_profile=(0.0, 0.0), seed=s)
        d, truth = generate(spec)
        r = ensemble.evaluate(impute_mean(d), truth.informative_features, ensemble.EnsembleConfig(n_ways=5, seed=s))
        aucs.append(r.auc_score_based)
    assert abs(np.mean(aucs) - 0.5) <= 0.12

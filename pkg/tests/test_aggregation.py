import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_cla, brute_entropy_delta, brute_wma, brute_weighted_count, entropy_bits
from usefs import aggregation as ag
from usefs.data_model import from_arrays
from usefs.imputation import impute_mean

P_MAA = ag.VarianceWeightParams(1.0, 2.0)
P_EAA = ag.VarianceWeightParams(0.5, 2.0)


def test_cla_examples():
    assert ag.cla([[3, 1, 2]], 2).selected == [1, 2]
    s = ag.cla([[1, 2, 3], [2, 1, 3]], 2)
    assert s.per_feature_score.tolist() == [3, 3, 6]
    assert s.selected == [0, 1]
    with pytest.raises(ValueError):
        ag.cla([[1, 2]], 0)


def test_wma_examples():
    ranks = [[1, 2, 3, 4], [4, 3, 2, 1], [2, 1, 4, 3]]
    assert ag.wma(ranks, [0.7, 0.7, 0.7], 2).selected == ag.cla(ranks, 2).selected
    # the perfect way contributes nothing
    assert ag.wma([[1, 2, 3], [3, 2, 1]], [1.0, 0.5], 1).selected == [2]
    with pytest.raises(ValueError):
        ag.wma(ranks, [0.7, 1.2, 0.7], 2)


def test_ofa_caa_examples():
    sets = [{0, 2}] * 91
    s = ag.ofa(sets, 2, n_features=4)
    assert s.per_feature_score[0] == 91 and s.per_feature_score[1] == 0
    c = ag.caa([{2}], [0.8], 1, n_features=4)
    assert c.per_feature_score.tolist() == [0, 0, 0.8, 0]
    with pytest.raises(ValueError):
        ag.caa([{2}], [1.5], 1, n_features=4)


def test_weight_formulas():
    assert ag.maa_weight(0.8, 0.2, P_MAA) == pytest.approx(0.8 / 1.44, abs=1e-9)
    assert ag.maa_weight(0.8, 0.2, P_MAA) == pytest.approx(0.5556, abs=1e-4)
    assert ag.maa_weight(0.7, 0.0, P_MAA) == 0.7
    assert ag.maa_weight(0.7, 0.9, ag.VarianceWeightParams(1.0, 0.0)) == 0.7
    assert ag.eaa_weight(0.9, 0.0, P_EAA) == pytest.approx(3.6)
    assert ag.eaa_weight(0.0, 0.3, P_EAA) == 0.0
    ws = [ag.eaa_weight(0.9, d, P_EAA) for d in (0.0, 0.5, 1.0, 5.0, 50.0)]
    assert all(a > b for a, b in zip(ws, ws[1:]))
    with pytest.raises(ValueError):
        ag.VarianceWeightParams(0.0, 2.0)


def test_penalized_methods_prefer_cleaner_features():
    sets = [{0, 1}, {0, 1}, {0, 1, 2}]
    acc = [0.9, 0.8, 0.7]
    s = ag.maa(sets, acc, [0.5, 0.0, 0.1], P_MAA, 1)
    assert s.per_feature_score[1] > s.per_feature_score[0]
    e = ag.eaa(sets, acc, [1.0, 0.0, 0.0], P_EAA, 1)
    assert e.per_feature_score[1] > e.per_feature_score[0]
    # uniform penalties reproduce CAA's choice
    caa = ag.caa(sets, acc, 2, 3).selected
    assert ag.maa(sets, acc, [0.3] * 3, P_MAA, 2).selected == caa
    assert ag.eaa(sets, acc, [0.7] * 3, P_EAA, 2).selected == caa


def test_entropy_example():
    before = from_arrays([[0], [0], [1], [1], [np.nan], [np.nan]], [1, 0, 0, 0, 0, 0], ["c"], {"c": ["A", "B"]})
    after = impute_mean(before)
    assert after.values[:, 0].tolist() == [0, 0, 1, 1, 0, 0]
    delta = ag.entropy_delta(before, after)[0]
    expected = abs(entropy_bits([4, 2]) - entropy_bits([2, 2]))
    assert expected == pytest.approx(1 - (-(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)))
    assert delta == pytest.approx(expected, abs=1e-12)
    assert delta == pytest.approx(0.082, abs=1e-3)


def test_entropy_complete_feature_is_zero():
    d = from_arrays(np.random.default_rng(0).normal(size=(30, 2)), [1] + [0] * 29)
    assert ag.entropy_delta(d, d).tolist() == [0.0, 0.0]


def test_entropy_shape_mismatch():
    d = from_arrays(np.zeros((3, 2)), [1, 0, 0])
    with pytest.raises(ValueError):
        ag.entropy_delta(d, d.take(cols=[0]))


@pytest.mark.parametrize("seed", range(10))
def test_entropy_matches_histogram_oracle(seed):
    rng = np.random.default_rng(seed)
    x = np.c_[rng.normal(size=40), rng.integers(0, 3, 40), rng.exponential(size=40)]
    x[rng.random(x.shape) < 0.3] = np.nan
    x[0] = [0.0, 0.0, 0.0]
    d = from_arrays(x, [1] + [0] * 39, ["a", "c", "b"], {"c": ["p", "q", "r"]})
    full = impute_mean(d)
    ours = ag.entropy_delta(d, full)
    for j, kind in enumerate(["num", "cat", "num"]):
        before = [None if np.isnan(v) else v for v in d.values[:, j]]
        ref = brute_entropy_delta(before, full.values[:, j].tolist(), kind, 3)
        assert ours[j] == pytest.approx(ref, abs=1e-12)


def test_cla_matches_sum_oracle():
    rng = np.random.default_rng(2)
    ranks = [rng.permutation(6) + 1 for _ in range(7)]
    s = ag.cla(ranks, 3)
    ref_scores, ref_sel = brute_cla([r.tolist() for r in ranks], 3)
    assert s.per_feature_score.tolist() == ref_scores
    assert s.selected == ref_sel


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_aggregations_invariant_to_way_order(seed):
    rng = np.random.default_rng(seed)
    n_ways, F = int(rng.integers(1, 9)), int(rng.integers(1, 12))
    ranks = [rng.permutation(F) + 1 for _ in range(n_ways)]
    aucs = rng.random(n_ways)
    sets = [set(np.flatnonzero(rng.random(F) < 0.5).tolist()) for _ in range(n_ways)]
    acc = rng.random(n_ways)
    rates = rng.random(F)
    k = int(rng.integers(1, F + 1))
    perm = rng.permutation(n_ways)
    pr = [ranks[i] for i in perm]
    ps = [sets[i] for i in perm]

    def chosen(r, a, s, c):
        return [
            set(ag.cla(r, k).selected),
            set(ag.wma(r, a, k).selected),
            set(ag.ofa(s, k, F).selected),
            set(ag.caa(s, c, k, F).selected),
            set(ag.maa(s, c, rates, P_MAA, k).selected),
            set(ag.eaa(s, c, rates * 2, P_EAA, k).selected),
        ]

    base = chosen(ranks, aucs, sets, acc)
    assert base == chosen(pr, aucs[perm], ps, acc[perm])
    for sel in base:
        assert len(sel) == min(k, F)
    # OFA is CAA with unit accuracies
    assert set(ag.ofa(sets, k, F).selected) == set(ag.caa(sets, np.ones(n_ways), k, F).selected)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.floats(0, 1), st.floats(0, 1))
def test_penalized_scores_non_increasing(seed, a, b):
    rng = np.random.default_rng(seed)
    sets = [set(np.flatnonzero(rng.random(4) < 0.6).tolist()) for _ in range(5)]
    acc = rng.random(5)
    lo, hi = sorted((a, b))
    r_lo = np.array([lo, 0.2, 0.2, 0.2])
    r_hi = np.array([hi, 0.2, 0.2, 0.2])
    assert ag.maa(sets, acc, r_lo, P_MAA, 1).per_feature_score[0] >= ag.maa(sets, acc, r_hi, P_MAA, 1).per_feature_score[0]
    assert ag.eaa(sets, acc, r_lo * 3, P_EAA, 1).per_feature_score[0] >= ag.eaa(sets, acc, r_hi * 3, P_EAA, 1).per_feature_score[0]


def random_instance(rng, grid=False):
    n_ways, F = int(rng.integers(1, 10)), int(rng.integers(1, 13))
    ranks = [(rng.permutation(F) + 1).tolist() for _ in range(n_ways)]
    sets = [set(np.flatnonzero(rng.random(F) < rng.random()).tolist()) for _ in range(n_ways)]
    if grid:
        # coarse values make exact score ties frequent
        aucs = (rng.integers(0, 5, n_ways) / 4).tolist()
        acc = (rng.integers(0, 5, n_ways) / 4).tolist()
        rates = (rng.integers(0, 3, F) / 4).tolist()
        deltas = (rng.integers(0, 3, F) / 2).tolist()
    else:
        aucs = rng.random(n_ways).tolist()
        acc = rng.random(n_ways).tolist()
        rates = rng.random(F).tolist()
        deltas = (rng.random(F) * 2).tolist()
    k = int(rng.integers(1, F + 2))
    return ranks, aucs, sets, acc, rates, deltas, F, k


def check_against_brute(rng, grid):
    ranks, aucs, sets, acc, rates, deltas, F, k = random_instance(rng, grid)
    kk = min(k, F)
    pairs = [
        (ag.cla(ranks, k), brute_cla(ranks, kk)),
        (ag.wma(ranks, aucs, k), brute_wma(ranks, aucs, kk)),
        (ag.ofa(sets, k, F), brute_weighted_count(sets, lambda w, f: 1.0, F, kk)),
        (ag.caa(sets, acc, k, F), brute_weighted_count(sets, lambda w, f: acc[w], F, kk)),
        (
            ag.maa(sets, acc, rates, P_MAA, k),
            brute_weighted_count(sets, lambda w, f: acc[w] / (rates[f] + 1.0) ** 2.0, F, kk),
        ),
        (
            ag.eaa(sets, acc, deltas, P_EAA, k),
            brute_weighted_count(sets, lambda w, f: acc[w] / (deltas[f] + 0.5) ** 2.0, F, kk),
        ),
    ]
    for ours, (ref_scores, ref_sel) in pairs:
        assert ours.selected == ref_sel, ours.method
        np.testing.assert_allclose(ours.per_feature_score, ref_scores, rtol=0, atol=1e-12)


@pytest.mark.parametrize("grid", [False, True])
def test_all_methods_match_brute_force(grid):
    rng = np.random.default_rng(123 + grid)
    for _ in range(50):
        check_against_brute(rng, grid)


def test_aggregate_dispatch():
    with pytest.raises(ValueError):
        ag.aggregate("xyz", 2)
    s = ag.aggregate("ofa", 1, positive_sets=[{1}], n_features=3)
    assert s.selected == [1]
    assert s.to_dict(["a", "b", "c"])["selected_names"] == ["b"]

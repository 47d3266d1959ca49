"""Global statistics and distance-binned errors.

The brute-force oracle below re-implements every metric with plain Python
loops over pixels; it is the reference for the random-data equivalence
checks and stays independent of the vectorized implementation.
"""

import math

import numpy as np
import pytest

from sidebench.config import MetricConfig
from sidebench.metrics.standard import (
    binned_errors,
    global_metrics,
    log_rms,
    rel_error,
    rms,
    srel,
    threshold_accuracy,
)

from conftest import make_depth

CFG = MetricConfig()


def brute_force_metrics(y, ystar, delta_base=1.25):
    """Loop-based reference for rel, srel, rms, log_rms and the deltas."""
    pairs = list(zip(y, ystar))
    t = len(pairs)
    rel = sum(abs(a - b) / b for a, b in pairs) / t
    sq = sum(abs(a - b) ** 2 / b for a, b in pairs) / t
    root = math.sqrt(sum(abs(a - b) ** 2 for a, b in pairs) / t)
    logr = math.sqrt(sum((math.log10(a) - math.log10(b)) ** 2 for a, b in pairs) / t)
    deltas = []
    for i in (1, 2, 3):
        thr = delta_base ** i
        deltas.append(sum(1 for a, b in pairs if max(a / b, b / a) < thr) / t)
    return rel, sq, root, logr, deltas


class TestThresholdAccuracy:
    def test_identity_is_one(self):
        d = make_depth(np.full((3, 3), 2.0))
        for i in (1, 2, 3):
            assert threshold_accuracy(d, d, np.ones((3, 3), bool), i, CFG) == 1.0

    def test_uniform_ratio_above_threshold(self):
        gt = make_depth(np.full((2, 2), 2.0))
        pred = make_depth(gt.values * 1.3)
        assert threshold_accuracy(pred, gt, np.ones((2, 2), bool), 1, CFG) == 0.0

    def test_hand_enumerated(self):
        # ratios [1.2, 1, 1.25, 2]; strict < 1.25 passes 2 of 4
        gt = make_depth([[1.0, 2.0], [4.0, 8.0]])
        pred = make_depth([[1.2, 2.0], [5.0, 16.0]])
        assert threshold_accuracy(pred, gt, np.ones((2, 2), bool), 1, CFG) == 0.5

    def test_strict_inequality_at_exact_threshold(self):
        gt = make_depth([[1.0]])
        pred = make_depth([[1.25]])
        assert threshold_accuracy(pred, gt, np.ones((1, 1), bool), 1, CFG) == 0.0

    def test_monotone_in_i(self):
        rng = np.random.default_rng(0)
        gt = make_depth(rng.uniform(1, 10, (8, 8)))
        pred = make_depth(rng.uniform(1, 10, (8, 8)))
        v = np.ones((8, 8), bool)
        d1, d2, d3 = (threshold_accuracy(pred, gt, v, i, CFG) for i in (1, 2, 3))
        assert d1 <= d2 <= d3


class TestPointStatistics:
    def test_identity_zero(self):
        d = make_depth(np.full((2, 2), 3.0))
        v = np.ones((2, 2), bool)
        assert rel_error(d, d, v) == 0.0
        assert srel(d, d, v) == 0.0
        assert rms(d, d, v) == 0.0
        assert log_rms(d, d, v) == 0.0

    def test_hand_computed_rel_and_srel(self):
        # gt=[2,4], pred=[1,5]: rel = (0.5 + 0.25)/2; srel = (1/2 + 1/4)/2
        gt = make_depth([[2.0, 4.0]])
        pred = make_depth([[1.0, 5.0]])
        v = np.ones((1, 2), bool)
        assert rel_error(pred, gt, v) == 0.375
        assert srel(pred, gt, v) == 0.375

    def test_hand_computed_rms(self):
        gt = make_depth([[2.0, 4.0]])
        pred = make_depth([[1.0, 5.0]])
        assert rms(pred, gt, np.ones((1, 2), bool)) == 1.0

    def test_log_rms_is_base_ten(self):
        gt = make_depth([[1.0]])
        pred = make_depth([[10.0]])
        assert log_rms(pred, gt, np.ones((1, 1), bool)) == 1.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        gt_vals = rng.uniform(1, 10, 36)
        pred_vals = rng.uniform(1, 10, 36)
        perm = rng.permutation(36)
        a = (make_depth(pred_vals.reshape(6, 6)), make_depth(gt_vals.reshape(6, 6)))
        b = (make_depth(pred_vals[perm].reshape(6, 6)), make_depth(gt_vals[perm].reshape(6, 6)))
        v = np.ones((6, 6), bool)
        for fn in (rel_error, srel, rms, log_rms):
            assert fn(*a, v) == pytest.approx(fn(*b, v), abs=1e-13)

    def test_t_zero_raises(self):
        d = make_depth(np.ones((2, 2)))
        for fn in (rel_error, srel, rms, log_rms):
            with pytest.raises(ValueError):
                fn(d, d, np.zeros((2, 2), bool))


class TestOracleEquivalence:
    def test_random_pairs_match_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            gt_vals = rng.uniform(0.5, 20, (8, 8))
            pred_vals = gt_vals * rng.uniform(0.5, 2.0, (8, 8))
            gt, pred = make_depth(gt_vals), make_depth(pred_vals)
            v = np.ones((8, 8), bool)
            m = global_metrics(pred, gt, v, CFG)
            e_rel, e_srel, e_rms, e_log, e_delta = brute_force_metrics(
                pred_vals.ravel(), gt_vals.ravel())
            assert abs(m.rel - e_rel) < 1e-12
            assert abs(m.srel - e_srel) < 1e-12
            assert abs(m.rms - e_rms) < 1e-12
            assert abs(m.log_rms - e_log) < 1e-12
            for got, want in zip(m.delta, e_delta):
                assert abs(got - want) < 1e-12

    def test_delta_non_decreasing(self):
        rng = np.random.default_rng(3)
        gt = make_depth(rng.uniform(1, 10, (8, 8)))
        pred = make_depth(rng.uniform(1, 10, (8, 8)))
        m = global_metrics(pred, gt, np.ones((8, 8), bool), CFG)
        assert m.delta[0] <= m.delta[1] <= m.delta[2]


class TestBinnedErrors:
    def test_single_populated_bin(self):
        gt = make_depth(np.full((2, 2), 2.5))
        b = binned_errors(gt, gt, np.ones((2, 2), bool), CFG)
        counts = [s.count for s in b.bins]
        assert counts == [0, 0, 4]

    def test_identity_bins_have_zero_stats(self):
        rng = np.random.default_rng(4)
        gt = make_depth(rng.uniform(0.5, 6, (5, 5)))
        b = binned_errors(gt, gt, np.ones((5, 5), bool), CFG)
        for s in b.bins:
            if s.count:
                assert s.mean_rel == 0.0 and s.std_rel == 0.0 and s.rms == 0.0

    def test_two_bin_enumeration(self):
        # gt=[0.5, 1.5], pred=[1.0, 1.5]: bin 0 mean_rel 1.0, bin 1 mean_rel 0
        gt = make_depth([[0.5, 1.5]])
        pred = make_depth([[1.0, 1.5]])
        b = binned_errors(pred, gt, np.ones((1, 2), bool), CFG)
        assert [s.count for s in b.bins] == [1, 1]
        assert b.bins[0].mean_rel == 1.0
        assert b.bins[1].mean_rel == 0.0

    def test_counts_sum_to_t_and_empty_bins_flagged(self):
        rng = np.random.default_rng(5)
        vals = rng.uniform(0.5, 9, (8, 8))
        vals[0, 0] = 0.0
        gt = make_depth(vals)
        pred = make_depth(np.where(vals > 0, vals * 1.1, 0.0))
        valid = pred.valid & gt.valid
        b = binned_errors(pred, gt, valid, CFG)
        assert b.total_count == int(valid.sum())
        for s in b.bins:
            if s.count == 0:
                assert s.mean_rel is None and s.std_rel is None and s.rms is None

    def test_population_std(self):
        gt = make_depth([[1.0, 1.0]])
        pred = make_depth([[1.1, 1.3]])
        b = binned_errors(pred, gt, np.ones((1, 2), bool), CFG)
        r = np.array([0.1, 0.3]) / 1.0
        # population std, not sample std
        assert b.bins[1].std_rel == pytest.approx(float(np.std(r)), abs=1e-15)

    def test_recombination_reproduces_global_rel(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            gt = make_depth(rng.uniform(0.5, 8, (8, 8)))
            pred = make_depth(rng.uniform(0.5, 8, (8, 8)))
            v = np.ones((8, 8), bool)
            b = binned_errors(pred, gt, v, CFG)
            recombined = sum(s.count * s.mean_rel for s in b.bins if s.count) / b.total_count
            assert recombined == pytest.approx(rel_error(pred, gt, v), abs=1e-12)

    def test_recombination_exact_on_dyadic_data(self):
        # power-of-two bin counts and dyadic errors make every float op exact
        gt_vals = np.repeat([0.5, 1.5, 2.5, 3.5], 16).reshape(8, 8)
        factors = 1.0 + (np.arange(64).reshape(8, 8) % 16) / 64.0
        pred_vals = gt_vals * factors
        gt, pred = make_depth(gt_vals), make_depth(pred_vals)
        v = np.ones((8, 8), bool)
        b = binned_errors(pred, gt, v, CFG)
        recombined = sum(s.count * s.mean_rel for s in b.bins if s.count) / b.total_count
        assert recombined == rel_error(pred, gt, v)

    def test_bin_edges_partition_range(self):
        gt = make_depth(np.full((2, 2), 4.2))
        b = binned_errors(gt, gt, np.ones((2, 2), bool), CFG)
        assert b.bin_edges.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]

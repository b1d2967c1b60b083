from __future__ import annotations

import numpy as np
import pytest

from evoclust import HeuristicSet, build_index, isotropy_scores, reassign_small
from evoclust.refine import NOISE

IDENTITY = HeuristicSet.from_mode("identity")
DEFAULT = HeuristicSet.from_mode("default")


class TestIsotropyScores:
    def test_surrounding_cross(self):
        x = np.zeros(2)
        pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        scores = isotropy_scores(x, pts, np.zeros(4, dtype=int))
        sc = scores[0]
        assert sc.count == 4
        assert sc.resultant_norm == pytest.approx(0.0, abs=1e-12)
        assert sc.isotropy == pytest.approx(4.0)
        assert sc.min_dist == pytest.approx(1.0)
        assert sc.score == pytest.approx(4.0)

    def test_collinear_degeneracy(self):
        x = np.zeros(2)
        pts = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        sc = isotropy_scores(x, pts, np.zeros(3, dtype=int))[0]
        assert sc.isotropy == pytest.approx(0.0, abs=1e-12)
        assert sc.score == pytest.approx(0.0, abs=1e-12)

    def test_majority_loses_to_surrounding(self):
        # cluster A: two surrounding neighbors at distance 1 -> S=2
        # cluster B: three one-sided neighbors at distance ~2 -> S~0
        x = np.zeros(2)
        pts = np.array(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.05, 2.0], [-0.05, 2.0]]
        )
        labels = np.array([0, 0, 1, 1, 1])
        scores = isotropy_scores(x, pts, labels)
        assert scores[0].score > scores[1].score
        best = max(scores.values(), key=lambda s: (s.score, -s.cluster_id))
        assert best.cluster_id == 0

    def test_zero_distance_neighbor_neutral(self):
        x = np.zeros(2)
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
        sc = isotropy_scores(x, pts, np.zeros(3, dtype=int))[0]
        # duplicate counts toward mass but adds no direction; min_dist floored
        assert sc.count == 3
        assert sc.resultant_norm == pytest.approx(0.0, abs=1e-12)
        assert sc.min_dist == 1e-12
        assert sc.score > 0

    def test_empty_neighbors(self):
        assert isotropy_scores(np.zeros(2), np.empty((0, 2)), np.empty(0, dtype=int)) == {}


def _grid_cluster(center, n, spacing=0.1):
    side = int(np.ceil(np.sqrt(n)))
    xs, ys = np.meshgrid(np.arange(side), np.arange(side))
    pts = np.column_stack([xs.ravel(), ys.ravel()])[:n] * spacing
    return pts + np.asarray(center)


class TestReassignSmall:
    def test_all_large_untouched(self):
        values = np.vstack([_grid_cluster((0, 0), 20), _grid_cluster((5, 5), 20)])
        labels = np.r_[np.zeros(20, int), np.ones(20, int)]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=5, policy="reassign",
                             k=10, hset=DEFAULT, scale=50.0)
        assert np.array_equal(out, labels)

    def test_singleton_absorbed(self):
        blob = _grid_cluster((0, 0), 30)
        lone = np.array([[0.35, 0.15]])
        values = np.vstack([blob, lone])
        labels = np.r_[np.zeros(30, int), np.array([1])]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=2, policy="reassign",
                             k=8, hset=DEFAULT, scale=2.0)
        assert out[30] == 0
        assert len(np.unique(out)) == 1

    def test_noise_policy(self):
        values = np.vstack([_grid_cluster((0, 0), 50), _grid_cluster((9, 9), 3)])
        labels = np.r_[np.zeros(50, int), np.ones(3, int)]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=5, policy="noise",
                             k=10, hset=DEFAULT, scale=200.0)
        assert (out[50:] == NOISE).all()
        assert (out[:50] == 0).all()

    def test_never_creates_ids(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=(60, 2))
        labels = rng.integers(0, 6, size=60)
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=8, policy="reassign",
                             k=10, hset=IDENTITY, scale=10.0)
        assert set(np.unique(out)) - {NOISE} <= set(np.unique(labels))

    def test_one_pass_small_cannot_join_small(self):
        # two adjacent singletons far from the big cluster: neither may adopt
        # the other's label even though they are mutual nearest neighbors
        values = np.vstack([_grid_cluster((0, 0), 20), [[8.0, 8.0], [8.05, 8.0]]])
        labels = np.r_[np.zeros(20, int), np.array([1, 2])]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=2, policy="reassign",
                             k=5, hset=IDENTITY, scale=200.0)
        assert out[20] != 2 and out[21] != 1

    def test_reassigned_only_into_originally_large(self):
        values = np.vstack([_grid_cluster((0, 0), 10), _grid_cluster((0.9, 0), 4)])
        labels = np.r_[np.zeros(10, int), np.ones(4, int)]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=5, policy="reassign",
                             k=8, hset=IDENTITY, scale=3.0)
        assert set(np.unique(out)) <= {0, NOISE}

    def test_policy_equivalence_on_large_clusters(self):
        rng = np.random.default_rng(1)
        values = np.vstack([
            rng.normal((0, 0), 0.3, (40, 2)),
            rng.normal((5, 0), 0.3, (40, 2)),
            rng.normal((2.5, 4), 0.3, (3, 2)),
        ])
        labels = np.r_[np.zeros(40, int), np.ones(40, int), np.full(3, 2)]
        idx = build_index(values, "exact")
        kwargs = dict(min_size=5, k=10, hset=DEFAULT, scale=dataset_scale_of(values))
        noised = reassign_small(labels, values, idx, policy="noise", **kwargs)
        moved = reassign_small(labels, values, idx, policy="reassign", **kwargs)
        originally_large = labels < 2
        assert np.array_equal(noised[originally_large], moved[originally_large])

    def test_h4_cap_sends_far_points_to_noise(self):
        values = np.vstack([_grid_cluster((0, 0), 30), [[50.0, 50.0]]])
        labels = np.r_[np.zeros(30, int), np.array([1])]
        idx = build_index(values, "exact")
        out = reassign_small(labels, values, idx, min_size=2, policy="reassign",
                             k=5, hset=DEFAULT, scale=dataset_scale_of(values))
        assert out[30] == NOISE


def dataset_scale_of(values: np.ndarray) -> float:
    ranges = values.max(axis=0) - values.min(axis=0)
    return float((ranges**2).sum())

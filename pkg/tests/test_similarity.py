"""Feature distances, similarity construction, and preference calibration."""

import math

import numpy as np
import pytest

from geoap.engine import EngineConfig, Mode, run
from geoap.errors import CalibrationError
from geoap.similarity import (
    FeatureMetric,
    build_similarity,
    calibrate_preference,
    feature_distance,
    median_offdiagonal,
    set_shared_preference,
)

from conftest import two_blob_features


class TestFeatureDistance:
    def test_euclidean_hand_value(self):
        assert feature_distance([0, 0], [3, 4], FeatureMetric.EUCLIDEAN) == pytest.approx(5.0)

    def test_manhattan_hand_value(self):
        assert feature_distance([1, -2], [4, 2], FeatureMetric.MANHATTAN) == pytest.approx(7.0)

    def test_cosine_hand_values(self):
        assert feature_distance([1, 0], [0, 1], FeatureMetric.COSINE) == pytest.approx(1.0)
        assert feature_distance([1, 1], [2, 2], FeatureMetric.COSINE) == pytest.approx(0.0)
        assert feature_distance([1, 0], [-1, 0], FeatureMetric.COSINE) == pytest.approx(2.0)

    def test_cosine_zero_vector_is_unit_distance(self):
        assert feature_distance([0, 0], [1, 2], FeatureMetric.COSINE) == 1.0
        assert feature_distance([0, 0], [0, 0], FeatureMetric.COSINE) == 1.0

    def test_identical_points_are_at_distance_zero(self):
        for kind in FeatureMetric:
            assert feature_distance([2.5, -1], [2.5, -1], kind) == pytest.approx(0.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            feature_distance([1, 2], [1, 2, 3], FeatureMetric.EUCLIDEAN)


class TestBuildSimilarity:
    @pytest.mark.parametrize("kind", list(FeatureMetric))
    def test_matches_scalar_distance(self, kind):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(6, 3))
        sim = build_similarity(x, kind)
        for i in range(6):
            for j in range(6):
                if i == j:
                    assert math.isnan(sim.s[i, j])
                else:
                    assert sim.s[i, j] == pytest.approx(-feature_distance(x[i], x[j], kind))

    def test_off_diagonal_nonpositive_and_symmetric(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(10, 4))
        sim = build_similarity(x, FeatureMetric.COSINE)
        off = ~np.eye(10, dtype=bool)
        assert (sim.s[off] <= 0).all()
        assert np.array_equal(sim.s[off], sim.s.T[off])

    def test_preference_unset_until_assigned(self):
        sim = build_similarity([[0.0], [1.0]], FeatureMetric.EUCLIDEAN)
        assert not sim.preference_set
        assert sim.preference is None
        withp = set_shared_preference(sim, -2.0)
        assert withp.preference_set
        assert withp.preference == -2.0
        assert (withp.s.diagonal() == -2.0).all()
        # original untouched
        assert math.isnan(sim.s[0, 0])

    def test_set_shared_preference_requires_finite(self):
        sim = build_similarity([[0.0], [1.0]], FeatureMetric.EUCLIDEAN)
        with pytest.raises(ValueError):
            set_shared_preference(sim, float("-inf"))

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            build_similarity([[1.0, 2.0]], FeatureMetric.EUCLIDEAN)

    def test_zero_feature_row_under_cosine(self):
        sim = build_similarity([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], FeatureMetric.COSINE)
        assert sim.s[0, 1] == -1.0
        assert sim.s[0, 2] == -1.0

    def test_median_offdiagonal(self):
        sim = build_similarity([[0.0], [1.0], [3.0]], FeatureMetric.EUCLIDEAN)
        # off-diagonal similarities: -1, -3, -2 (each twice)
        assert median_offdiagonal(sim) == pytest.approx(-2.0)


class TestCalibratePreference:
    def test_hits_target_on_separated_blobs(self):
        sim = build_similarity(two_blob_features(seed=0), FeatureMetric.EUCLIDEAN)
        config = EngineConfig()
        pref, result = calibrate_preference(sim, config, target_k=2)
        assert result.k == 2
        # one exemplar per blob, and the split follows the blobs
        a, b = result.exemplars
        assert a < 4 <= b
        assert len(set(result.labels[:4])) == 1
        assert len(set(result.labels[4:])) == 1

    def test_probe_matches_independent_run(self):
        sim = build_similarity(two_blob_features(seed=1), FeatureMetric.EUCLIDEAN)
        config = EngineConfig()
        pref, result = calibrate_preference(sim, config, target_k=2)
        again = run(set_shared_preference(sim, pref), None, config)
        assert np.array_equal(result.labels, again.labels)
        assert result.exemplars == again.exemplars
        assert result.net_similarity == again.net_similarity

    def test_geometric_calibration_passes_mask_through(self, karate_modularity, karate_sim):
        from geoap.graph import TopoDistance, neighborhood_mask

        mask = neighborhood_mask(karate_modularity.graph, TopoDistance.JACCARD, 0.8)
        config = EngineConfig(mode=Mode.GEOMETRIC)
        pref, result = calibrate_preference(karate_sim, config, target_k=4, mask=mask)
        assert result.k == 4

    def test_unreachable_count_reports_closest(self, karate_sim):
        """The karate matrix never settles at exactly two clusters in
        standard mode; the error carries the nearest achieved count."""
        config = EngineConfig()
        with pytest.raises(CalibrationError) as exc_info:
            calibrate_preference(karate_sim, config, target_k=2)
        err = exc_info.value
        assert err.closest_k is not None and err.closest_k != 2
        assert err.closest_result is not None
        assert err.closest_result.k == err.closest_k
        assert isinstance(err.closest_preference, float)

    def test_target_must_be_positive_and_below_n(self):
        sim = build_similarity(two_blob_features(seed=2), FeatureMetric.EUCLIDEAN)
        config = EngineConfig()
        with pytest.raises(ValueError):
            calibrate_preference(sim, config, target_k=0)
        with pytest.raises(ValueError):
            calibrate_preference(sim, config, target_k=sim.n + 1)

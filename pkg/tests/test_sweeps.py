"""Protocol layer: metric evaluation, sweeps, and the relabeling ablation."""

import numpy as np
import pytest

from geoap.data import Dataset
from geoap.engine import EngineConfig, Mode, run
from geoap.graph import Graph, TopoDistance, neighborhood_mask
from geoap.similarity import (
    FeatureMetric,
    build_similarity,
    calibrate_preference,
    median_offdiagonal,
    set_shared_preference,
)
from geoap.sweeps import (
    ablation,
    evaluate_labels,
    prepare_similarity,
    resolve_and_run,
    sweep_k,
    sweep_tau,
)

from conftest import two_blob_features


def clique_blobs():
    """Two feature blobs whose graph is two disjoint 4-cliques."""
    features = two_blob_features(seed=20)
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    edges += [(i + 4, j + 4) for i, j in edges]
    graph = Graph(8, edges)
    truth = ["low"] * 4 + ["high"] * 4
    return Dataset(ids=[str(i) for i in range(8)], features=features, graph=graph,
                   truth=truth)


@pytest.fixture(scope="module")
def blobs():
    return clique_blobs()


@pytest.fixture(scope="module")
def blob_sim(blobs):
    return build_similarity(blobs.features, FeatureMetric.EUCLIDEAN)


class TestEvaluateLabels:
    def test_scores_only_labeled_nodes(self):
        ds = Dataset(
            ids=["a", "b", "c", "d"],
            features=None,
            graph=None,
            truth=["x", "x", "y", None],
        )
        values = evaluate_labels(ds, np.array([0, 0, 2, 2]))
        assert values == {
            "nmi": pytest.approx(100.0),
            "cr": pytest.approx(100.0),
            "f1": pytest.approx(100.0),
            "n_evaluated": 3,
        }

    def test_percent_scaling(self):
        ds = Dataset(
            ids=list("abcd"), features=None, graph=None, truth=["x", "x", "y", "y"]
        )
        # one cluster over two balanced classes: nmi 0, cr 50
        values = evaluate_labels(ds, np.array([0, 0, 0, 0]))
        assert values["nmi"] == pytest.approx(0.0, abs=1e-9)
        assert values["cr"] == pytest.approx(50.0)
        assert values["n_evaluated"] == 4

    def test_none_without_any_truth(self):
        ds = Dataset(ids=["a", "b"], features=None, graph=None, truth=[None, None])
        assert evaluate_labels(ds, np.array([0, 1])) is None


class TestPrepareSimilarity:
    def test_requires_features(self):
        ds = Dataset(ids=["a"], features=None, graph=None, truth=[None])
        with pytest.raises(ValueError, match="features"):
            prepare_similarity(ds, FeatureMetric.EUCLIDEAN)

    def test_builds_from_features(self, blobs):
        sim = prepare_similarity(blobs, FeatureMetric.EUCLIDEAN)
        assert sim.n == 8
        assert not sim.preference_set


class TestResolveAndRun:
    def test_mutually_exclusive_arguments(self, blob_sim):
        with pytest.raises(ValueError, match="not both"):
            resolve_and_run(blob_sim, None, EngineConfig(), preference=-1.0, target_k=2)

    def test_defaults_to_median_preference(self, blob_sim):
        pref, result = resolve_and_run(blob_sim, None, EngineConfig())
        assert pref == median_offdiagonal(blob_sim)
        direct = run(set_shared_preference(blob_sim, pref), None, EngineConfig())
        assert np.array_equal(result.labels, direct.labels)

    def test_explicit_preference_is_used(self, blob_sim):
        pref, result = resolve_and_run(blob_sim, None, EngineConfig(), preference=-10.0)
        assert pref == -10.0
        assert result.k == 2

    def test_target_k_calibrates(self, blob_sim):
        pref, result = resolve_and_run(blob_sim, None, EngineConfig(), target_k=2)
        assert result.k == 2
        expect_pref, expect = calibrate_preference(blob_sim, EngineConfig(), 2)
        assert pref == expect_pref
        assert np.array_equal(result.labels, expect.labels)

    def test_trace_fires_under_target_k(self, blob_sim):
        rows = []
        pref, result = resolve_and_run(
            blob_sim, None, EngineConfig(), target_k=2,
            trace=lambda *row: rows.append(row),
        )
        assert len(rows) == result.iterations_run > 0


class TestSweepTau:
    def test_grid_and_tie_rule(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC)
        report = sweep_tau(
            blobs, blob_sim, TopoDistance.JACCARD, [0.5, 1.0], 2, config
        )
        assert report.axis == "tau"
        assert [c.value for c in report.cells] == [0.5, 1.0]
        for cell in report.cells:
            assert cell.error is None
            assert cell.k == 2
            assert cell.metrics["nmi"] == pytest.approx(100.0)
        # equal scores tie toward the smaller threshold
        assert report.optimum == 0.5

    def test_failed_cells_are_reported_not_raised(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC, max_iter=1, conv_iter=1)
        report = sweep_tau(blobs, blob_sim, TopoDistance.JACCARD, [0.5], 2, config)
        (cell,) = report.cells
        assert cell.error is not None
        assert cell.metrics is None
        assert report.optimum is None

    def test_requires_geometric_mode_truth_and_graph(self, blobs, blob_sim):
        with pytest.raises(ValueError, match="geometric"):
            sweep_tau(blobs, blob_sim, TopoDistance.JACCARD, [0.5], 2, EngineConfig())
        unlabeled = Dataset(
            ids=blobs.ids, features=blobs.features, graph=blobs.graph,
            truth=[None] * 8,
        )
        with pytest.raises(ValueError, match="ground-truth"):
            sweep_tau(
                unlabeled, blob_sim, TopoDistance.JACCARD, [0.5], 2,
                EngineConfig(mode=Mode.GEOMETRIC),
            )

    def test_report_serializes(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC)
        report = sweep_tau(blobs, blob_sim, TopoDistance.JACCARD, [1.0], 2, config)
        doc = report.to_dict()
        assert doc["axis"] == "tau"
        assert doc["topo"] == "jaccard"
        assert doc["target_k"] == 2
        assert doc["optimum"] == 1.0
        (row,) = doc["rows"]
        assert row["tau"] == 1.0 and row["k"] == 2 and "nmi" in row


class TestSweepK:
    def test_standard_sweep_mixes_successes_and_failures(self, blobs, blob_sim):
        # one cluster is unreachable here: merging blobs 50 units apart
        # costs more than any preference in the bracket recovers
        report = sweep_k(blobs, blob_sim, [1, 2], EngineConfig())
        assert report.axis == "k"
        by_value = {c.value: c for c in report.cells}
        assert by_value[2.0].k == 2
        assert by_value[2.0].metrics["nmi"] == pytest.approx(100.0)
        assert by_value[1.0].error is not None
        assert "k=1" in by_value[1.0].error
        assert report.optimum == 2.0

    def test_geometric_sweep_fixes_one_mask(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC)
        report = sweep_k(
            blobs, blob_sim, [2], config, topo_kind=TopoDistance.JACCARD, tau=0.5
        )
        (cell,) = report.cells
        assert cell.k == 2
        assert report.to_dict()["tau"] == 0.5

    def test_geometric_sweep_requires_topology(self, blobs, blob_sim):
        with pytest.raises(ValueError, match="tau"):
            sweep_k(blobs, blob_sim, [2], EngineConfig(mode=Mode.GEOMETRIC))

    def test_unreachable_count_yields_error_cell(self, karate_modularity, karate_sim):
        # the karate similarity matrix has no standard-mode operating
        # point with exactly two clusters
        report = sweep_k(karate_modularity, karate_sim, [2], EngineConfig())
        (cell,) = report.cells
        assert cell.error is not None
        assert "k=2" in cell.error or "closest" in cell.error


class TestAblation:
    def test_identity_permutation_reproduces_direct_run(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC)
        identity = [np.arange(8), np.arange(8)]
        report = ablation(
            blobs, blob_sim, TopoDistance.JACCARD, 0.5, 2, 2, 0, config,
            permutations=identity,
        )
        assert report.completed == 2
        assert report.seed is None  # explicit permutations disable the seed
        mask = neighborhood_mask(blobs.graph, TopoDistance.JACCARD, 0.5)
        pref, direct = calibrate_preference(blob_sim, config, 2, mask=mask)
        expect = evaluate_labels(blobs, direct.labels)
        for row in report.rows:
            assert row["k"] == 2
            assert row["preference"] == pref
            assert row["nmi"] == pytest.approx(expect["nmi"])
        assert report.mean["nmi"] == pytest.approx(expect["nmi"])
        assert report.std["nmi"] == pytest.approx(0.0, abs=1e-12)

    def test_seed_pins_the_permutation_sequence(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC)
        a = ablation(blobs, blob_sim, TopoDistance.JACCARD, 0.5, 2, 3, 42, config)
        b = ablation(blobs, blob_sim, TopoDistance.JACCARD, 0.5, 2, 3, 42, config)
        assert a.to_dict() == b.to_dict()
        assert a.seed == 42
        assert a.repetitions == 3
        assert a.completed + len(a.failures) == 3

    def test_failures_are_excluded_from_the_mean(self, blobs, blob_sim):
        config = EngineConfig(mode=Mode.GEOMETRIC, max_iter=1, conv_iter=1)
        report = ablation(blobs, blob_sim, TopoDistance.JACCARD, 0.5, 2, 2, 0, config)
        assert report.completed == 0
        assert len(report.failures) == 2
        assert report.mean == {} and report.std == {}
        doc = report.to_dict()
        assert doc["completed"] == 0
        assert len(doc["failures"]) == 2

    def test_requires_geometric_mode_and_graph(self, blobs, blob_sim):
        with pytest.raises(ValueError, match="geometric"):
            ablation(blobs, blob_sim, TopoDistance.JACCARD, 0.5, 2, 1, 0, EngineConfig())
        graphless = Dataset(
            ids=blobs.ids, features=blobs.features, graph=None, truth=blobs.truth
        )
        with pytest.raises(ValueError, match="edges"):
            ablation(
                graphless, blob_sim, TopoDistance.JACCARD, 0.5, 2, 1, 0,
                EngineConfig(mode=Mode.GEOMETRIC),
            )

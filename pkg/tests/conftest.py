"""Shared fixtures: the bundled karate fixtures and small synthetic helpers."""

from __future__ import annotations

import io
import contextlib
from pathlib import Path

import numpy as np
import pytest

from geoap.data import load_dataset
from geoap.similarity import FeatureMetric, build_similarity

DATA = Path(__file__).resolve().parent.parent / "data"
KARATE = DATA / "karate"


@pytest.fixture(scope="session")
def karate_split():
    """Karate dataset with the two-faction ground truth."""
    return load_dataset(
        features_path=str(KARATE / "features.txt"),
        edges_path=str(KARATE / "edges.txt"),
        labels_path=str(KARATE / "labels_split.txt"),
    )


@pytest.fixture(scope="session")
def karate_modularity():
    """Karate dataset with the four-community ground truth."""
    return load_dataset(
        features_path=str(KARATE / "features.txt"),
        edges_path=str(KARATE / "edges.txt"),
        labels_path=str(KARATE / "labels_modularity.txt"),
    )


@pytest.fixture(scope="session")
def karate_sim(karate_split):
    """Cosine similarity over the karate adjacency-profile features."""
    return build_similarity(karate_split.features, FeatureMetric.COSINE)


def two_blob_features(seed, per_blob=4, gap=50.0):
    """Two well-separated point clouds with an unambiguous medoid each:
    a center point plus evenly spaced unit-radius satellites (evenly
    spaced so no satellite can rival the center as an exemplar)."""
    rng = np.random.default_rng(seed)
    pts = []
    spokes = per_blob - 1
    for center in ((0.0, 0.0), (gap, gap)):
        c = np.array(center)
        pts.append(c)
        offset = rng.uniform(0, 2 * np.pi)
        for t in range(spokes):
            ang = offset + 2 * np.pi * t / spokes
            pts.append(c + np.array([np.cos(ang), np.sin(ang)]))
    return np.array(pts)


def run_cli(argv):
    """Invoke the CLI entry with captured stdout/stderr.

    Returns (exit_code, stdout, stderr).
    """
    from geoap.cli import main

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()

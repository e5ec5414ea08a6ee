"""External clustering quality measures against ground-truth classes.

All three measures start from the matching matrix: counts of points per
(predicted cluster, true class) pair. NMI and macro F1 are fractions in
[0, 1]; the classification rate is a percentage in [0, 100]. Cluster to
class mapping is by plurality and may send several clusters to one class;
count ties resolve to the lowest class id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MatchingMatrix:
    """Contingency counts between predicted clusters and true classes.

    Rows follow ``cluster_values`` (sorted distinct predicted labels),
    columns follow ``class_values`` (sorted distinct true labels).
    """

    counts: np.ndarray
    cluster_values: np.ndarray
    class_values: np.ndarray

    @property
    def n(self):
        return int(self.counts.sum())


def _as_labels(seq, name):
    arr = np.asarray(seq)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    return arr


def matching_matrix(pred, truth):
    """Build the contingency table of two equal-length label sequences."""
    pred = _as_labels(pred, "pred")
    truth = _as_labels(truth, "truth")
    if pred.shape != truth.shape:
        raise ValueError(
            f"label sequences differ in length: {pred.shape[0]} vs {truth.shape[0]}"
        )
    cluster_values, rows = np.unique(pred, return_inverse=True)
    class_values, cols = np.unique(truth, return_inverse=True)
    counts = np.zeros((cluster_values.size, class_values.size), dtype=np.int64)
    np.add.at(counts, (rows, cols), 1)
    return MatchingMatrix(counts=counts, cluster_values=cluster_values, class_values=class_values)


def nmi(pred, truth):
    """Normalized mutual information, 2 I / (H_pred + H_truth), in [0, 1].

    When both partitions are single-cluster the entropies vanish; the
    value is defined as 1 (the partitions are then identical).
    """
    mm = matching_matrix(pred, truth)
    n = mm.n
    joint = mm.counts / n
    p_row = joint.sum(axis=1)
    p_col = joint.sum(axis=0)
    h_row = -sum(p * math.log(p) for p in p_row if p > 0)
    h_col = -sum(p * math.log(p) for p in p_col if p > 0)
    if h_row + h_col == 0.0:
        return 1.0
    info = 0.0
    for l in range(joint.shape[0]):
        for h in range(joint.shape[1]):
            p = joint[l, h]
            if p > 0:
                info += p * math.log(p / (p_row[l] * p_col[h]))
    return 2.0 * info / (h_row + h_col)


def _cluster_to_class(mm):
    """Plurality class index per cluster row, ties to the lowest class id."""
    return np.argmax(mm.counts, axis=1)


def classification_rate(pred, truth):
    """Percentage of points whose cluster's plurality class matches their
    own class."""
    mm = matching_matrix(pred, truth)
    mapping = _cluster_to_class(mm)
    correct = int(mm.counts[np.arange(mm.counts.shape[0]), mapping].sum())
    return 100.0 * correct / mm.n


def macro_f1(pred, truth):
    """Unweighted mean F1 over all distinct true classes, in [0, 1].

    Each cluster is first mapped to its plurality class; precision and
    recall per class then come from the mapped assignment, with empty
    denominators scoring 0.
    """
    mm = matching_matrix(pred, truth)
    mapping = _cluster_to_class(mm)
    n_classes = mm.class_values.size
    # points assigned to class c after mapping, per true class
    assigned = np.zeros((n_classes, n_classes), dtype=np.int64)
    for row, cls in enumerate(mapping):
        assigned[cls] += mm.counts[row]
    f1_sum = 0.0
    for c in range(n_classes):
        tp = assigned[c, c]
        fp = assigned[c].sum() - tp
        fn = assigned[:, c].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        if precision + recall > 0:
            f1_sum += 2.0 * precision * recall / (precision + recall)
    return f1_sum / n_classes

"""File loading and result serialization.

Three plain-text inputs describe a dataset:

* features: one row per point, whitespace- or comma-separated numbers,
  optionally prefixed by a node id column;
* edges: one undirected edge per line as two whitespace-separated node
  ids; blank lines and ``#`` comments are ignored, duplicate and
  reversed-duplicate edges collapse, self-loops are dropped;
* labels: one ``node-id label`` pair per line, labels are arbitrary
  tokens.

Node ids are arbitrary tokens. The node universe is the union of ids
across the given files, ordered by first appearance (features first,
then edges, then labels), which makes loading order-stable. When a
features file is present every node must have a feature row.

Results serialize to a UTF-8 JSON document with a fixed field order, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .graph import Graph


@dataclass
class Dataset:
    """In-memory dataset: id universe, optional features/graph/truth."""

    ids: list
    features: np.ndarray | None
    graph: Graph | None
    truth: list  # one entry per node, None where no label was given

    @property
    def n(self):
        return len(self.ids)

    def labeled_indices(self):
        """Indices of nodes that carry a ground-truth label."""
        return [i for i, t in enumerate(self.truth) if t is not None]

    def truth_subset(self, indices):
        return [self.truth[i] for i in indices]


def _data_lines(path):
    """Yield (line_number, stripped_line) skipping blanks."""
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if line:
                yield lineno, line


def _parse_features(path, have_ids):
    ids, rows = [], []
    seen = set()
    dim = None
    for lineno, line in _data_lines(path):
        tokens = line.replace(",", " ").split()
        if have_ids:
            node, values = tokens[0], tokens[1:]
        else:
            node, values = str(len(ids)), tokens
        if not values:
            raise DataFormatError("feature row has no values", path, lineno)
        if node in seen:
            raise DataFormatError(f"duplicate feature row for id {node!r}", path, lineno)
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise DataFormatError(
                f"feature row has {len(values)} values, expected {dim}", path, lineno
            )
        try:
            row = [float(v) for v in values]
        except ValueError:
            raise DataFormatError(f"malformed feature value in row for {node!r}", path, lineno)
        seen.add(node)
        ids.append(node)
        rows.append(row)
    if not ids:
        raise DataFormatError("features file is empty", path)
    return ids, np.array(rows, dtype=np.float64)


def _parse_edges(path):
    pairs = []
    for lineno, line in _data_lines(path):
        if line.startswith("#"):
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise DataFormatError(
                f"edge line needs exactly two node ids, got {len(tokens)}", path, lineno
            )
        pairs.append((lineno, tokens[0], tokens[1]))
    return pairs


def _parse_labels(path):
    out = []
    seen = set()
    for lineno, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise DataFormatError(
                f"label line needs exactly 'node-id label', got {len(tokens)} tokens",
                path,
                lineno,
            )
        node, label = tokens
        if node in seen:
            raise DataFormatError(f"duplicate label for id {node!r}", path, lineno)
        seen.add(node)
        out.append((lineno, node, label))
    return out


def read_label_pairs(path):
    """Parse a label file into an ordered ``{node-id: label}`` mapping."""
    return {node: label for _, node, label in _parse_labels(path)}


def load_dataset(features_path=None, edges_path=None, labels_path=None, features_have_ids=False):
    """Load a dataset from any combination of the three files.

    At least one path must be given. When ``features_path`` is given and
    lacks an id column, row indices (``"0"``, ``"1"``, ...) become the
    ids, and the other files must use those tokens.
    """
    if features_path is None and edges_path is None and labels_path is None:
        raise ValueError("at least one of features, edges, labels must be given")

    feat_ids, feats = (None, None)
    if features_path is not None:
        feat_ids, feats = _parse_features(features_path, features_have_ids)

    edge_pairs = _parse_edges(edges_path) if edges_path is not None else []
    label_pairs = _parse_labels(labels_path) if labels_path is not None else []

    order = []
    index = {}

    def intern(token, path, lineno, what):
        if token in index:
            return index[token]
        if feat_ids is not None:
            raise DataFormatError(
                f"{what} references id {token!r} which has no feature row", path, lineno
            )
        index[token] = len(order)
        order.append(token)
        return index[token]

    if feat_ids is not None:
        for token in feat_ids:
            index[token] = len(order)
            order.append(token)
    for lineno, u, v in edge_pairs:
        intern(u, edges_path, lineno, "edge")
        intern(v, edges_path, lineno, "edge")
    for lineno, node, _ in label_pairs:
        intern(node, labels_path, lineno, "label")

    n = len(order)
    graph = None
    if edges_path is not None:
        mapped = []
        for _, u, v in edge_pairs:
            iu, iv = index[u], index[v]
            if iu == iv:
                continue  # self-loops carry no topology; drop silently
            mapped.append((iu, iv))
        graph = Graph(n, mapped)

    truth = [None] * n
    for _, node, label in label_pairs:
        truth[index[node]] = label

    return Dataset(ids=order, features=feats, graph=graph, truth=truth)


def _encode_value(value):
    """JSON-safe scalar: infinities become the strings '-inf' / 'inf'."""
    if isinstance(value, float) and math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return value


def _decode_value(value):
    if value == "-inf":
        return float("-inf")
    if value == "inf":
        return float("inf")
    return value


def build_result_document(dataset, result, params):
    """Assemble the result document for one clustering run.

    ``params`` is an ordered mapping echoing the effective configuration
    (mode, metric, topology, tau, preference, engine settings). Field
    order is fixed; serializing the same run twice gives identical bytes.
    """
    ids = dataset.ids
    doc = {
        "config": dict(params),
        "n": dataset.n,
        "ids": list(ids),
        "exemplars": [ids[e] for e in result.exemplars],
        "labels": [ids[c] for c in result.labels],
        "labels_pre_smoothing": [ids[c] for c in result.labels_pre_smoothing],
        "smoothed": result.smoothed,
        "net_similarity": _encode_value(result.net_similarity),
        "diagnostics": {
            "iterations_run": result.iterations_run,
            "converged": result.converged,
            "k": result.k,
        },
    }
    return doc


def attach_metrics(doc, metric_values):
    """Add a metrics block (already percentage-scaled) to a document."""
    doc["metrics"] = dict(metric_values)
    return doc


def write_result(doc, path):
    """Write a result document as UTF-8 JSON with stable field order."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, ensure_ascii=False, indent=2, sort_keys=False)
        f.write("\n")


def load_result(path):
    """Read back a result document; infinity strings are restored."""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if "net_similarity" in doc:
        doc["net_similarity"] = _decode_value(doc["net_similarity"])
    return doc

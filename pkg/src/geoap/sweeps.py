"""Experiment drivers: single runs, threshold sweeps, cluster-count
sweeps, and the random-relabeling ablation.

These functions sit between the CLI and the core library. They resolve
preferences (explicit value, calibration to a target cluster count, or
the median default), evaluate runs against ground truth, and collect
per-cell outcomes into report objects whose ``to_dict()`` forms are
JSON-ready with a fixed field order. Individual cell failures
(calibration, non-convergence, divergence) are recorded and excluded
from summary statistics instead of aborting a whole sweep.

Reported metric values are percentages (NMI and macro F1 scaled by 100,
the classification rate natively so).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Mode, run
from .errors import CalibrationError, DivergenceError, NonConvergenceError
from .graph import neighborhood_mask, permute_vertices
from .metrics import classification_rate, macro_f1, nmi
from .similarity import (
    build_similarity,
    calibrate_preference,
    median_offdiagonal,
    set_shared_preference,
)

_CELL_FAILURES = (CalibrationError, NonConvergenceError, DivergenceError)


def evaluate_labels(dataset, labels):
    """Percent-scale metrics of an assignment against the dataset truth,
    computed over labeled nodes only. None when the dataset has no
    ground-truth labels at all."""
    idx = dataset.labeled_indices()
    if not idx:
        return None
    pred = [int(labels[i]) for i in idx]
    truth = dataset.truth_subset(idx)
    return {
        "nmi": 100.0 * nmi(pred, truth),
        "cr": classification_rate(pred, truth),
        "f1": 100.0 * macro_f1(pred, truth),
        "n_evaluated": len(idx),
    }


def prepare_similarity(dataset, metric_kind):
    """Similarity matrix from the dataset's features (preference unset)."""
    if dataset.features is None:
        raise ValueError("this operation needs a features file")
    return build_similarity(dataset.features, metric_kind)


def resolve_and_run(sim, mask, config, preference=None, target_k=None, trace=None):
    """Run once, resolving the preference first.

    Exactly one of ``preference`` / ``target_k`` may be given; with
    neither, the median of the off-diagonal similarities is used.
    Returns ``(preference, result)``.
    """
    if preference is not None and target_k is not None:
        raise ValueError("give either a preference or a target cluster count, not both")
    if target_k is not None:
        preference, result = calibrate_preference(sim, config, target_k, mask=mask)
        if trace is not None:
            # Deterministic engine: re-running at the calibrated
            # preference reproduces the probe exactly, now with a trace.
            result = run(set_shared_preference(sim, preference), mask, config, trace=trace)
        return preference, result
    if preference is None:
        preference = median_offdiagonal(sim)
    result = run(set_shared_preference(sim, preference), mask, config, trace=trace)
    return float(preference), result


@dataclass(frozen=True)
class SweepCell:
    """One grid point of a sweep: metrics on success, a message on failure."""

    value: float
    k: int | None = None
    preference: float | None = None
    metrics: dict | None = None
    error: str | None = None

    def to_dict(self, axis):
        if self.error is not None:
            return {axis: self.value, "error": self.error}
        row = {axis: self.value, "k": self.k, "preference": self.preference}
        row.update(self.metrics)
        return row


@dataclass(frozen=True)
class SweepReport:
    """Outcome of a one-dimensional sweep.

    ``optimum`` is the axis value of the best successful cell by NMI,
    ties resolved toward the smaller axis value; None when every cell
    failed.
    """

    axis: str
    context: dict
    cells: tuple
    optimum: float | None

    def to_dict(self):
        doc = {"axis": self.axis}
        doc.update(self.context)
        doc["rows"] = [c.to_dict(self.axis) for c in self.cells]
        doc["optimum"] = self.optimum
        return doc


def _pick_optimum(cells):
    best = None
    for cell in cells:
        if cell.error is not None:
            continue
        key = (-cell.metrics["nmi"], cell.value)
        if best is None or key < best[0]:
            best = (key, cell.value)
    return None if best is None else best[1]


def _require_truth(dataset):
    if not dataset.labeled_indices():
        raise ValueError("sweeps and ablations need ground-truth labels")


def sweep_tau(dataset, sim, topo_kind, taus, target_k, config):
    """Geometric runs over a grid of neighborhood thresholds, calibrated
    to ``target_k`` clusters at every grid point."""
    _require_truth(dataset)
    if dataset.graph is None:
        raise ValueError("sweeping thresholds needs an edges file")
    if config.mode is not Mode.GEOMETRIC:
        raise ValueError("threshold sweeps run in geometric mode")
    cells = []
    for tau in taus:
        mask = neighborhood_mask(dataset.graph, topo_kind, tau)
        cells.append(_run_cell(dataset, sim, mask, config, target_k, float(tau)))
    cells = tuple(cells)
    return SweepReport(
        axis="tau",
        context={"topo": topo_kind.value, "target_k": target_k},
        cells=cells,
        optimum=_pick_optimum(cells),
    )


def sweep_k(dataset, sim, ks, config, topo_kind=None, tau=None):
    """Calibrated runs over a list of cluster counts. Geometric mode
    fixes one neighborhood mask for the whole sweep; standard mode runs
    unconstrained."""
    _require_truth(dataset)
    mask = None
    context = {"mode": config.mode.value}
    if config.mode is Mode.GEOMETRIC:
        if dataset.graph is None or topo_kind is None or tau is None:
            raise ValueError("geometric k sweeps need an edges file, a topology kind and tau")
        mask = neighborhood_mask(dataset.graph, topo_kind, tau)
        context.update({"topo": topo_kind.value, "tau": float(tau)})
    cells = []
    for k in ks:
        cells.append(_run_cell(dataset, sim, mask, config, int(k), float(k)))
    cells = tuple(cells)
    return SweepReport(axis="k", context=context, cells=cells, optimum=_pick_optimum(cells))


def _run_cell(dataset, sim, mask, config, target_k, axis_value):
    try:
        preference, result = calibrate_preference(sim, config, target_k, mask=mask)
    except _CELL_FAILURES as exc:
        return SweepCell(value=axis_value, error=str(exc))
    return SweepCell(
        value=axis_value,
        k=result.k,
        preference=preference,
        metrics=evaluate_labels(dataset, result.labels),
    )


@dataclass(frozen=True)
class AblationReport:
    """Random vertex-relabeling study.

    Every repetition permutes the graph's vertex identities (structure
    intact, ids shuffled), rebuilds the neighborhood mask, recalibrates
    the preference to the target cluster count, runs, and scores against
    the unpermuted ground truth. Failed repetitions are kept in
    ``failures`` and excluded from ``mean`` / ``std`` (population
    standard deviation over completed runs).
    """

    repetitions: int
    seed: int | None
    rows: tuple
    failures: tuple
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)

    @property
    def completed(self):
        return len(self.rows)

    def to_dict(self):
        return {
            "repetitions": self.repetitions,
            "completed": self.completed,
            "seed": self.seed,
            "rows": [dict(r) for r in self.rows],
            "failures": [dict(f) for f in self.failures],
            "mean": dict(self.mean),
            "std": dict(self.std),
        }


def ablation(dataset, sim, topo_kind, tau, target_k, repetitions, seed, config,
             permutations=None):
    """Run the relabeling ablation for ``repetitions`` draws.

    Permutations come from a seeded PCG64 generator (numpy's named,
    version-stable bit generator), one ``Generator.permutation(n)`` draw
    per repetition, so a seed pins the full sequence on any platform.
    ``permutations`` overrides the generator with an explicit iterable of
    permutations (used by tests, e.g. to force the identity).
    """
    _require_truth(dataset)
    if dataset.graph is None:
        raise ValueError("the ablation needs an edges file")
    if config.mode is not Mode.GEOMETRIC:
        raise ValueError("the ablation runs in geometric mode")
    n = dataset.n

    if permutations is None:
        rng = np.random.Generator(np.random.PCG64(seed))
        perm_iter = (rng.permutation(n) for _ in range(repetitions))
    else:
        perm_iter = iter(permutations)

    rows, failures = [], []
    for rep in range(repetitions):
        perm = np.asarray(next(perm_iter))
        permuted = permute_vertices(dataset.graph, perm)
        mask = neighborhood_mask(permuted, topo_kind, tau)
        try:
            preference, result = calibrate_preference(sim, config, target_k, mask=mask)
        except _CELL_FAILURES as exc:
            failures.append({"rep": rep, "error": str(exc)})
            continue
        row = {"rep": rep, "k": result.k, "preference": preference}
        row.update(evaluate_labels(dataset, result.labels))
        rows.append(row)

    mean, std = {}, {}
    if rows:
        for key in ("nmi", "cr", "f1"):
            values = np.array([r[key] for r in rows])
            mean[key] = float(values.mean())
            std[key] = float(values.std())
    return AblationReport(
        repetitions=repetitions,
        seed=seed if permutations is None else None,
        rows=tuple(rows),
        failures=tuple(failures),
        mean=mean,
        std=std,
    )

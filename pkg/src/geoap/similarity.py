"""Feature-space similarities and exemplar preference handling.

Similarity between two points is the negated feature distance, so all
off-diagonal entries are <= 0. The diagonal holds the shared exemplar
preference; it stays unset (NaN) until a preference is assigned, and the
engine refuses to run on a matrix without one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import CalibrationError, DivergenceError, NonConvergenceError


class FeatureMetric(Enum):
    """Distance metric over feature vectors."""

    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    COSINE = "cosine"


@dataclass(frozen=True)
class SimilarityMatrix:
    """Square similarity matrix plus a flag telling whether the diagonal
    (the shared preference) has been assigned."""

    s: np.ndarray
    preference_set: bool = False

    @property
    def n(self):
        return self.s.shape[0]

    @property
    def preference(self):
        if not self.preference_set:
            return None
        return float(self.s[0, 0])


def feature_distance(p, q, kind):
    """Distance between two feature vectors under ``kind``.

    Euclidean and Manhattan are the usual norms of ``p - q``. Cosine is
    ``1 - p.q / (|p| |q|)``, defined as 1 whenever either vector is zero.
    Always nonnegative.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("feature vectors must be 1-D and of equal length")
    if kind is FeatureMetric.EUCLIDEAN:
        return float(np.sqrt(np.sum((p - q) ** 2)))
    if kind is FeatureMetric.MANHATTAN:
        return float(np.sum(np.abs(p - q)))
    if kind is FeatureMetric.COSINE:
        np_, nq = np.linalg.norm(p), np.linalg.norm(q)
        if np_ == 0.0 or nq == 0.0:
            return 1.0
        return max(0.0, 1.0 - float(np.dot(p, q)) / (np_ * nq))
    raise ValueError(f"unknown feature metric: {kind!r}")


_CDIST_NAME = {
    FeatureMetric.EUCLIDEAN: "euclidean",
    FeatureMetric.MANHATTAN: "cityblock",
    FeatureMetric.COSINE: "cosine",
}


def build_similarity(features, kind):
    """Pairwise similarity matrix ``s(i, j) = -distance(x_i, x_j)``.

    The diagonal is left unset (NaN) and flagged accordingly; assign a
    preference with :func:`set_shared_preference` before running the
    engine. Requires at least two points.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D array (points x dimensions)")
    if x.shape[0] < 2:
        raise ValueError("need at least two points to build a similarity matrix")
    dist = cdist(x, x, metric=_CDIST_NAME[kind])
    if kind is FeatureMetric.COSINE:
        # cdist leaves NaN where a zero vector is involved; the metric
        # defines that distance as 1.
        zero = np.linalg.norm(x, axis=1) == 0.0
        if zero.any():
            dist[zero, :] = 1.0
            dist[:, zero] = 1.0
    np.maximum(dist, 0.0, out=dist)  # clip float noise like -1e-16
    s = -dist
    np.fill_diagonal(s, np.nan)
    return SimilarityMatrix(s=s, preference_set=False)


def set_shared_preference(sim, preference):
    """Return a copy of ``sim`` with every diagonal entry set to
    ``preference`` and the preference flag raised."""
    preference = float(preference)
    if not math.isfinite(preference):
        raise ValueError(f"preference must be finite, got {preference}")
    s = sim.s.copy()
    np.fill_diagonal(s, preference)
    return SimilarityMatrix(s=s, preference_set=True)


def median_offdiagonal(sim):
    """Median of the off-diagonal similarities, the default preference."""
    n = sim.n
    off = sim.s[~np.eye(n, dtype=bool)]
    return float(np.median(off))


def _offdiag_bracket(sim):
    """Initial preference bracket: [min - range, max] of the off-diagonal
    similarities. Low preferences drive toward few clusters, high toward
    many."""
    n = sim.n
    off = sim.s[~np.eye(n, dtype=bool)]
    lo, hi = float(off.min()), float(off.max())
    return lo - (hi - lo), hi


def calibrate_preference(sim, config, target_k, mask=None, max_steps=50, scan_probes=24):
    """Find a shared preference whose run yields exactly ``target_k``
    clusters.

    Dichotomic search over the preference bracket, treating the cluster
    count as nondecreasing in the preference. Bisection gives up early
    once the bracket has collapsed below a millionth of its initial
    width (past that point midpoints are operationally identical), and
    runs at most ``max_steps`` probes. The monotonicity is heuristic, so
    when bisection ends without hitting the target a bounded linear scan
    (``scan_probes`` evenly spaced probes over the original bracket)
    takes over. Every probe is a full engine run from a cold start, so
    the returned result is exactly what an independent run at the
    returned preference produces. A probe that stops improving before
    full message stability still counts: its exemplar set is the one a
    plain run would report.

    Returns ``(preference, result)``. Raises :class:`CalibrationError`
    when no probed preference reaches the target or a probe run fails
    outright (empty exemplar set or divergent messages); the error
    carries the closest achieved cluster count along with the preference
    and result that produced it.
    """
    from .engine import run  # local import to avoid a module cycle

    n = sim.n
    if not (1 <= target_k <= n):
        raise ValueError(f"target_k must lie in 1..{n}, got {target_k}")

    lo0, hi0 = _offdiag_bracket(sim)
    probed = {}

    def probe(pref):
        if pref in probed:
            return probed[pref]
        try:
            result = run(set_shared_preference(sim, pref), mask, config)
        except (NonConvergenceError, DivergenceError) as exc:
            raise _calibration_failure(
                f"probe run at preference {pref!r} failed: {exc}",
                probed,
                target_k,
            ) from exc
        probed[pref] = result
        return result

    lo, hi = lo0, hi0
    collapse = 1e-6 * (hi0 - lo0)
    for _ in range(max_steps):
        if hi - lo <= collapse:
            break
        mid = 0.5 * (lo + hi)
        result = probe(mid)
        k = len(result.exemplars)
        if k == target_k:
            return mid, result
        if k < target_k:
            lo = mid
        else:
            hi = mid

    # Non-monotone or unreachable within the bracket: sweep it linearly.
    for pref in np.linspace(lo0, hi0, scan_probes):
        result = probe(float(pref))
        if len(result.exemplars) == target_k:
            return float(pref), result

    raise _calibration_failure(
        f"calibration failed: no preference in [{lo0:.6g}, {hi0:.6g}] "
        f"yields k={target_k}",
        probed,
        target_k,
    )


def _calibration_failure(message, probed, target_k):
    """Build a CalibrationError carrying the closest probe outcome."""
    best = None
    for pref, result in probed.items():
        key = (abs(result.k - target_k), result.k, pref)
        if best is None or key < best[0]:
            best = (key, pref, result)
    if best is None:
        return CalibrationError(f"{message} (no probe completed)")
    _, pref, result = best
    return CalibrationError(
        f"{message} (closest achieved k={result.k} at preference {pref:.6g})",
        closest_k=result.k,
        closest_preference=pref,
        closest_result=result,
    )

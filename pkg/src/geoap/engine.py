"""Exemplar clustering by max-sum message passing, with an optional
topological neighborhood constraint.

Two update modes share the responsibility sweep and differ only in the
availability sweep:

* Standard: the classic two-case availability update.
* Geometric: availabilities toward candidate exemplars outside a vertex's
  topological neighborhood are actively penalized (the positive part of
  the standard argument is negated), steering every point toward an
  exemplar it can reach within the neighborhood mask.

All message arithmetic is float64 and strictly deterministic: ties in
argmax resolve to the lowest index and sweeps are ordered
(responsibilities then availabilities, each damped). Exact ties between
duplicate points make the message fixed point degenerate, so ``run``
adds a microscopic seeded jitter (relative magnitude ~1e-16) to the
similarities before iterating; with the default fixed seed the outcome
is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DivergenceError, NonConvergenceError


class Mode(Enum):
    """Availability update flavor."""

    STANDARD = "standard"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class EngineConfig:
    """Run parameters.

    ``damping`` mixes each new message with its previous value
    (new_message = damping * old + (1 - damping) * new). Convergence is
    declared once the self-exemplar set stays identical for
    ``conv_iter`` consecutive iterations. ``jitter_seed`` seeds the
    microscopic similarity jitter that breaks exact ties between
    duplicate points (points with identical similarity profiles would
    otherwise oscillate forever between symmetric exemplar choices);
    ``None`` disables the jitter.
    """

    damping: float = 0.9
    max_iter: int = 1000
    conv_iter: int = 100
    mode: Mode = Mode.STANDARD
    smoothing: bool = True
    jitter_seed: int | None = 11

    def __post_init__(self):
        if not (0.0 <= self.damping < 1.0):
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (1 <= self.conv_iter <= self.max_iter):
            raise ValueError(
                f"conv_iter must lie in 1..max_iter, got {self.conv_iter} (max_iter={self.max_iter})"
            )
        if self.jitter_seed is not None and self.jitter_seed < 0:
            raise ValueError(f"jitter_seed must be None or >= 0, got {self.jitter_seed}")


@dataclass
class MessageState:
    """Responsibility and availability matrices at some iteration."""

    r: np.ndarray
    a: np.ndarray
    iteration: int = 0

    @property
    def n(self):
        return self.r.shape[0]


@dataclass(frozen=True)
class ClusteringResult:
    """Outcome of a run.

    ``labels`` are the final per-point exemplar assignments (after
    smoothing, when it was applied); ``labels_pre_smoothing`` always
    holds the raw assignment, whose targets are exactly ``exemplars``.
    ``net_similarity`` scores the pre-smoothing configuration, -inf when
    that configuration violates a constraint (possible in Geometric mode
    when some point has no exemplar inside its neighborhood).
    """

    labels: np.ndarray
    labels_pre_smoothing: np.ndarray
    exemplars: tuple
    iterations_run: int
    converged: bool
    net_similarity: float
    smoothed: bool

    @property
    def k(self):
        return len(self.exemplars)


def _new_responsibilities(s_mat, a_mat):
    """Undamped responsibility sweep.

    r(i, k) = s(i, k) - max over j != k of (a(i, j) + s(i, j)).
    Computed per row from the best and second-best of a + s.
    """
    n = s_mat.shape[0]
    m = a_mat + s_mat
    rows = np.arange(n)
    best_idx = np.argmax(m, axis=1)
    best = m[rows, best_idx].copy()
    m[rows, best_idx] = -np.inf
    second = m.max(axis=1)
    r_new = s_mat - best[:, None]
    r_new[rows, best_idx] = s_mat[rows, best_idx] - second
    return r_new


def _new_availabilities(r_mat, member):
    """Undamped availability sweep; ``member=None`` selects Standard mode.

    Shared argument x(i, k) = r(k, k) + sum over i' not in {i, k} of
    max(0, r(i', k)). Off the diagonal, Standard applies min(0, x);
    Geometric keeps min(0, x) inside the neighborhood and applies
    -max(0, x) outside it. The diagonal is the plain positive-evidence
    sum, uncapped.
    """
    rp = np.maximum(r_mat, 0.0)
    np.fill_diagonal(rp, r_mat.diagonal())
    totals = rp.sum(axis=0)
    x = totals[None, :] - rp
    diag = x.diagonal().copy()
    if member is None:
        a_new = np.minimum(x, 0.0)
    else:
        a_new = np.where(member, np.minimum(x, 0.0), -np.maximum(x, 0.0))
    np.fill_diagonal(a_new, diag)
    return a_new


def update_responsibilities(sim, state):
    """Responsibility sweep (undamped); returns a new state."""
    return MessageState(
        r=_new_responsibilities(sim.s, state.a), a=state.a, iteration=state.iteration
    )


def update_availabilities_standard(state):
    """Standard availability sweep (undamped); returns a new state."""
    return MessageState(
        r=state.r, a=_new_availabilities(state.r, None), iteration=state.iteration
    )


def update_availabilities_geometric(state, mask):
    """Neighborhood-penalized availability sweep (undamped)."""
    return MessageState(
        r=state.r, a=_new_availabilities(state.r, mask.member), iteration=state.iteration
    )


def damp(old, new, damping):
    """Blend a message matrix with its previous value."""
    return damping * old + (1.0 - damping) * new


def estimate_exemplars(sim, state):
    """Per-point exemplar estimate: argmax over j of a(i, j) + s(i, j),
    ties to the lowest index."""
    return np.argmax(state.a + sim.s, axis=1)


def _assign_to_exemplars(s_mat, exemplars, member):
    """Final assignment against a fixed exemplar set.

    Each point takes its most similar exemplar, which maximizes the net
    similarity for the given exemplar set (availabilities steer the
    search for exemplars but play no role in the objective itself). In
    Geometric mode (``member`` given) the choice is restricted to
    exemplars inside the point's neighborhood whenever at least one
    exists there. Exemplars always map to themselves.
    """
    cols = s_mat[:, exemplars]
    if member is None:
        idx = np.argmax(cols, axis=1)
    else:
        allowed = member[:, exemplars]
        has_local = allowed.any(axis=1)
        idx_local = np.argmax(np.where(allowed, cols, -np.inf), axis=1)
        idx_global = np.argmax(cols, axis=1)
        idx = np.where(has_local, idx_local, idx_global)
    labels = exemplars[idx]
    labels[exemplars] = exemplars
    return labels


def assign_geometric(sim, state, mask):
    """Two-stage geometric assignment from a message state.

    Derives the exemplar set E = {j : estimate(j) = j}, then assigns each
    point to its most similar in-neighborhood exemplar, falling back to
    the most similar exemplar overall when the neighborhood holds none.
    """
    est = estimate_exemplars(sim, state)
    exemplars = np.flatnonzero(est == np.arange(sim.n))
    if exemplars.size == 0:
        raise NonConvergenceError("empty exemplar set: no point estimates itself")
    return _assign_to_exemplars(sim.s, exemplars, mask.member)


def smooth_labels(labels, graph):
    """One synchronous pass of plurality label smoothing.

    Every vertex takes the most frequent label among its graph neighbors
    and itself. Ties keep the vertex's own incoming label when it is
    among the tied labels, otherwise the lowest label id wins.
    """
    labels = np.asarray(labels)
    out = np.empty_like(labels)
    for i in range(graph.n):
        votes = np.append(labels[graph.neighbors(i)], labels[i])
        counts = np.bincount(votes)
        top = counts.max()
        own = labels[i]
        if counts[own] == top:
            out[i] = own
        else:
            out[i] = np.flatnonzero(counts == top)[0]
    return out


def net_similarity(sim, labels, mode, mask=None):
    """Net similarity of an assignment: sum of s(i, c_i) when the
    configuration is valid, -inf otherwise.

    Valid means every referenced exemplar refers to itself, and in
    Geometric mode every point's exemplar lies inside its neighborhood.
    """
    labels = np.asarray(labels)
    n = sim.n
    if labels.shape != (n,):
        raise ValueError("labels must have one entry per point")
    if labels.min() < 0 or labels.max() >= n:
        raise ValueError("labels must reference points 0..n-1")
    referenced = np.unique(labels)
    if not np.array_equal(labels[referenced], referenced):
        return float("-inf")
    if mode is Mode.GEOMETRIC:
        if mask is None:
            raise ValueError("geometric net similarity needs a neighborhood mask")
        if not mask.member[np.arange(n), labels].all():
            return float("-inf")
    return float(sim.s[np.arange(n), labels].sum())


def run(sim, mask, config, trace=None):
    """Full clustering run: iterate damped sweeps until the exemplar set
    is stable, then assign, optionally smooth, and score.

    Parameters
    ----------
    sim : SimilarityMatrix
        Must have its preference assigned.
    mask : NeighborhoodMask or None
        Required in Geometric mode, forbidden in Standard mode.
    config : EngineConfig
    trace : callable, optional
        Called after every iteration as
        ``trace(iteration, n_exemplars, max_delta)`` where ``max_delta``
        is the max-norm change of the damped messages.

    Raises
    ------
    DivergenceError
        If any message turns non-finite.
    NonConvergenceError
        If the run terminates with an empty exemplar set.
    """
    if not sim.preference_set:
        raise ValueError("similarity matrix has no preference assigned")
    s_mat = sim.s
    n = sim.n
    if not np.isfinite(s_mat).all():
        raise ValueError("similarity matrix contains non-finite entries")
    if config.jitter_seed is not None:
        rng = np.random.default_rng(config.jitter_seed)
        scale = np.finfo(float).eps * np.abs(s_mat) + np.finfo(float).tiny * 100.0
        s_mat = s_mat + rng.standard_normal(s_mat.shape) * scale
    if config.mode is Mode.GEOMETRIC:
        if mask is None:
            raise ValueError("geometric mode requires a neighborhood mask")
        if mask.n != n:
            raise ValueError(f"mask size {mask.n} does not match {n} points")
        member = mask.member
    else:
        if mask is not None:
            raise ValueError("standard mode does not take a neighborhood mask")
        member = None

    if n == 1:
        labels = np.zeros(1, dtype=np.intp)
        return ClusteringResult(
            labels=labels,
            labels_pre_smoothing=labels.copy(),
            exemplars=(0,),
            iterations_run=0,
            converged=True,
            net_similarity=float(sim.s[0, 0]),
            smoothed=False,
        )

    lam = config.damping
    r_mat = np.zeros((n, n))
    a_mat = np.zeros((n, n))
    idx = np.arange(n)
    prev_self = None
    streak = 0
    converged = False
    iteration = 0

    # The loop below is an in-place restatement of
    # _new_responsibilities / _new_availabilities / damp with reused
    # buffers; element-wise arithmetic is identical, so trajectories
    # match the public sweep functions bit for bit.
    m_buf = np.empty((n, n))
    new_buf = np.empty((n, n))
    neg_buf = np.empty((n, n)) if member is not None else None
    one_minus = 1.0 - lam
    np.add(a_mat, s_mat, out=m_buf)

    for iteration in range(1, config.max_iter + 1):
        if trace is not None:
            r_before, a_before = r_mat.copy(), a_mat.copy()

        # Responsibility sweep: r_new = s - best-other of (a + s).
        # m_buf already holds a + s (refreshed at the end of the
        # previous iteration for the convergence check).
        best_idx = np.argmax(m_buf, axis=1)
        best = m_buf[idx, best_idx]
        m_buf[idx, best_idx] = -np.inf
        second = m_buf.max(axis=1)
        np.subtract(s_mat, best[:, None], out=new_buf)
        new_buf[idx, best_idx] = s_mat[idx, best_idx] - second
        r_mat *= lam
        new_buf *= one_minus
        r_mat += new_buf

        # Availability sweep over the clipped responsibilities.
        np.maximum(r_mat, 0.0, out=m_buf)
        np.fill_diagonal(m_buf, r_mat.diagonal())
        totals = m_buf.sum(axis=0)
        np.subtract(totals[None, :], m_buf, out=m_buf)
        diag = m_buf.diagonal().copy()
        if member is None:
            np.minimum(m_buf, 0.0, out=new_buf)
        else:
            np.maximum(m_buf, 0.0, out=neg_buf)
            np.negative(neg_buf, out=neg_buf)
            np.minimum(m_buf, 0.0, out=new_buf)
            np.copyto(new_buf, neg_buf, where=~member)
        new_buf[idx, idx] = diag
        a_mat *= lam
        new_buf *= one_minus
        a_mat += new_buf

        if not (np.isfinite(r_mat.sum()) and np.isfinite(a_mat.sum())):
            raise DivergenceError(
                f"messages diverged (non-finite values) at iteration {iteration}"
            )
        np.add(a_mat, s_mat, out=m_buf)
        self_vec = np.argmax(m_buf, axis=1) == idx
        if prev_self is not None and np.array_equal(self_vec, prev_self):
            streak += 1
        else:
            streak = 1
        prev_self = self_vec
        if trace is not None:
            delta = max(
                float(np.abs(r_mat - r_before).max()),
                float(np.abs(a_mat - a_before).max()),
            )
            trace(iteration, int(np.count_nonzero(self_vec)), delta)
        if streak >= config.conv_iter and self_vec.any():
            converged = True
            break

    exemplars = np.flatnonzero(prev_self)
    if exemplars.size == 0:
        raise NonConvergenceError(
            f"run ended after {iteration} iterations with an empty exemplar set"
        )

    labels_pre = _assign_to_exemplars(s_mat, exemplars, member)
    value = net_similarity(
        sim, labels_pre, config.mode, mask if config.mode is Mode.GEOMETRIC else None
    )

    smoothed = False
    labels = labels_pre
    if config.mode is Mode.GEOMETRIC and config.smoothing:
        if mask.graph is None:
            raise ValueError("smoothing requires a mask built from a graph")
        labels = smooth_labels(labels_pre, mask.graph)
        smoothed = True

    return ClusteringResult(
        labels=labels,
        labels_pre_smoothing=labels_pre,
        exemplars=tuple(int(e) for e in exemplars),
        iterations_run=iteration,
        converged=converged,
        net_similarity=value,
        smoothed=smoothed,
    )

"""Exhaustive reference optimizer for small instances.

Enumerates every nonempty exemplar subset, assigns each remaining point
to its best feasible exemplar by raw similarity of the objective, and
keeps the configuration with the largest net similarity. Independent of
the message-passing engine: used by tests as the ground-truth bound.
"""

from __future__ import annotations

import numpy as np

from .engine import Mode

#: Hard cap: 2^n subsets get enumerated.
MAX_POINTS = 15


def brute_force_optimum(sim, mask, mode):
    """Globally optimal valid assignment for at most ``MAX_POINTS`` points.

    Valid configurations are exactly those whose self-referring exemplar
    set covers every point; in Geometric mode each point additionally
    needs an exemplar inside its neighborhood. Exemplar subsets are
    enumerated in increasing bitmask order and the first maximizer wins,
    so the outcome is deterministic.

    Returns ``(labels, value)``; ``(None, -inf)`` when no valid
    configuration exists (only possible with a degenerate mask).
    """
    if not sim.preference_set:
        raise ValueError("similarity matrix has no preference assigned")
    n = sim.n
    if n > MAX_POINTS:
        raise ValueError(f"brute force capped at {MAX_POINTS} points, got {n}")
    if mode is Mode.GEOMETRIC:
        if mask is None:
            raise ValueError("geometric mode requires a neighborhood mask")
        member = mask.member
    else:
        member = None

    s_mat = sim.s
    idx = np.arange(n)
    best_value = float("-inf")
    best_labels = None

    for bits in range(1, 1 << n):
        exemplars = np.flatnonzero([(bits >> v) & 1 for v in range(n)])
        cols = s_mat[:, exemplars]
        if member is not None:
            allowed = member[:, exemplars]
            outside = np.setdiff1d(idx, exemplars, assume_unique=True)
            if not allowed[outside].any(axis=1).all():
                # some non-exemplar point sees no exemplar in its neighborhood
                continue
            cols = np.where(allowed, cols, -np.inf)
        choice = np.argmax(cols, axis=1)
        labels = exemplars[choice]
        labels[exemplars] = exemplars
        value = float(s_mat[idx, labels].sum())
        if value > best_value:
            best_value = value
            best_labels = labels
    return best_labels, best_value

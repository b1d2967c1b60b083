"""Small-cluster management: dismantle sub-size clusters and reassign or noise them.

Reassignment scores each orphaned point against the significant clusters
present among its nearest neighbors using angular isotropy (how evenly a
cluster's neighbors surround the point) divided by the distance to that
cluster's closest member — a one-sided pile of neighbors far away loses to
a surrounding cluster even when it holds the plain k-NN majority.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heuristics import HeuristicSet

NOISE = -1

_MIN_DIST = 1e-12


@dataclass(frozen=True)
class IsotropyScore:
    cluster_id: int
    count: int
    resultant_norm: float
    isotropy: float
    min_dist: float
    score: float


def isotropy_scores(
    x: np.ndarray,
    neighbor_points: np.ndarray,
    neighbor_labels: np.ndarray,
    neighbor_dists: np.ndarray | None = None,
) -> dict[int, IsotropyScore]:
    """Score every cluster label present among the neighbors of ``x``.

    Zero-distance neighbors have no direction: they are skipped in the
    resultant sum but still counted, and the minimum distance is floored.
    """
    x = np.asarray(x, dtype=np.float64)
    neighbor_points = np.asarray(neighbor_points, dtype=np.float64)
    neighbor_labels = np.asarray(neighbor_labels, dtype=np.int64)
    if neighbor_dists is None:
        neighbor_dists = np.linalg.norm(neighbor_points - x, axis=1)
    out: dict[int, IsotropyScore] = {}
    for label in np.unique(neighbor_labels):
        sel = neighbor_labels == label
        pts = neighbor_points[sel]
        dists = neighbor_dists[sel]
        count = int(sel.sum())
        directed = dists > 0
        if directed.any():
            units = (pts[directed] - x) / dists[directed][:, None]
            resultant = float(np.linalg.norm(units.sum(axis=0)))
        else:
            resultant = 0.0
        isotropy = count - resultant
        min_dist = max(float(dists.min()), _MIN_DIST)
        out[int(label)] = IsotropyScore(
            cluster_id=int(label),
            count=count,
            resultant_norm=resultant,
            isotropy=isotropy,
            min_dist=min_dist,
            score=isotropy / min_dist,
        )
    return out


def reassign_small(
    labels: np.ndarray,
    values: np.ndarray,
    index,
    min_size: int,
    policy: str,
    k: int,
    hset: HeuristicSet,
    scale: float,
) -> np.ndarray:
    """Apply the small-cluster policy in a single pass.

    Cluster sizes are measured once, before any point moves: dismantled
    points can only join clusters that were already at or above the size
    threshold, never each other. With ``policy="noise"`` they are all sent
    to the collective noise label instead.
    """
    labels = np.asarray(labels, dtype=np.int64)
    out = labels.copy()
    if labels.max() < 0:
        return out
    sizes = np.bincount(labels[labels >= 0])
    small_ids = np.flatnonzero(sizes < min_size)
    if small_ids.size == 0:
        return out
    small_mask = np.isin(labels, small_ids)
    if policy == "noise":
        out[small_mask] = NOISE
        return out

    # trailing False slot so a stray NOISE label (-1) can never look "large"
    large = np.zeros(sizes.shape[0] + 1, dtype=bool)
    large[: sizes.shape[0]] = sizes >= min_size
    cap = hset.h4(scale, values.shape[1])
    ids_all, dists_all = index.query_all(min(k, labels.shape[0] - 1))
    for point in np.flatnonzero(small_mask):
        nbr = ids_all[point]
        nd = dists_all[point]
        eligible = large[labels[nbr]] & (nd <= cap)
        if not eligible.any():
            out[point] = NOISE
            continue
        scores = isotropy_scores(
            values[point], values[nbr[eligible]], labels[nbr[eligible]], nd[eligible]
        )
        best = max(scores.values(), key=lambda sc: (sc.score, -sc.cluster_id))
        out[point] = best.cluster_id
    return out

"""Density-ordered BFS cluster growth with evolving neighborhood statistics.

Clusters are grown one at a time from high-density roots. Each popped point
queries its nearest neighbors; unvisited candidates pass a distance filter
(standardized deviation against the cluster's running mean and mean absolute
deviation of observed neighbor distances) and, at level 2, a per-dimension
shape filter against the root's compression descriptor. Surviving candidates
join the frontier and their distances feed the running statistics. Sub-size
clusters are dismantled afterwards (see ``refine``).
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .heuristics import HEURISTIC_MODES, HeuristicSet
from .knn import INDEX_KINDS, NeighborIndex, build_index
from . import refine as refine_mod

NOISE = -1
_UNVISITED = -3
_FRONTIER = -2

DELTA_FLOOR = 1e-12


class ConfigError(ValueError):
    """Invalid parameter; ``field`` names the offender."""

    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field = field_name


class DegenerateDataset(ValueError):
    """All columns constant: there is no scale to cluster against."""


@dataclass(frozen=True)
class ClusterConfig:
    """The six clustering parameters plus ablation switches and the RNG seed."""

    level: int = 1
    expansion: float = 0.5
    blur: float = 0.5
    max_neighbors: int = 15
    min_cluster_size: int = 5
    policy: str = "reassign"
    tau: float = 0.3
    heuristics: str = "default"
    seeding: str = "ordered"
    index: str = "exact"
    seed: int = 0

    def validate(self) -> None:
        if self.level not in (1, 2):
            raise ConfigError("level", f"level must be 1 or 2, got {self.level}")
        if not 0.0 <= self.expansion <= 1.0:
            raise ConfigError("expansion", f"expansion must be in [0, 1], got {self.expansion}")
        if not 0.0 <= self.blur <= 1.0:
            raise ConfigError("blur", f"blur must be in [0, 1], got {self.blur}")
        if int(self.max_neighbors) < 1:
            raise ConfigError("max_neighbors", "max_neighbors must be a positive integer")
        if int(self.min_cluster_size) < 1:
            raise ConfigError("min_cluster_size", "min_cluster_size must be a positive integer")
        if self.policy not in ("reassign", "noise"):
            raise ConfigError("policy", f"policy must be 'reassign' or 'noise', got {self.policy!r}")
        if self.tau < 0.0:
            raise ConfigError("tau", f"tau must be nonnegative, got {self.tau}")
        if self.heuristics not in HEURISTIC_MODES:
            raise ConfigError("heuristics", f"heuristics must be one of {HEURISTIC_MODES}")
        if self.seeding not in ("ordered", "random"):
            raise ConfigError("seeding", f"seeding must be 'ordered' or 'random', got {self.seeding!r}")
        if self.index not in INDEX_KINDS:
            raise ConfigError("index", f"index must be one of {INDEX_KINDS}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ClusterStats:
    """Running mean and mean absolute deviation of observed neighbor distances."""

    mu: float = 0.0
    delta: float = 1.0
    count: int = 0


def update_stats(
    stats: ClusterStats,
    batch: np.ndarray,
    n_popped: int,
    queue_len: int,
) -> ClusterStats:
    """Absorb one batch of accepted neighbor distances.

    The deviation is updated first, around the stale mean, then the mean;
    the weight ``n_popped - 1 + queue_len`` equals the number of distances
    absorbed so far, so the initialization values are wiped by the first
    nonempty batch.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.size == 0:
        return stats
    weight = n_popped - 1 + queue_len
    total = weight + batch.size
    delta = (stats.delta * weight + np.abs(batch - stats.mu).sum()) / total
    mu = (stats.mu * weight + batch.sum()) / total
    return ClusterStats(mu=mu, delta=delta, count=stats.count + batch.size)


@dataclass(frozen=True)
class ShapeDescriptor:
    """Per-dimension mean absolute pairwise difference over a root and its neighbors."""

    psi: np.ndarray
    w: Optional[np.ndarray]
    degenerate: bool


def shape_from_points(points: np.ndarray) -> ShapeDescriptor:
    """Descriptor over an explicit (k+1, d) point set."""
    points = np.asarray(points, dtype=np.float64)
    m = points.shape[0]
    pairs = m * (m - 1) // 2
    if pairs == 0:
        return ShapeDescriptor(np.zeros(points.shape[1]), None, True)
    psi = np.abs(points[:, None, :] - points[None, :, :]).sum(axis=(0, 1)) / (2 * pairs)
    total = psi.sum()
    if total <= 0.0:
        return ShapeDescriptor(psi, None, True)
    return ShapeDescriptor(psi, psi / total, False)


def shape_descriptor(data, seed_id: int, k: int, index: Optional[NeighborIndex] = None) -> ShapeDescriptor:
    """Descriptor around ``seed_id`` and its k nearest neighbors."""
    values = data.values if hasattr(data, "values") else np.asarray(data, dtype=np.float64)
    if index is None:
        index = build_index(values, "exact")
    batch = index.query(seed_id, k)
    members = np.concatenate([[seed_id], batch.ids])
    return shape_from_points(values[members])


def dataset_scale(values: np.ndarray) -> float:
    """Sum of squared per-column ranges; the squared bounding-box diagonal."""
    values = np.asarray(values, dtype=np.float64)
    ranges = values.max(axis=0) - values.min(axis=0)
    return float((ranges * ranges).sum())


def density_heuristic(index: NeighborIndex, i: int, blur: float, s: float, k: int) -> float:
    """k over the blur-clipped distance to the k-th neighbor."""
    d_k = float(index.query(i, k).distances[-1])
    return _density_from_dk(np.array([d_k]), blur, s, k)[0]


def _density_from_dk(d_k: np.ndarray, blur: float, s: float, k: int) -> np.ndarray:
    floor = blur * np.sqrt(s)
    denom = np.maximum(d_k, floor)
    out = np.full(d_k.shape, np.finfo(np.float64).max)
    np.divide(k, denom, out=out, where=denom > 0)
    return out


def l1_accept(
    delta: float,
    stats: ClusterStats,
    expansion: float,
    blur: float,
    density: float,
    hset: HeuristicSet,
) -> bool:
    """Distance filter: standardized deviation against the expansion tolerance."""
    z = (delta - stats.mu) / max(stats.delta, DELTA_FLOOR)
    return bool(hset.h1(z, blur) <= hset.h2(expansion, density))


def l2_accept(
    values: np.ndarray,
    candidate: int,
    reference: int,
    shape: ShapeDescriptor,
    tau: float,
    hset: HeuristicSet,
) -> bool:
    """Shape filter: relative per-dimension difference pattern against the root's."""
    if shape.degenerate:
        return True
    diffs = np.abs(values[candidate] - values[reference])
    total = diffs.sum()
    if total <= 0.0:
        return True
    gap = np.max(hset.h3(np.abs(diffs / total - shape.w)))
    return bool(gap <= tau)


@dataclass(frozen=True)
class LabelArray:
    labels: np.ndarray
    n_clusters: int


@dataclass
class RunReport:
    runtime_s: float
    n_clusters: int
    cluster_sizes: list[int]
    n_noise: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "runtime_s": self.runtime_s,
            "n_clusters": self.n_clusters,
            "cluster_sizes": self.cluster_sizes,
            "n_noise": self.n_noise,
            "config": self.config,
        }


def _relabel_contiguous(labels: np.ndarray) -> tuple[np.ndarray, int]:
    ids = np.unique(labels[labels >= 0])
    mapping = {int(old): new for new, old in enumerate(ids)}
    out = np.full(labels.shape, NOISE, dtype=np.int64)
    for old, new in mapping.items():
        out[labels == old] = new
    return out, len(ids)


def cluster(
    ds: Dataset,
    cfg: ClusterConfig = ClusterConfig(),
    index: Optional[NeighborIndex] = None,
) -> tuple[LabelArray, RunReport]:
    """Run the full pipeline: densities, ordered growth, refinement, relabeling.

    Passing a prebuilt ``index`` skips the build (tuning reuses one per
    dataset); the reported runtime covers everything executed here.
    """
    cfg.validate()
    x = ds.values
    n = x.shape[0]
    if n < 2:
        raise ConfigError("dataset", "need at least 2 points")

    start = time.perf_counter()
    s = dataset_scale(x)
    if s == 0.0:
        raise DegenerateDataset("degenerate dataset: every column is constant")
    if index is None:
        index = build_index(x, cfg.index, seed=cfg.seed)

    m = min(int(cfg.max_neighbors), n - 1)
    nbr_ids, nbr_dists = index.query_all(m)
    densities = _density_from_dk(nbr_dists[:, m - 1].copy(), cfg.blur, s, m)

    if cfg.seeding == "random":
        order = np.random.default_rng(cfg.seed).permutation(n)
    else:
        order = np.lexsort((np.arange(n), -densities))

    hset = HeuristicSet.from_mode(cfg.heuristics)
    state = np.full(n, _UNVISITED, dtype=np.int64)
    use_l2 = cfg.level == 2
    tau = cfg.tau
    next_cluster = 0

    for root in order:
        root = int(root)
        if state[root] != _UNVISITED:
            continue
        queue: deque[int] = deque([root])
        state[root] = _FRONTIER
        mu, delta_c = 0.0, 1.0
        n_popped = 0
        w = None
        if use_l2:
            shape = shape_from_points(x[np.concatenate([[root], nbr_ids[root]])])
            w = None if shape.degenerate else shape.w
        while queue:
            i = queue.popleft()
            state[i] = next_cluster
            n_popped += 1
            cand = nbr_ids[i]
            mask = state[cand] == _UNVISITED
            cand = cand[mask]
            cdist = nbr_dists[i][mask]
            if cand.size:
                z = (cdist - mu) / max(delta_c, DELTA_FLOOR)
                keep = hset.h1(z, cfg.blur) <= hset.h2(cfg.expansion, densities[i])
                cand, cdist = cand[keep], cdist[keep]
            if use_l2 and w is not None and cand.size:
                diffs = np.abs(x[cand] - x[i])
                totals = diffs.sum(axis=1)
                zero = totals <= 0.0
                pattern = diffs / np.where(zero, 1.0, totals)[:, None]
                gaps = np.max(hset.h3(np.abs(pattern - w)), axis=1)
                keep = zero | (gaps <= tau)
                cand, cdist = cand[keep], cdist[keep]
            if cand.size:
                weight = n_popped - 1 + len(queue)
                total = weight + cand.size
                delta_c = (delta_c * weight + np.abs(cdist - mu).sum()) / total
                mu = (mu * weight + cdist.sum()) / total
                state[cand] = _FRONTIER
                queue.extend(cand.tolist())
        next_cluster += 1

    refined = refine_mod.reassign_small(
        state,
        x,
        index,
        min_size=int(cfg.min_cluster_size),
        policy=cfg.policy,
        k=m,
        hset=hset,
        scale=s,
    )
    labels, n_clusters = _relabel_contiguous(refined)
    runtime = time.perf_counter() - start

    sizes = np.bincount(labels[labels >= 0], minlength=n_clusters) if n_clusters else np.array([], dtype=np.int64)
    report = RunReport(
        runtime_s=runtime,
        n_clusters=n_clusters,
        cluster_sizes=sizes.astype(int).tolist(),
        n_noise=int((labels == NOISE).sum()),
        config=cfg.to_dict(),
    )
    return LabelArray(labels=labels, n_clusters=n_clusters), report

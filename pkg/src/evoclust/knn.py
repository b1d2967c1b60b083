"""k-nearest-neighbor retrieval over a frozen dataset.

Two implementations share one query contract: an exact brute-force scan
(the oracle) and a seeded approximate neighborhood graph for scale. Both
return true Euclidean distances sorted ascending and exclude the query
point from its own list; the exact kind additionally guarantees ties are
broken by ascending point id.

The accelerated index builds a k-NN graph by neighbor-descent: every point
starts with seeded random neighbors, then a few rounds of "compare against
neighbors, reverse neighbors, and neighbors-of-neighbors" converge the
lists. Build and queries cost O(N) per round with a fixed degree, keeping
the whole pipeline linear in N, and every step is a pure function of the
seed. Queries answer from the converged graph with one more expansion
round, so they tolerate datasets whose true k-NN graph is disconnected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np


class IndexError_(ValueError):
    """Raised for invalid build or query arguments."""


@dataclass(frozen=True)
class NeighborBatch:
    ids: np.ndarray
    distances: np.ndarray


def _as_matrix(data) -> np.ndarray:
    values = data.values if hasattr(data, "values") else data
    return np.ascontiguousarray(values, dtype=np.float64)


class ExactIndex:
    """Brute-force Euclidean k-NN; the ground truth the accelerated index is tested against."""

    kind = "exact"
    algorithm = "brute_force"

    def __init__(self, data):
        x = _as_matrix(data)
        if x.shape[0] < 2:
            raise IndexError_("index needs at least 2 points")
        self._x = x
        self._sq = (x * x).sum(axis=1)
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def n(self) -> int:
        return self._x.shape[0]

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.n - 1:
            raise IndexError_(f"k must be in [1, {self.n - 1}], got {k}")

    def _row_exact(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        diff = self._x - self._x[i]
        dist = np.sqrt((diff * diff).sum(axis=1))
        order = np.lexsort((np.arange(self.n), dist))
        order = order[order != i]
        return order, dist[order]

    def query(self, point_id: int, k: int) -> NeighborBatch:
        self._check_k(k)
        if not 0 <= point_id < self.n:
            raise IndexError_(f"point_id {point_id} out of range")
        if k in self._cache:
            ids, dists = self._cache[k]
            return NeighborBatch(ids[point_id].copy(), dists[point_id].copy())
        order, dist = self._row_exact(point_id)
        return NeighborBatch(order[:k].copy(), dist[:k].copy())

    def query_all(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor lists for every point at once; cached per k."""
        self._check_k(k)
        if k in self._cache:
            return self._cache[k]
        n, x, sq = self.n, self._x, self._sq
        ids = np.empty((n, k), dtype=np.int64)
        dists = np.empty((n, k))
        buf = min(n, k + 1 + 16)
        chunk = max(1, min(512, int(4e7 // max(n, 1))))
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            # squared distances via the dot trick; exact recompute below
            d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
            part = np.argpartition(d2, buf - 1, axis=1)[:, :buf]
            for r in range(stop - start):
                i = start + r
                cand = part[r]
                diff = x[cand] - x[i]
                cd = np.sqrt((diff * diff).sum(axis=1))
                order = np.lexsort((cand, cd))
                cand, cd = cand[order], cd[order]
                keep = cand != i
                sel_ids, sel_d = cand[keep][:k], cd[keep][:k]
                # ties possibly spilling past the partition buffer: redo exactly
                if buf < n and sel_d[-1] >= cd[-1] - 1e-12:
                    order_i, dist_i = self._row_exact(i)
                    sel_ids, sel_d = order_i[:k], dist_i[:k]
                ids[i], dists[i] = sel_ids, sel_d
        ids.setflags(write=False)
        dists.setflags(write=False)
        self._cache[k] = (ids, dists)
        return ids, dists


class GraphIndex:
    """Seeded approximate neighborhood graph built by neighbor-descent."""

    kind = "accelerated"
    algorithm = "knn_graph"

    # small datasets get extra refinement rounds and degree: the cost is
    # negligible at desk scale and buys near-exact recall there
    SMALL_N = 1024

    def __init__(
        self,
        data,
        seed: int = 0,
        graph_degree: Optional[int] = None,
        iterations: Optional[int] = None,
        random_probes: int = 4,
    ):
        x = _as_matrix(data)
        if x.shape[0] < 2:
            raise IndexError_("index needs at least 2 points")
        self._x = x
        self.seed = seed
        small = x.shape[0] <= self.SMALL_N
        self.graph_degree = graph_degree if graph_degree is not None else (24 if small else 16)
        self.iterations = iterations if iterations is not None else (6 if small else 4)
        self.random_probes = random_probes
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._build()

    @property
    def n(self) -> int:
        return self._x.shape[0]

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.n - 1:
            raise IndexError_(f"k must be in [1, {self.n - 1}], got {k}")

    def _distances_to_pool(self, pool: np.ndarray) -> np.ndarray:
        """Squared distances from each row i to its candidate pool, chunked."""
        n, x = self.n, self._x
        out = np.empty(pool.shape)
        # cap the (chunk, pool, dim) temporary at a few MB to stay cache-friendly
        chunk = max(1, int(2e6 // max(pool.shape[1] * x.shape[1], 1)))
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            diff = x[pool[start:stop]] - x[start:stop, None, :]
            out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
        return out

    def _select_best(
        self, pool: np.ndarray, d2: np.ndarray, k: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Per row: drop self and duplicate ids, keep the k nearest, sort by (d, id)."""
        n = self.n
        d2 = d2.copy()
        d2[pool == np.arange(n)[:, None]] = np.inf
        order = np.argsort(pool, axis=1, kind="stable")
        sorted_ids = np.take_along_axis(pool, order, axis=1)
        dup_sorted = np.zeros(pool.shape, dtype=bool)
        dup_sorted[:, 1:] = sorted_ids[:, 1:] == sorted_ids[:, :-1]
        dup = np.zeros_like(dup_sorted)
        np.put_along_axis(dup, order, dup_sorted, axis=1)
        d2[dup] = np.inf
        part = np.argpartition(d2, kth=min(k - 1, pool.shape[1] - 1), axis=1)[:, :k]
        sel_ids = np.take_along_axis(pool, part, axis=1)
        sel_d2 = np.take_along_axis(d2, part, axis=1)
        for i in range(n):  # small fixed-width rows: cheap final ordering
            row = np.lexsort((sel_ids[i], sel_d2[i]))
            sel_ids[i] = sel_ids[i][row]
            sel_d2[i] = sel_d2[i][row]
        return sel_ids, sel_d2

    def _reverse_edges(self, ids: np.ndarray, cap: int) -> np.ndarray:
        """Up to ``cap`` reverse neighbors per node; self-padded where fewer exist."""
        n, k = ids.shape
        flat_dst = ids.ravel()
        flat_src = np.repeat(np.arange(n), k)
        order = np.argsort(flat_dst, kind="stable")
        src_sorted = flat_src[order]
        counts = np.bincount(flat_dst, minlength=n)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        rev = np.tile(np.arange(n)[:, None], (1, cap))
        for r in range(cap):
            has = counts > r
            rev[has, r] = src_sorted[starts[has] + r]
        return rev

    def _candidate_pool(self, ids: np.ndarray, rng: Optional[np.random.Generator]) -> np.ndarray:
        n, k = ids.shape
        parts = [ids, self._reverse_edges(ids, k), ids[ids].reshape(n, k * k)]
        if rng is not None and self.random_probes > 0:
            parts.append(rng.integers(0, n, size=(n, self.random_probes)))
        return np.concatenate(parts, axis=1)

    def _build(self) -> None:
        n = self.n
        k = min(self.graph_degree, n - 1)
        rng = np.random.default_rng(self.seed)
        init = rng.integers(0, n - 1, size=(n, k))
        init += init >= np.arange(n)[:, None]  # skip self
        d2 = self._distances_to_pool(init)
        ids, d2 = self._select_best(init, d2, k)
        for _ in range(self.iterations):
            pool = self._candidate_pool(ids, rng)
            pool_d2 = self._distances_to_pool(pool)
            ids, d2 = self._select_best(pool, pool_d2, k)
        self._ids = ids
        self._d2 = d2

    def query_all(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor lists for every point from one expansion of the converged graph."""
        self._check_k(k)
        if k in self._cache:
            return self._cache[k]
        pool = self._candidate_pool(self._ids, None)
        pool_d2 = self._distances_to_pool(pool)
        ids, sel_d2 = self._select_best(pool, pool_d2, k)
        # a component smaller than k+1 can under-fill its rows: finish those
        # few exactly rather than return unreachable placeholders
        short = np.flatnonzero(~np.isfinite(sel_d2).all(axis=1))
        if short.size:
            exact = ExactIndex(self._x)
            for i in short:
                batch = exact.query(int(i), k)
                ids[i] = batch.ids
        # exact distances for the selected ids only
        diff = self._x[ids] - self._x[:, None, :]
        dists = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        ids.setflags(write=False)
        dists.setflags(write=False)
        self._cache[k] = (ids, dists)
        return ids, dists

    def query(self, point_id: int, k: int) -> NeighborBatch:
        self._check_k(k)
        if not 0 <= point_id < self.n:
            raise IndexError_(f"point_id {point_id} out of range")
        ids, dists = self.query_all(k)
        return NeighborBatch(ids[point_id].copy(), dists[point_id].copy())


NeighborIndex = Union[ExactIndex, GraphIndex]

INDEX_KINDS = ("exact", "accelerated")


def build_index(data, kind: str = "exact", seed: int = 0, **options) -> NeighborIndex:
    """Build a neighbor index over a frozen dataset; accelerated builds are seeded."""
    if kind == "exact":
        return ExactIndex(data)
    if kind == "accelerated":
        return GraphIndex(data, seed=seed, **options)
    raise IndexError_(f"unknown index kind {kind!r}")


def recall_at_k(approx: NeighborIndex, exact: ExactIndex, k: int) -> float:
    """Mean fraction of true k-NN ids recovered by the approximate index."""
    ids_a, _ = approx.query_all(k)
    ids_e, _ = exact.query_all(k)
    hits = 0
    for row_a, row_e in zip(ids_a, ids_e):
        hits += len(set(row_a.tolist()) & set(row_e.tolist()))
    return hits / (ids_e.shape[0] * k)

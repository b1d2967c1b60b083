"""External clustering agreement metrics (ARI, NMI) and a wall-clock timer.

The noise label is scored as an ordinary cluster id. NMI normalizes mutual
information by the arithmetic mean of the two label entropies, with the
0/0 case defined as 0.
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """R x C joint count matrix between two labelings."""
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"label arrays differ in length: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    return a, b


def ari(a, b) -> float:
    """Adjusted Rand index via pair counting with expected-index correction."""
    a, b = _check_pair(a, b)
    table = _contingency(a, b)
    n = table.sum()
    sum_cells = float((table * (table - 1) // 2).sum())
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    sum_rows = float((row * (row - 1) // 2).sum())
    sum_cols = float((col * (col - 1) // 2).sum())
    total_pairs = n * (n - 1) / 2.0
    expected = sum_rows * sum_cols / total_pairs
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        # both partitions degenerate in the same way: identical by convention
        return 1.0
    return (sum_cells - expected) / (max_index - expected)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Normalized mutual information with arithmetic-mean normalization."""
    a, b = _check_pair(a, b)
    table = _contingency(a, b)
    n = table.sum()
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    h_a = _entropy(row)
    h_b = _entropy(col)
    nz = table > 0
    p_joint = table[nz] / n
    outer = np.outer(row, col)[nz] / (n * n)
    mutual = float((p_joint * np.log(p_joint / outer)).sum())
    norm = 0.5 * (h_a + h_b)
    if norm == 0.0:
        return 0.0
    return max(0.0, min(1.0, mutual / norm))


@contextmanager
def stopwatch():
    """Measure wall-clock seconds; read ``.seconds`` after the block."""

    class _Tick:
        seconds = 0.0

    tick = _Tick()
    start = time.perf_counter()
    try:
        yield tick
    finally:
        tick.seconds = time.perf_counter() - start

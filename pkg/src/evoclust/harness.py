"""Budgeted tuning, anytime curves, stability reruns, ablations, significance tests.

The search protocol: trial 1 always evaluates the default configuration,
the remaining budget explores the parameter space uniformly at random, and
the best-so-far configuration is returned when either the trial or the
wall-clock budget binds first. Trial logs persist as JSON lines with a
versioned schema.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .data import Dataset, ScalerKind, scale
from .engine import ClusterConfig, cluster
from .knn import build_index
from .metrics import ari, nmi

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SearchBudget:
    max_trials: int = 51
    max_seconds: float = 120.0
    reruns: int = 10

    def __post_init__(self) -> None:
        if self.max_trials < 1 or self.max_seconds <= 0 or self.reruns < 1:
            raise ValueError("budget fields must be positive")


@dataclass(frozen=True)
class ParamSpace:
    """Uniform sampling ranges; ``pinned`` fixes fields for ablation arms."""

    levels: tuple[int, ...] = (1, 2)
    expansion: tuple[float, float] = (0.0, 1.0)
    blur: tuple[float, float] = (0.0, 1.0)
    max_neighbors: tuple[int, int] = (3, 60)
    min_cluster_frac: float = 0.1  # min_cluster_size sampled in [1, N * frac]
    policies: tuple[str, ...] = ("reassign", "noise")
    tau: tuple[float, float] = (0.05, 1.0)
    pinned: dict = field(default_factory=dict)

    def sample(self, rng: np.random.Generator, n: int, base: ClusterConfig) -> ClusterConfig:
        m_hi = min(self.max_neighbors[1], n - 1)
        m_lo = min(self.max_neighbors[0], m_hi)
        cfg = replace(
            base,
            level=int(rng.choice(self.levels)),
            expansion=float(rng.uniform(*self.expansion)),
            blur=float(rng.uniform(*self.blur)),
            max_neighbors=int(rng.integers(m_lo, m_hi + 1)),
            min_cluster_size=int(rng.integers(1, max(1, int(n * self.min_cluster_frac)) + 1)),
            policy=str(rng.choice(self.policies)),
            tau=float(rng.uniform(*self.tau)),
        )
        if self.pinned:
            cfg = replace(cfg, **self.pinned)
        return cfg


@dataclass(frozen=True)
class Trial:
    trial: int
    config: ClusterConfig
    ari: float
    nmi: float
    runtime_s: float
    n_clusters: int

    def to_record(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "trial": self.trial,
            "config": self.config.to_dict(),
            "ari": self.ari,
            "nmi": self.nmi,
            "runtime_s": self.runtime_s,
            "n_clusters": self.n_clusters,
        }


@dataclass
class TrialLog:
    dataset: str
    search_seed: int
    trials: list[Trial] = field(default_factory=list)

    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("empty trial log")
        return max(self.trials, key=lambda t: (t.ari, -t.trial))

    def write_jsonl(self, path: Union[str, Path]) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for trial in self.trials:
                fh.write(json.dumps(trial.to_record()) + "\n")

    def summary(self) -> dict:
        best = self.best()
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": self.dataset,
            "search_seed": self.search_seed,
            "n_trials": len(self.trials),
            "best_trial": best.trial,
            "best_ari": best.ari,
            "best_nmi": best.nmi,
            "best_config": best.config.to_dict(),
            "total_runtime_s": sum(t.runtime_s for t in self.trials),
        }


def read_trial_log(path: Union[str, Path]) -> TrialLog:
    log = TrialLog(dataset="", search_seed=0)
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            log.trials.append(
                Trial(
                    trial=rec["trial"],
                    config=ClusterConfig(**rec["config"]),
                    ari=rec["ari"],
                    nmi=rec["nmi"],
                    runtime_s=rec["runtime_s"],
                    n_clusters=rec.get("n_clusters", 0),
                )
            )
    return log


def random_search(
    ds: Dataset,
    space: Optional[ParamSpace] = None,
    budget: SearchBudget = SearchBudget(),
    seed: int = 0,
    base: Optional[ClusterConfig] = None,
) -> tuple[ClusterConfig, TrialLog]:
    """Budgeted uniform random search; trial 1 is always the default config."""
    if ds.labels is None:
        raise ValueError("random_search needs ground-truth labels")
    space = space or ParamSpace()
    base = base or ClusterConfig()
    rng = np.random.default_rng(seed)
    log = TrialLog(dataset=ds.name, search_seed=seed)
    index = build_index(ds.values, base.index, seed=base.seed) if base.index == "exact" else None
    started = time.perf_counter()
    for t in range(1, budget.max_trials + 1):
        if t > 1 and time.perf_counter() - started >= budget.max_seconds:
            break
        if t == 1:
            cfg = replace(
                base,
                max_neighbors=min(base.max_neighbors, ds.n - 1),
                min_cluster_size=min(base.min_cluster_size, max(1, ds.n // 10)),
            )
            if space.pinned:
                cfg = replace(cfg, **space.pinned)
        else:
            cfg = space.sample(rng, ds.n, base)
        cfg = replace(cfg, seed=seed + t)
        labeling, report = cluster(ds, cfg, index=index)
        log.trials.append(
            Trial(
                trial=t,
                config=cfg,
                ari=ari(ds.labels, labeling.labels),
                nmi=nmi(ds.labels, labeling.labels),
                runtime_s=report.runtime_s,
                n_clusters=labeling.n_clusters,
            )
        )
    return log.best().config, log


def anytime_curve(log: TrialLog) -> list[tuple[int, float]]:
    """Best-so-far ARI after each trial."""
    if not log.trials:
        raise ValueError("empty trial log")
    curve = []
    best = -math.inf
    for trial in log.trials:
        best = max(best, trial.ari)
        curve.append((trial.trial, best))
    return curve


def plateau_trial(log: TrialLog, margin: float = 0.05) -> int:
    """First trial after which the remaining best-so-far improvement is <= margin."""
    curve = anytime_curve(log)
    final = curve[-1][1]
    for trial, best in curve:
        if final - best <= margin:
            return trial
    return curve[-1][0]


def stability(
    ds: Dataset,
    cfg: ClusterConfig,
    runs: int = 10,
    base_seed: int = 0,
    reference: str = "truth",
) -> tuple[float, float, list[float]]:
    """Rerun clustering with varied index seeds; mean and stdev of ARI.

    ``reference`` picks the comparison labels: the ground truth, or the
    labels produced by the exact index under the same configuration.
    """
    if reference == "truth":
        if ds.labels is None:
            raise ValueError("stability against truth needs labels")
        ref_labels = ds.labels
    elif reference == "exact":
        ref_labels = cluster(ds, replace(cfg, index="exact"))[0].labels
    else:
        raise ValueError(f"unknown reference {reference!r}")
    scores = []
    for run in range(runs):
        labeling, _ = cluster(ds, replace(cfg, seed=base_seed + run))
        scores.append(ari(ref_labels, labeling.labels))
    mean = float(np.mean(scores))
    sigma = float(np.std(scores)) if runs > 1 else 0.0
    return mean, sigma, scores


ABLATION_ARMS = (
    "standard_scaler",
    "no_scaler",
    "policy_noise",
    "random_seeding",
    "no_heuristics",
)


def _arm_setup(arm: str, ds: Dataset) -> tuple[Dataset, dict]:
    if arm == "baseline":
        return scale(ds, ScalerKind.MINMAX), {}
    if arm == "standard_scaler":
        return scale(ds, ScalerKind.STANDARD), {}
    if arm == "no_scaler":
        return scale(ds, ScalerKind.NONE), {}
    if arm == "policy_noise":
        return scale(ds, ScalerKind.MINMAX), {"policy": "noise"}
    if arm == "random_seeding":
        return scale(ds, ScalerKind.MINMAX), {"seeding": "random"}
    if arm == "no_heuristics":
        return scale(ds, ScalerKind.MINMAX), {"heuristics": "identity"}
    raise ValueError(f"unknown ablation arm {arm!r}")


def ablate(
    ds: Dataset,
    arms: Sequence[str] = ABLATION_ARMS,
    budget: SearchBudget = SearchBudget(),
    seed: int = 0,
) -> list[dict]:
    """Tune per arm, then rerun the winner; baseline row always comes first."""
    rows = []
    for arm in ("baseline", *arms):
        arm_ds, pins = _arm_setup(arm, ds)
        space = ParamSpace(pinned=pins)
        best_cfg, log = random_search(arm_ds, space=space, budget=budget, seed=seed)
        best = log.best()
        reruns = [
            ari(arm_ds.labels, cluster(arm_ds, replace(best_cfg, seed=seed + r))[0].labels)
            for r in range(budget.reruns)
        ]
        rows.append(
            {
                "arm": arm,
                "best_ari": best.ari,
                "best_nmi": best.nmi,
                "mean_ari": float(np.mean(reruns)),
                "std_ari": float(np.std(reruns)),
                "best_config": best_cfg.to_dict(),
                "n_trials": len(log.trials),
            }
        )
    return rows


@dataclass(frozen=True)
class WilcoxonResult:
    name: str
    statistic: float
    p_value: float
    n_effective: int
    significant: bool
    holm_threshold: float


def _signed_rank_p(diffs: np.ndarray) -> tuple[float, float, int]:
    """Two-sided Wilcoxon signed-rank p; exact enumeration for small n."""
    diffs = np.asarray(diffs, dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    n = diffs.size
    if n == 0:
        return math.nan, 1.0, 0
    magnitudes = np.abs(diffs)
    order = np.argsort(magnitudes, kind="stable")
    ranks = np.empty(n)
    sorted_m = magnitudes[order]
    # average ranks over ties
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_m[j + 1] == sorted_m[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    statistic = min(w_plus, w_minus)
    if n <= 12:
        signs = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
        sums = signs @ ranks
        lo, hi = min(w_plus, w_minus), max(w_plus, w_minus)
        p = float(((sums <= lo + 1e-12).sum() + (sums >= hi - 1e-12).sum()) / signs.shape[0])
    else:
        mean = n * (n + 1) / 4.0
        tie_sizes = np.unique(sorted_m, return_counts=True)[1]
        var = n * (n + 1) * (2 * n + 1) / 24.0 - ((tie_sizes**3 - tie_sizes).sum()) / 48.0
        z = (w_plus - mean) / math.sqrt(var)
        p = math.erfc(abs(z) / math.sqrt(2.0))
    return statistic, min(1.0, p), n


def wilcoxon_holm(
    pairs_by_name: Mapping[str, Sequence[tuple[float, float]]],
    alpha: float = 0.05,
) -> list[WilcoxonResult]:
    """Paired signed-rank tests with Holm step-down correction across the family."""
    raw = []
    for name, pairs in pairs_by_name.items():
        if len(pairs) < 5:
            raise ValueError(f"{name}: need at least 5 pairs, got {len(pairs)}")
        diffs = np.array([b - a for a, b in pairs])
        statistic, p, n_eff = _signed_rank_p(diffs)
        raw.append((name, statistic, p, n_eff))
    m = len(raw)
    order = sorted(range(m), key=lambda idx: raw[idx][2])
    significant = [False] * m
    thresholds = [0.0] * m
    alive = True
    for rank, idx in enumerate(order):
        threshold = alpha / (m - rank)
        thresholds[idx] = threshold
        if alive and raw[idx][2] <= threshold:
            significant[idx] = True
        else:
            alive = False
    return [
        WilcoxonResult(
            name=name,
            statistic=statistic,
            p_value=p,
            n_effective=n_eff,
            significant=significant[i],
            holm_threshold=thresholds[i],
        )
        for i, (name, statistic, p, n_eff) in enumerate(raw)
    ]


def scaling_sweep(
    sizes: Iterable[int] = (2500, 5000, 10000),
    dim: int = 8,
    index_kind: str = "accelerated",
    seed: int = 0,
    cfg: Optional[ClusterConfig] = None,
) -> list[dict]:
    """Wall-time of full cluster() runs on equal-density blob data of growing N."""
    cfg = cfg or ClusterConfig(index=index_kind)
    rows = []
    prev = None
    for n in sizes:
        ds = _blobs_for_bench(n, dim, seed)
        _, report = cluster(ds, cfg)
        ratio = report.runtime_s / prev if prev else None
        rows.append({"n": n, "dim": dim, "seconds": report.runtime_s, "ratio_vs_prev": ratio})
        prev = report.runtime_s
    return rows


def dimension_sweep(
    dims: Iterable[int] = (16, 64, 256),
    n: int = 2000,
    index_kind: str = "accelerated",
    seed: int = 0,
    cfg: Optional[ClusterConfig] = None,
) -> list[dict]:
    """Wall-time of full cluster() runs while the dimensionality grows."""
    cfg = cfg or ClusterConfig(index=index_kind)
    rows = []
    prev = None
    for dim in dims:
        ds = _blobs_for_bench(n, dim, seed)
        _, report = cluster(ds, cfg)
        ratio = report.runtime_s / prev if prev else None
        rows.append({"n": n, "dim": dim, "seconds": report.runtime_s, "ratio_vs_prev": ratio})
        prev = report.runtime_s
    return rows


def _blobs_for_bench(n: int, dim: int, seed: int) -> Dataset:
    """Five equal blobs in the requested dimensionality, minmax scaled."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, dim]))
    k = 5
    centers = rng.uniform(-10.0, 10.0, size=(k, dim))
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    parts = [c + rng.normal(0.0, 1.0, size=(cnt, dim)) for c, cnt in zip(centers, counts)]
    labels = np.concatenate([np.full(cnt, i, dtype=np.int64) for i, cnt in enumerate(counts)])
    ds = Dataset(values=np.vstack(parts), labels=labels, name=f"bench_blobs_n{n}_d{dim}")
    return scale(ds, ScalerKind.MINMAX)

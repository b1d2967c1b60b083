"""Command-line surface: generate, cluster, tune, bench, ablate, serve.

Every run prints a reproducibility header (seed, config, dataset content
hash) so outputs can be traced back to their exact inputs. Exit codes:
0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence, Union

from . import __version__
from .data import (
    GENERATOR_KINDS,
    DataError,
    Dataset,
    ScalerKind,
    SyntheticSpec,
    dev_suite,
    generate,
    load_dataset,
    prepare,
    save_csv,
    scale,
)
from .engine import ClusterConfig, ConfigError, DegenerateDataset, cluster
from .harness import (
    ABLATION_ARMS,
    SearchBudget,
    ablate,
    anytime_curve,
    dimension_sweep,
    plateau_trial,
    random_search,
    scaling_sweep,
    wilcoxon_holm,
)
from .metrics import ari, nmi

NOISE_OUT = -1


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--level", type=int, choices=(1, 2), default=1)
    p.add_argument("--expansion", type=float, default=0.5)
    p.add_argument("--blur", type=float, default=0.5)
    p.add_argument("--max-neighbors", type=int, default=15)
    p.add_argument("--min-cluster-size", type=int, default=5)
    p.add_argument("--policy", choices=("reassign", "noise"), default="reassign")
    p.add_argument("--tau", type=float, default=0.3)
    p.add_argument("--heuristics", choices=("default", "identity"), default="default")
    p.add_argument("--seeding", choices=("ordered", "random"), default="ordered")
    p.add_argument("--index", choices=("exact", "accelerated"), default="exact")
    p.add_argument("--seed", type=int, default=0)


def _config_from_args(args: argparse.Namespace) -> ClusterConfig:
    return ClusterConfig(
        level=args.level,
        expansion=args.expansion,
        blur=args.blur,
        max_neighbors=args.max_neighbors,
        min_cluster_size=args.min_cluster_size,
        policy=args.policy,
        tau=args.tau,
        heuristics=args.heuristics,
        seeding=args.seeding,
        index=args.index,
        seed=args.seed,
    )


def _truth_selector(raw: Optional[str]) -> Optional[Union[str, int]]:
    if raw is None:
        return None
    return int(raw) if raw.lstrip("-").isdigit() else raw


def _load(args: argparse.Namespace) -> Dataset:
    ds = load_dataset(args.input, label_column=_truth_selector(args.truth))
    return scale(ds, ScalerKind(args.scaler))


def _header(ds: Dataset, seed: int, config: Optional[dict] = None) -> None:
    print(f"# dataset={ds.name} n={ds.n} d={ds.dim} sha={ds.fingerprint()} seed={seed}")
    if config:
        print(f"# config={json.dumps(config, sort_keys=True)}")


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(kind=args.kind, n_points=args.n, noise=args.noise, seed=args.seed)
    ds = generate(spec)
    out = Path(args.out or f"{args.kind}.csv")
    save_csv(ds, out)
    _header(ds, args.seed)
    print(f"wrote {ds.n} rows to {out}")
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    ds = _load(args)
    cfg = _config_from_args(args)
    _header(ds, cfg.seed, cfg.to_dict())
    labeling, report = cluster(ds, cfg)
    out = Path(args.out or f"{Path(args.input).stem}_labels.csv")
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster"])
        for label in labeling.labels:
            writer.writerow([int(label)])
    payload = report.to_dict()
    if ds.labels is not None:
        payload["ari"] = ari(ds.labels, labeling.labels)
        payload["nmi"] = nmi(ds.labels, labeling.labels)
    payload["dataset"] = {"name": ds.name, "n": ds.n, "d": ds.dim, "sha": ds.fingerprint()}
    report_path = out.with_suffix(".report.json")
    report_path.write_text(json.dumps(payload, indent=2))
    print(
        f"clusters={labeling.n_clusters} noise={report.n_noise} "
        f"runtime_s={report.runtime_s:.3f} labels={out} report={report_path}"
    )
    if "ari" in payload:
        print(f"ari={payload['ari']:.4f} nmi={payload['nmi']:.4f}")
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    if args.truth is None:
        print("tune requires --truth", file=sys.stderr)
        return 2
    ds = _load(args)
    ds = prepare(ds, shuffle_seed=args.shuffle_seed, max_n=args.max_n)
    budget = SearchBudget(max_trials=args.trials, max_seconds=args.seconds)
    _header(ds, args.seed)
    best_cfg, log = random_search(ds, budget=budget, seed=args.seed)
    out = Path(args.out or f"{Path(args.input).stem}_trials.jsonl")
    log.write_jsonl(out)
    summary = log.summary()
    summary["plateau_trial"] = plateau_trial(log)
    summary_path = out.with_suffix(".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2))
    best = log.best()
    print(f"trials={len(log.trials)} best_trial={best.trial} best_ari={best.ari:.4f}")
    print(f"best_config={json.dumps(best_cfg.to_dict(), sort_keys=True)}")
    print(f"log={out} summary={summary_path}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    dims = [int(d) for d in args.dims.split(",")]
    cfg = ClusterConfig(index=args.index, seed=args.seed)
    print(f"# index={args.index} seed={args.seed}")
    n_rows = scaling_sweep(sizes=sizes, dim=args.d, index_kind=args.index, seed=args.seed, cfg=cfg)
    d_rows = dimension_sweep(dims=dims, n=args.n, index_kind=args.index, seed=args.seed, cfg=cfg)
    print(f"{'sweep':8s} {'n':>7s} {'dim':>5s} {'seconds':>9s} {'ratio':>6s}")
    for row in n_rows:
        ratio = f"{row['ratio_vs_prev']:.2f}" if row["ratio_vs_prev"] else "-"
        print(f"{'N':8s} {row['n']:7d} {row['dim']:5d} {row['seconds']:9.3f} {ratio:>6s}")
    for row in d_rows:
        ratio = f"{row['ratio_vs_prev']:.2f}" if row["ratio_vs_prev"] else "-"
        print(f"{'dim':8s} {row['n']:7d} {row['dim']:5d} {row['seconds']:9.3f} {ratio:>6s}")
    if args.out:
        Path(args.out).write_text(json.dumps({"n_sweep": n_rows, "dim_sweep": d_rows}, indent=2))
        print(f"wrote {args.out}")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    budget = SearchBudget(max_trials=args.trials, max_seconds=args.seconds, reruns=args.reruns)
    arms = tuple(args.arms.split(",")) if args.arms else ABLATION_ARMS
    datasets: list[Dataset] = []
    if args.input:
        for path in args.input:
            ds = load_dataset(path, label_column=_truth_selector(args.truth))
            datasets.append(ds)
    else:
        datasets = dev_suite(args.seed)
        print("# no --input given: running on the generated development suite")
    results = {}
    for ds in datasets:
        rows = ablate(ds, arms=arms, budget=budget, seed=args.seed)
        results[ds.name] = rows
        print(f"\ndataset={ds.name} n={ds.n} d={ds.dim}")
        print(f"{'arm':18s} {'best_ari':>9s} {'mean_ari':>9s} {'std_ari':>8s}")
        for row in rows:
            print(
                f"{row['arm']:18s} {row['best_ari']:9.4f} {row['mean_ari']:9.4f} "
                f"{row['std_ari']:8.4f}"
            )
    eligible = [ds for ds in datasets if args.include_dev or not ds.development]
    print("\nWilcoxon signed-rank (baseline vs arm), Holm corrected:")
    if len(eligible) < 5:
        print(
            f"  skipped: {len(eligible)} eligible datasets (<5); "
            "development datasets are excluded unless --include-dev"
        )
        tests = []
    else:
        pairs = {
            arm: [
                (
                    next(r for r in results[ds.name] if r["arm"] == "baseline")["best_ari"],
                    next(r for r in results[ds.name] if r["arm"] == arm)["best_ari"],
                )
                for ds in eligible
            ]
            for arm in arms
        }
        tests = wilcoxon_holm(pairs, alpha=args.alpha)
        for t in tests:
            flag = "significant" if t.significant else "n.s."
            print(f"  {t.name:18s} W={t.statistic:6.1f} p={t.p_value:.4f} {flag}")
    if args.out:
        payload = {
            "results": results,
            "wilcoxon_holm": [t.__dict__ for t in tests],
            "alpha": args.alpha,
        }
        Path(args.out).write_text(json.dumps(payload, indent=2))
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("evoclust.service.app:app", host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evoclust",
        description="Adaptive graph clustering with evolving neighborhood statistics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a synthetic dataset to CSV")
    p_gen.add_argument("--kind", required=True, choices=GENERATOR_KINDS)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--noise", type=float, default=None)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(func=_cmd_gen)

    p_cluster = sub.add_parser("cluster", help="cluster a CSV dataset")
    p_cluster.add_argument("--input", required=True)
    p_cluster.add_argument("--truth", default=None, help="label column name or index")
    p_cluster.add_argument("--scaler", choices=("minmax", "standard", "none"), default="minmax")
    p_cluster.add_argument("--out", default=None)
    _add_config_flags(p_cluster)
    p_cluster.set_defaults(func=_cmd_cluster)

    p_tune = sub.add_parser("tune", help="budgeted random parameter search")
    p_tune.add_argument("--input", required=True)
    p_tune.add_argument("--truth", required=True)
    p_tune.add_argument("--scaler", choices=("minmax", "standard", "none"), default="minmax")
    p_tune.add_argument("--shuffle-seed", type=int, default=42,
                        help="row shuffle applied before tuning")
    p_tune.add_argument("--max-n", type=int, default=10_000,
                        help="subsample cap applied after the shuffle")
    p_tune.add_argument("--trials", type=int, default=51)
    p_tune.add_argument("--seconds", type=float, default=120.0)
    p_tune.add_argument("--seed", type=int, default=42)
    p_tune.add_argument("--out", default=None)
    p_tune.set_defaults(func=_cmd_tune)

    p_bench = sub.add_parser("bench", help="scaling benchmarks over N and dimensionality")
    p_bench.add_argument("--sizes", default="2500,5000,10000")
    p_bench.add_argument("--d", type=int, default=8)
    p_bench.add_argument("--dims", default="16,64,256")
    p_bench.add_argument("--n", type=int, default=2000)
    p_bench.add_argument("--index", choices=("exact", "accelerated"), default="accelerated")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=_cmd_bench)

    p_ablate = sub.add_parser("ablate", help="ablation arms plus significance tests")
    p_ablate.add_argument("--input", nargs="*", default=None)
    p_ablate.add_argument("--truth", default=None)
    p_ablate.add_argument("--trials", type=int, default=51)
    p_ablate.add_argument("--seconds", type=float, default=120.0)
    p_ablate.add_argument("--reruns", type=int, default=10)
    p_ablate.add_argument("--arms", default=None, help="comma-separated subset of arms")
    p_ablate.add_argument("--alpha", type=float, default=0.05)
    p_ablate.add_argument("--include-dev", action="store_true")
    p_ablate.add_argument("--seed", type=int, default=0)
    p_ablate.add_argument("--out", default=None)
    p_ablate.set_defaults(func=_cmd_ablate)

    p_serve = sub.add_parser("serve", help="start the tuning HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8237)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ConfigError, DegenerateDataset, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Dataset ingestion, scaling, seeded preparation, and synthetic generators.

All randomness flows through numpy's PCG64 generator (``np.random.default_rng``);
per-component streams are derived with ``SeedSequence.spawn`` so every dataset
is bit-reproducible for a given seed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised for malformed input files or invalid generator specs."""


class ScalerKind(str, Enum):
    MINMAX = "minmax"
    STANDARD = "standard"
    NONE = "none"


GENERATOR_KINDS = (
    "density_gradient",
    "rectangle",
    "ejected_mass",
    "small_line",
    "fixed_density_blobs",
    "varying_density_blobs",
    "circles",
    "moons",
    "gradient_50d",
)

# smallest n_points that still yields the advertised structure
_KIND_MINIMUM = {
    "density_gradient": 2,
    "rectangle": 8,
    "ejected_mass": 10,
    "small_line": 2,
    "fixed_density_blobs": 5,
    "varying_density_blobs": 3,
    "circles": 4,
    "moons": 4,
    "gradient_50d": 2,
}

_KIND_DEFAULT_NOISE = {
    "density_gradient": 0.0,
    "rectangle": 0.004,
    "ejected_mass": 0.0,
    "small_line": 0.0,
    "fixed_density_blobs": 1.0,
    "varying_density_blobs": 1.0,
    "circles": 0.04,
    "moons": 0.06,
    "gradient_50d": 0.0,
}


@dataclass(frozen=True)
class Dataset:
    """Immutable row-major feature matrix with optional ground-truth labels."""

    values: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "dataset"
    scaler_applied: ScalerKind = ScalerKind.NONE
    development: bool = False

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("values contain NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.ascontiguousarray(self.labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise DataError(
                    f"labels length {labels.shape[0]} != number of rows {values.shape[0]}"
                )
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def fingerprint(self) -> str:
        """Short content hash used in reproducibility headers."""
        import hashlib

        h = hashlib.sha256(self.values.tobytes())
        if self.labels is not None:
            h.update(self.labels.tobytes())
        return h.hexdigest()[:12]


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for one synthetic dataset kind."""

    kind: str
    n_points: int
    noise: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise DataError(f"unknown generator kind {self.kind!r}")
        if self.n_points < _KIND_MINIMUM[self.kind]:
            raise DataError(
                f"{self.kind} needs at least {_KIND_MINIMUM[self.kind]} points, "
                f"got {self.n_points}"
            )
        if self.noise is not None and self.noise < 0:
            raise DataError("noise must be nonnegative")


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"non-numeric value {cell!r} at row {row}, column {col}") from None


def _is_numeric_row(cells: Sequence[str]) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def load_dataset(
    path: Union[str, Path],
    label_column: Optional[Union[str, int]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Load a CSV file (UTF-8, comma-separated, '.' decimal) into a Dataset.

    A header row is auto-detected: if the first row contains any non-numeric
    cell it is treated as column names. ``label_column`` selects the
    ground-truth column either by header name or by zero-based index.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        return _parse_csv(fh, label_column, name or path.stem)


def loads_dataset(
    text: str,
    label_column: Optional[Union[str, int]] = None,
    name: str = "dataset",
) -> Dataset:
    """Parse CSV text already in memory (service uploads)."""
    return _parse_csv(io.StringIO(text), label_column, name)


def _parse_csv(fh, label_column, name: str) -> Dataset:
    reader = csv.reader(fh)
    rows = [row for row in reader if row]
    if not rows:
        raise DataError("empty CSV")

    header: Optional[list[str]] = None
    if not _is_numeric_row(rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError("CSV has a header but no data rows")

    width = len(rows[0])
    label_idx: Optional[int] = None
    if label_column is not None:
        if isinstance(label_column, int):
            label_idx = label_column
        else:
            if header is None or label_column not in header:
                raise DataError(f"label column {label_column!r} not found in header")
            label_idx = header.index(label_column)
        if not 0 <= label_idx < width:
            raise DataError(f"label column index {label_idx} out of range for width {width}")

    values = np.empty((len(rows), width - (1 if label_idx is not None else 0)))
    labels = np.empty(len(rows), dtype=np.int64) if label_idx is not None else None
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"ragged row {r}: expected {width} cells, got {len(row)}")
        j = 0
        for c, cell in enumerate(row):
            value = _parse_float(cell.strip(), r, c)
            if c == label_idx:
                labels[r] = int(round(value))
            else:
                values[r, j] = value
                j += 1
    return Dataset(values=values, labels=labels, name=name)


def save_csv(ds: Dataset, path: Union[str, Path]) -> None:
    """Write features back to CSV with a trailing "label" column when present."""
    path = Path(path)
    cols = [f"x{j}" for j in range(ds.dim)]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if ds.labels is not None:
            writer.writerow(cols + ["label"])
            for row, lab in zip(ds.values, ds.labels):
                writer.writerow([repr(float(v)) for v in row] + [int(lab)])
        else:
            writer.writerow(cols)
            for row in ds.values:
                writer.writerow([repr(float(v)) for v in row])


def scale(ds: Dataset, kind: ScalerKind = ScalerKind.MINMAX) -> Dataset:
    """Return a per-column rescaled copy; labels and name are preserved.

    minmax maps each column to [0,1] with constant columns sent to 0;
    standard centers on the mean and divides by the population (1/N) stdev,
    zero-stdev columns sent to 0.
    """
    kind = ScalerKind(kind)
    if kind is ScalerKind.NONE:
        return replace(ds, scaler_applied=ScalerKind.NONE)
    x = ds.values
    if kind is ScalerKind.MINMAX:
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (x - lo) / safe, 0.0)
    else:
        mean = x.mean(axis=0)
        std = x.std(axis=0)  # population stdev
        safe = np.where(std > 0, std, 1.0)
        out = np.where(std > 0, (x - mean) / safe, 0.0)
    return replace(ds, values=out, scaler_applied=kind)


def prepare(ds: Dataset, shuffle_seed: int = 42, max_n: int = 10_000) -> Dataset:
    """Seeded row shuffle followed by a head-truncation to ``max_n`` rows."""
    if max_n < 1:
        raise DataError("max_n must be positive")
    rng = np.random.default_rng(shuffle_seed)
    order = rng.permutation(ds.n)[: min(ds.n, max_n)]
    labels = ds.labels[order] if ds.labels is not None else None
    return replace(ds, values=ds.values[order], labels=labels)


def generate(spec: SyntheticSpec) -> Dataset:
    """Build one labeled synthetic dataset for the development suite."""
    noise = spec.noise if spec.noise is not None else _KIND_DEFAULT_NOISE[spec.kind]
    builder = _BUILDERS[spec.kind]
    values, labels = builder(spec.n_points, noise, np.random.SeedSequence(spec.seed))
    return Dataset(
        values=values,
        labels=labels,
        name=spec.kind,
        development=True,
    )


def _radial_gradient(n: int, dim: int, noise: float, ss: np.random.SeedSequence):
    """Single blob: dense core, gradually sparser rim (radius = u^2)."""
    rng = np.random.default_rng(ss)
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = rng.uniform(0.0, 1.0, size=n) ** 2
    points = direction * radius[:, None]
    if noise > 0:
        points += rng.normal(0.0, noise, size=points.shape)
    return points, np.zeros(n, dtype=np.int64)


def _gen_density_gradient(n, noise, ss):
    return _radial_gradient(n, 2, noise, ss)


def _gen_gradient_50d(n, noise, ss):
    return _radial_gradient(n, 50, noise, ss)


def _gen_rectangle(n, noise, ss):
    """Evenly spaced points along the perimeter of a 2x1 rectangle, labeled by side."""
    rng = np.random.default_rng(ss)
    w, h = 2.0, 1.0
    perimeter = 2 * (w + h)
    t = np.arange(n) / n * perimeter
    points = np.empty((n, 2))
    labels = np.empty(n, dtype=np.int64)
    for i, ti in enumerate(t):
        if ti < w:
            points[i] = (ti, 0.0)
            labels[i] = 0
        elif ti < w + h:
            points[i] = (w, ti - w)
            labels[i] = 1
        elif ti < 2 * w + h:
            points[i] = (w - (ti - w - h), h)
            labels[i] = 2
        else:
            points[i] = (0.0, h - (ti - 2 * w - h))
            labels[i] = 3
    if noise > 0:
        points += rng.normal(0.0, noise, size=points.shape)
    return points, labels


def _gen_ejected_mass(n, noise, ss):
    """Uniform square mass plus a handful of far outliers (label 1)."""
    ss_mass, ss_out = ss.spawn(2)
    n_out = max(3, n // 60)
    n_mass = n - n_out
    rng = np.random.default_rng(ss_mass)
    mass = rng.uniform(0.0, 1.0, size=(n_mass, 2))
    rng_out = np.random.default_rng(ss_out)
    angles = rng_out.uniform(0.0, 2 * math.pi, size=n_out)
    radii = rng_out.uniform(4.0, 6.0, size=n_out)
    outliers = 0.5 + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    points = np.vstack([mass, outliers])
    labels = np.concatenate([np.zeros(n_mass, dtype=np.int64), np.ones(n_out, dtype=np.int64)])
    if noise > 0:
        points += np.random.default_rng(ss).normal(0.0, noise, size=points.shape)
    return points, labels


def _gen_small_line(n, noise, ss):
    points = np.arange(n, dtype=np.float64)[:, None]
    if noise > 0:
        points = points + np.random.default_rng(ss).normal(0.0, noise, size=points.shape)
    return points, np.zeros(n, dtype=np.int64)


def _gaussian_blobs(n, dim, centers, stds, ss):
    """Equal-count Gaussian blobs with one spawned RNG stream per blob."""
    k = len(centers)
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    streams = ss.spawn(k)
    parts, labels = [], []
    for i, (count, center, std, stream) in enumerate(zip(counts, centers, stds, streams)):
        rng = np.random.default_rng(stream)
        parts.append(center + rng.normal(0.0, std, size=(count, len(center))))
        labels.append(np.full(count, i, dtype=np.int64))
    return np.vstack(parts), np.concatenate(labels)


def _gen_fixed_density_blobs(n, noise, ss):
    dim = 6
    centers = np.eye(dim)[:5] * 10.0
    stds = [noise] * 5
    return _gaussian_blobs(n, dim, centers, stds, ss)


def _gen_varying_density_blobs(n, noise, ss):
    dim = 8
    centers = np.eye(dim)[:3] * 14.0
    stds = [0.5 * noise, 1.0 * noise, 2.5 * noise]
    return _gaussian_blobs(n, dim, centers, stds, ss)


def _gen_circles(n, noise, ss):
    """Two concentric circles, outer radius 1, inner radius 0.5."""
    rng = np.random.default_rng(ss)
    n_out = n // 2 + n % 2
    n_in = n // 2
    t_out = np.linspace(0.0, 2 * math.pi, n_out, endpoint=False)
    t_in = np.linspace(0.0, 2 * math.pi, n_in, endpoint=False)
    points = np.vstack(
        [
            np.column_stack([np.cos(t_out), np.sin(t_out)]),
            0.5 * np.column_stack([np.cos(t_in), np.sin(t_in)]),
        ]
    )
    labels = np.concatenate([np.zeros(n_out, dtype=np.int64), np.ones(n_in, dtype=np.int64)])
    if noise > 0:
        points += rng.normal(0.0, noise, size=points.shape)
    return points, labels


def _gen_moons(n, noise, ss):
    """Two interleaving half-moon arcs."""
    rng = np.random.default_rng(ss)
    n_a = n // 2 + n % 2
    n_b = n // 2
    t_a = np.linspace(0.0, math.pi, n_a)
    t_b = np.linspace(0.0, math.pi, n_b)
    moon_a = np.column_stack([np.cos(t_a), np.sin(t_a)])
    moon_b = np.column_stack([1.0 - np.cos(t_b), 0.5 - np.sin(t_b)])
    points = np.vstack([moon_a, moon_b])
    labels = np.concatenate([np.zeros(n_a, dtype=np.int64), np.ones(n_b, dtype=np.int64)])
    if noise > 0:
        points += rng.normal(0.0, noise, size=points.shape)
    return points, labels


_BUILDERS = {
    "density_gradient": _gen_density_gradient,
    "rectangle": _gen_rectangle,
    "ejected_mass": _gen_ejected_mass,
    "small_line": _gen_small_line,
    "fixed_density_blobs": _gen_fixed_density_blobs,
    "varying_density_blobs": _gen_varying_density_blobs,
    "circles": _gen_circles,
    "moons": _gen_moons,
    "gradient_50d": _gen_gradient_50d,
}

# n_points used when materializing the whole development suite
DEV_SUITE_SIZES = {
    "density_gradient": 300,
    "rectangle": 400,
    "ejected_mass": 300,
    "small_line": 10,
    "fixed_density_blobs": 500,
    "varying_density_blobs": 450,
    "circles": 600,
    "moons": 600,
    "gradient_50d": 300,
}


def dev_suite(seed: int = 0) -> list[Dataset]:
    """Materialize every generator kind at its default development size."""
    return [
        generate(SyntheticSpec(kind=kind, n_points=size, seed=seed))
        for kind, size in DEV_SUITE_SIZES.items()
    ]

"""Synthetic drifting streams and CSV ingestion.

All generators are lazy (one batch in memory at a time), seeded, and
honor their drift schedule exactly: the concept id switches at the
scheduled sample index. No generator normalizes or shuffles; temporal
order is part of the data's meaning.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .pipeline import StreamBatch

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)


@dataclass
class StreamSpec:
    kind: str                      # sea | hyperplane | gaussians | csv
    total: int = 10000
    batch_size: int = 500
    drift_schedule: list[tuple[int, int]] = field(default_factory=list)
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("sea", "hyperplane", "gaussians", "csv"):
            raise ValueError(f"unknown stream kind: {self.kind!r}")
        if self.kind != "csv":
            if self.total < 1:
                raise ValueError(f"total must be >= 1, got {self.total}")
        if self.batch_size < 4:
            raise ValueError(f"batch_size must be >= 4, got {self.batch_size}")
        last = -1
        for idx, _concept in self.drift_schedule:
            if idx <= last or not (0 <= idx < max(self.total, 1)):
                raise ValueError(
                    f"drift indices must be strictly increasing within [0, total): "
                    f"{self.drift_schedule}"
                )
            last = idx


def _concept_at(schedule: list[tuple[int, int]], sample: int) -> int:
    concept = 0
    for idx, cid in schedule:
        if sample >= idx:
            concept = cid
    return concept


def _one_hot(labels: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((len(labels), m))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def _batched(spec: StreamSpec, sample_fn) -> Iterator[StreamBatch]:
    rng = np.random.default_rng(spec.seed)
    produced = 0
    batch_index = 0
    while produced < spec.total:
        t = min(spec.batch_size, spec.total - produced)
        concepts = np.array(
            [_concept_at(spec.drift_schedule, produced + i) for i in range(t)]
        )
        features, labels, m = sample_fn(rng, concepts)
        yield StreamBatch(features=features, labels=_one_hot(labels, m), batch_index=batch_index)
        produced += t
        batch_index += 1


def generate_sea(spec: StreamSpec) -> Iterator[StreamBatch]:
    """Three uniform features on [0, 10]; class 1 iff f1 + f2 <= threshold.

    The per-concept thresholds follow the usual rotation (8, 9, 7, 9.5)
    unless overridden via params["thresholds"]; params["noise"] flips
    labels independently at the given rate.
    """
    thresholds = tuple(spec.params.get("thresholds", SEA_THRESHOLDS))
    noise = float(spec.params.get("noise", 0.0))

    def sample(rng, concepts):
        t = len(concepts)
        features = rng.uniform(0.0, 10.0, size=(t, 3))
        theta = np.array([thresholds[c % len(thresholds)] for c in concepts])
        labels = (features[:, 0] + features[:, 1] <= theta).astype(int)
        if noise > 0.0:
            flips = rng.random(t) < noise
            labels = np.where(flips, 1 - labels, labels)
        return features, labels, 2

    return _batched(spec, sample)


def generate_hyperplane(spec: StreamSpec) -> Iterator[StreamBatch]:
    """Uniform features on [0, 1]^d labeled by the side of a rotating hyperplane.

    Each concept id selects a unit normal (random per concept unless
    params["weights"] provides explicit vectors); the offset centers the
    plane on the cube midpoint. Boundary points fall to class 0.
    """
    dim = int(spec.params.get("dim", 4))
    if dim < 2:
        raise ValueError(f"hyperplane needs dimension >= 2, got {dim}")
    explicit = spec.params.get("weights")
    weight_rng = np.random.default_rng(spec.seed + 0x5EED)
    weights: dict[int, np.ndarray] = {}

    def concept_weights(cid: int) -> np.ndarray:
        if cid not in weights:
            if explicit is not None:
                w = np.asarray(explicit[cid % len(explicit)], dtype=float)
            else:
                w = weight_rng.normal(size=dim)
            weights[cid] = w / np.linalg.norm(w)
        return weights[cid]

    def sample(rng, concepts):
        t = len(concepts)
        features = rng.uniform(0.0, 1.0, size=(t, dim))
        labels = np.empty(t, dtype=int)
        for i, cid in enumerate(concepts):
            w = concept_weights(int(cid))
            labels[i] = int(features[i] @ w - w.sum() / 2.0 > 0.0)
        return features, labels, 2

    return _batched(spec, sample)


def _gaussian_mean_set(spec: StreamSpec) -> np.ndarray:
    """Class means on a randomly rotated regular simplex.

    Every pair of means sits exactly `separation` apart, so the Bayes
    error is controlled regardless of the seed. Needs dim >= classes-1.
    """
    m = int(spec.params.get("classes", 2))
    dim = int(spec.params.get("dim", 2))
    separation = float(spec.params.get("separation", 6.0))
    if m < 2:
        raise ValueError(f"gaussians needs >= 2 classes, got {m}")
    if dim < m - 1:
        raise ValueError(f"gaussians needs dim >= classes - 1, got dim={dim}, classes={m}")
    # centered standard-basis simplex in R^m, pairwise distance sqrt(2)
    corners = np.eye(m) - 1.0 / m
    basis = np.linalg.svd(corners, full_matrices=False)[2][: m - 1]
    coords = corners @ basis.T  # (m, m-1)
    coords *= separation / np.sqrt(2.0)
    mean_rng = np.random.default_rng(spec.seed + 0x60A5)
    rotation = np.linalg.qr(mean_rng.normal(size=(dim, dim)))[0]
    embedded = np.zeros((m, dim))
    embedded[:, : m - 1] = coords
    return embedded @ rotation.T


def generate_gaussians(spec: StreamSpec) -> Iterator[StreamBatch]:
    """Class-conditional unit Gaussians whose means are permuted at drifts.

    Concepts cyclically rotate the class-to-mean assignment, so each
    drift moves the decision boundary (real drift) while the marginal
    input distribution stays put. params: classes (default 2), dim
    (default 2), separation between any two means in sigma units
    (default 6).
    """
    base_means = _gaussian_mean_set(spec)
    m = base_means.shape[0]
    priors = spec.params.get("priors")
    if priors is not None:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (m,) or abs(priors.sum() - 1.0) > 1e-9 or (priors < 0).any():
            raise ValueError(f"priors must be {m} non-negative values summing to 1")

    def sample(rng, concepts):
        t = len(concepts)
        if priors is None:
            labels = rng.integers(0, m, size=t)
        else:
            labels = rng.choice(m, size=t, p=priors)
        features = rng.normal(size=(t, base_means.shape[1]))
        for i in range(t):
            assigned = (labels[i] + concepts[i]) % m
            features[i] += base_means[assigned]
        return features, labels.astype(int), m

    return _batched(spec, sample)


def gaussian_means(spec: StreamSpec, concept: int) -> np.ndarray:
    """Per-class means in effect under a given concept id (for oracles)."""
    base_means = _gaussian_mean_set(spec)
    m = base_means.shape[0]
    return np.stack([base_means[(c + concept) % m] for c in range(m)])


@dataclass
class CsvSchema:
    label_column: int | str = -1
    feature_columns: list[int | str] | None = None
    has_header: bool = False
    labels: list | None = None  # explicit label set; inferred when None


def _resolve_columns(header: list[str] | None, width: int, schema: CsvSchema):
    def resolve(col):
        if isinstance(col, str):
            if header is None:
                raise ValueError(f"column {col!r} needs a header row")
            if col not in header:
                raise ValueError(f"column {col!r} not in header {header}")
            return header.index(col)
        return col % width
    label_idx = resolve(schema.label_column)
    if schema.feature_columns is None:
        feature_idx = [i for i in range(width) if i != label_idx]
    else:
        feature_idx = [resolve(c) for c in schema.feature_columns]
    return label_idx, feature_idx


def _label_key(value: str):
    try:
        return (0, float(value), "")
    except ValueError:
        return (1, 0.0, value)


def ingest_csv(path, schema: CsvSchema | None = None, batch_size: int = 500) -> Iterator[StreamBatch]:
    """Stream a CSV file in row order as one-hot labeled batches.

    The label map is built from the file's distinct labels (sorted,
    numeric before lexicographic) unless the schema pins an explicit
    set. The final partial batch is emitted as-is. Bad rows fail with
    their 1-based row number.
    """
    schema = schema or CsvSchema()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    header = None
    if schema.has_header:
        if not rows:
            raise ValueError(f"{path}: empty file")
        header = rows[0]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    label_idx, feature_idx = _resolve_columns(header, len(rows[0]), schema)

    if schema.labels is not None:
        label_map = {str(v): i for i, v in enumerate(schema.labels)}
    else:
        seen = {row[label_idx] for row in rows}
        label_map = {v: i for i, v in enumerate(sorted(seen, key=_label_key))}
    m = len(label_map)
    if m < 2:
        raise ValueError(f"{path}: need at least 2 distinct labels, found {m}")

    def emit():
        offset = 2 if schema.has_header else 1
        batch_index = 0
        for start in range(0, len(rows), batch_size):
            chunk = rows[start : start + batch_size]
            features = np.empty((len(chunk), len(feature_idx)))
            labels = np.empty(len(chunk), dtype=int)
            for i, row in enumerate(chunk):
                rowno = start + i + offset
                try:
                    for j, col in enumerate(feature_idx):
                        features[i, j] = float(row[col])
                except (ValueError, IndexError) as exc:
                    raise ValueError(f"{path}: row {rowno}: {exc}") from exc
                raw = row[label_idx]
                if raw not in label_map:
                    raise ValueError(f"{path}: row {rowno}: unknown label {raw!r}")
                labels[i] = label_map[raw]
            yield StreamBatch(
                features=features, labels=_one_hot(labels, m), batch_index=batch_index
            )
            batch_index += 1

    return emit()


def make_stream(spec: StreamSpec) -> Iterator[StreamBatch]:
    if spec.kind == "sea":
        return generate_sea(spec)
    if spec.kind == "hyperplane":
        return generate_hyperplane(spec)
    if spec.kind == "gaussians":
        return generate_gaussians(spec)
    if spec.kind == "csv":
        schema = spec.params.get("schema") or CsvSchema()
        return ingest_csv(spec.params["path"], schema, spec.batch_size)
    raise ValueError(f"unknown stream kind: {spec.kind!r}")


def dump_stream_csv(batches: Iterator[StreamBatch], path, header: bool = True) -> int:
    """Write a batch sequence as CSV (features then integer label).

    Floats are written with repr so a later ingest_csv round-trips
    bit-identically. Returns the number of rows written.
    """
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        wrote_header = False
        for batch in batches:
            if header and not wrote_header:
                writer.writerow(
                    [f"f{i}" for i in range(batch.features.shape[1])] + ["label"]
                )
                wrote_header = True
            labels = np.argmax(batch.labels, axis=1)
            for i in range(len(batch)):
                writer.writerow([repr(float(v)) for v in batch.features[i]] + [int(labels[i])])
                rows += 1
    return rows

"""Prequential experiment runner, fixed-structure baseline, report files.

A model here is anything with `process_batch(batch) -> BatchReport`; the
runner folds it over a stream, test-then-train, single pass. Repetition
r derives its seeds as base + r for both the stream and the model, so
repetitions are individually deterministic yet distinct.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .model import network_to_dict, new_network
from .numerics import xavier_init, xavier_vector
from .pipeline import (
    BatchReport,
    PipelineConfig,
    StreamBatch,
    WarningBuffer,
    process_batch,
)
from .streams import StreamSpec, make_stream
from .width import WidthState

SUMMARY_COLUMNS = ["model", "stream", "seed", "rate_mean", "rate_std", "HL", "HN", "NoP", "ET_ms"]


@dataclass
class ExperimentConfig:
    stream: StreamSpec
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    model: str = "adl"  # adl | fixed_dnn
    fixed_layers: list[int] = field(default_factory=lambda: [10])
    repetitions: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if self.model not in ("adl", "fixed_dnn"):
            raise ValueError(f"model must be 'adl' or 'fixed_dnn', got {self.model!r}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.model == "fixed_dnn" and len(self.fixed_layers) < 1:
            raise ValueError("fixed_dnn needs at least one hidden layer size")


@dataclass
class RunSummary:
    model: str
    stream_kind: str
    seed: int
    repetitions: int
    rate_mean: float
    rate_std: float
    hl_mean: float
    hl_final: float
    hn_mean: float
    hn_final: float
    nop_mean: float
    nop_final: float
    wall_time_ms: float
    drift_count: int
    warning_count: int
    grow_count: int
    prune_count: int
    layer_add_count: int
    layer_deactivate_count: int
    stream_digest: str


class AdlModel:
    """Full elastic pipeline behind the generic model interface."""

    def __init__(self, config: PipelineConfig, seed: int):
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.seed = seed
        self.net = None
        self.width_state = WidthState()
        self.buffer = WarningBuffer()

    def _ensure_built(self, batch: StreamBatch) -> None:
        if self.net is None:
            self.net = new_network(batch.features.shape[1], batch.labels.shape[1], self.rng)

    def process_batch(self, batch: StreamBatch) -> BatchReport:
        self._ensure_built(batch)
        return process_batch(
            self.net, self.width_state, self.buffer, batch, self.config, self.rng
        )

    def snapshot(self) -> dict:
        if self.net is None:
            raise ValueError("model has not seen any data yet")
        return network_to_dict(self.net)


class FixedDnnModel:
    """Static sigmoid MLP with one softmax head, full backprop each sample.

    Shares the initialization scheme and forward kernels with the
    elastic model; only the structure policy differs (there is none).
    """

    def __init__(self, hidden: list[int], config: PipelineConfig, seed: int):
        if not hidden or any(h < 1 for h in hidden):
            raise ValueError(f"hidden layer sizes must be positive, got {hidden}")
        self.hidden = list(hidden)
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        self.head_w = None
        self.head_b = None
        self.n = None
        self.m = None

    def _ensure_built(self, batch: StreamBatch) -> None:
        if self.head_w is not None:
            return
        self.n = batch.features.shape[1]
        self.m = batch.labels.shape[1]
        dims = [self.n] + self.hidden
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            self.weights.append(xavier_init(d_in, d_out, self.rng))
            self.biases.append(xavier_vector(d_in, d_out, d_out, self.rng))
        self.head_w = xavier_init(self.hidden[-1], self.m, self.rng)
        self.head_b = xavier_vector(self.hidden[-1], self.m, self.m, self.rng)

    def _forward(self, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        hs = [x]
        for w, b in zip(self.weights, self.biases):
            hs.append(kernels.affine_sigmoid(w, b, hs[-1]))
        return hs, kernels.affine_softmax(self.head_w, self.head_b, hs[-1])

    def _train_sample(self, x: np.ndarray, c: np.ndarray, lr: float) -> None:
        hs, y = self._forward(x)
        dz = y - c
        d_head_w = np.outer(dz, hs[-1])
        dh = self.head_w.T @ dz
        self.head_w -= lr * d_head_w
        self.head_b -= lr * dz
        for l in range(len(self.weights) - 1, -1, -1):
            dpre = dh * hs[l + 1] * (1.0 - hs[l + 1])
            dh = self.weights[l].T @ dpre
            self.weights[l] -= lr * np.outer(dpre, hs[l])
            self.biases[l] -= lr * dpre

    def _count_params(self) -> tuple[int, int, int]:
        hl = len(self.hidden)
        hn = sum(self.hidden)
        nop = sum(w.size + b.size for w, b in zip(self.weights, self.biases))
        nop += self.head_w.size + self.head_b.size
        return hl, hn, nop

    def process_batch(self, batch: StreamBatch) -> BatchReport:
        start = time.perf_counter()
        self._ensure_built(batch)
        true_idx = np.argmax(batch.labels, axis=1)
        errors = 0
        for i in range(len(batch)):
            _, y = self._forward(batch.features[i])
            if int(np.argmax(y)) != true_idx[i]:
                errors += 1
        for i in range(len(batch)):
            self._train_sample(batch.features[i], batch.labels[i], self.config.learning_rate)
        hl, hn, nop = self._count_params()
        return BatchReport(
            batch=batch.batch_index,
            rate=1.0 - errors / len(batch),
            hl=hl,
            hn=hn,
            nop=nop,
            drift_status="stable",
            cut=None,
            grow_events=0,
            prune_events=0,
            layer_events=[],
            beta=[1.0],
            p=[1.0],
            wall_time_ms=(time.perf_counter() - start) * 1000.0,
        )


def build_model(config: ExperimentConfig, seed: int):
    if config.model == "adl":
        return AdlModel(config.pipeline, seed)
    return FixedDnnModel(config.fixed_layers, config.pipeline, seed)


def derive_stream(spec: StreamSpec, rep: int) -> StreamSpec:
    derived = StreamSpec(
        kind=spec.kind,
        total=spec.total,
        batch_size=spec.batch_size,
        drift_schedule=list(spec.drift_schedule),
        seed=spec.seed + rep,
        params=dict(spec.params),
    )
    return derived


def run_stream(model, batches: Iterable[StreamBatch]) -> tuple[list[BatchReport], str]:
    """Fold a model over a batch sequence; returns reports and a stream digest."""
    digest = hashlib.sha256()
    reports = []
    for batch in batches:
        digest.update(batch.features.tobytes())
        digest.update(batch.labels.tobytes())
        reports.append(model.process_batch(batch))
    return reports, digest.hexdigest()


def summarize(
    config: ExperimentConfig, per_rep: list[list[BatchReport]], digests: list[str],
    wall_time_ms: float,
) -> RunSummary:
    rates = np.array([r.rate for rep in per_rep for r in rep])
    hls = np.array([r.hl for rep in per_rep for r in rep], dtype=float)
    hns = np.array([r.hn for rep in per_rep for r in rep], dtype=float)
    nops = np.array([r.nop for rep in per_rep for r in rep], dtype=float)
    finals = [rep[-1] for rep in per_rep]
    statuses = [r.drift_status for rep in per_rep for r in rep]
    layer_events = [e for rep in per_rep for r in rep for e in r.layer_events]
    return RunSummary(
        model=config.model,
        stream_kind=config.stream.kind,
        seed=config.pipeline.seed,
        repetitions=config.repetitions,
        rate_mean=float(rates.mean()),
        rate_std=float(rates.std()),
        hl_mean=float(hls.mean()),
        hl_final=float(np.mean([r.hl for r in finals])),
        hn_mean=float(hns.mean()),
        hn_final=float(np.mean([r.hn for r in finals])),
        nop_mean=float(nops.mean()),
        nop_final=float(np.mean([r.nop for r in finals])),
        wall_time_ms=wall_time_ms,
        drift_count=sum(1 for s in statuses if s == "drift"),
        warning_count=sum(1 for s in statuses if s == "warning"),
        grow_count=sum(r.grow_events for rep in per_rep for r in rep),
        prune_count=sum(r.prune_events for rep in per_rep for r in rep),
        layer_add_count=sum(1 for e in layer_events if e["kind"] == "added"),
        layer_deactivate_count=sum(1 for e in layer_events if e["kind"] == "deactivated"),
        stream_digest=";".join(digests),
    )


def run_experiment(
    config: ExperimentConfig,
) -> tuple[RunSummary, list[list[BatchReport]], list]:
    """Run all repetitions; returns (summary, per-rep reports, final models).

    A repetition that raises aborts the whole experiment; there is no
    silent partial aggregation.
    """
    start = time.perf_counter()
    per_rep: list[list[BatchReport]] = []
    digests: list[str] = []
    models = []
    for rep in range(config.repetitions):
        model = build_model(config, config.pipeline.seed + rep)
        batches = make_stream(derive_stream(config.stream, rep))
        reports, digest = run_stream(model, batches)
        per_rep.append(reports)
        digests.append(digest)
        models.append(model)
    wall_ms = (time.perf_counter() - start) * 1000.0
    summary = summarize(config, per_rep, digests, wall_ms)
    if config.out_dir is not None:
        emit_reports(summary, per_rep, config.out_dir)
        for rep, model in enumerate(models):
            if isinstance(model, AdlModel):
                path = Path(config.out_dir) / f"model_rep{rep}.json"
                with open(path, "w") as fh:
                    json.dump(model.snapshot(), fh)
    return summary, per_rep, models


def run_fixed_dnn(config: ExperimentConfig) -> tuple[RunSummary, list[list[BatchReport]], list]:
    """run_experiment with the static baseline regardless of config.model."""
    fixed = ExperimentConfig(
        stream=config.stream,
        pipeline=config.pipeline,
        model="fixed_dnn",
        fixed_layers=config.fixed_layers,
        repetitions=config.repetitions,
        out_dir=config.out_dir,
    )
    return run_experiment(fixed)


def summary_row(summary: RunSummary) -> list[str]:
    return [
        summary.model,
        summary.stream_kind,
        str(summary.seed),
        f"{summary.rate_mean:.6f}",
        f"{summary.rate_std:.6f}",
        f"{summary.hl_mean:.4f}",
        f"{summary.hn_mean:.4f}",
        f"{summary.nop_mean:.4f}",
        f"{summary.wall_time_ms:.1f}",
    ]


def emit_reports(
    summary: RunSummary | list[RunSummary],
    per_rep: list[list[BatchReport]],
    out_dir,
) -> dict[str, Path]:
    """Write the JSONL event log, the summary table, and plot-ready curves.

    Given identical inputs the outputs are byte-identical; wall-time
    fields vary run to run because they are measurements, not state.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = summary if isinstance(summary, list) else [summary]

    jsonl_path = out / "reports.jsonl"
    with open(jsonl_path, "w") as fh:
        for rep, reports in enumerate(per_rep):
            for report in reports:
                fh.write(json.dumps({"rep": rep, **report.to_dict()}) + "\n")

    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow(summary_row(s))

    curves_path = out / "curves.csv"
    with open(curves_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "batch", "rate", "HL", "HN"])
        for rep, reports in enumerate(per_rep):
            for report in reports:
                writer.writerow(
                    [rep, report.batch, f"{report.rate:.6f}", report.hl, report.hn]
                )
    return {"jsonl": jsonl_path, "summary": summary_path, "curves": curves_path}

import json

import numpy as np
import pytest

from adlstream.harness import (
    AdlModel,
    ExperimentConfig,
    FixedDnnModel,
    emit_reports,
    run_experiment,
    run_fixed_dnn,
    run_stream,
)
from adlstream.pipeline import BatchReport, PipelineConfig
from adlstream.streams import StreamSpec, make_stream


def small_config(seed=0, model="adl", **stream_kw):
    stream = StreamSpec(kind="gaussians", total=stream_kw.pop("total", 2000),
                        batch_size=500, seed=seed, **stream_kw)
    return ExperimentConfig(
        stream=stream,
        pipeline=PipelineConfig(seed=seed),
        model=model,
        repetitions=stream_kw.pop("repetitions", 1),
    )


class MajorityModel:
    """Predicts the majority class of everything seen so far; for metric checks."""

    def __init__(self):
        self.counts = None

    def process_batch(self, batch):
        true_idx = np.argmax(batch.labels, axis=1)
        if self.counts is None:
            self.counts = np.zeros(batch.labels.shape[1])
        pred = int(np.argmax(self.counts)) if self.counts.sum() else 0
        rate = float((true_idx == pred).mean())
        for t in true_idx:
            self.counts[t] += 1
        return BatchReport(
            batch=batch.batch_index, rate=rate, hl=0, hn=0, nop=0,
            drift_status="stable", cut=None, grow_events=0, prune_events=0,
            layer_events=[], beta=[], p=[], wall_time_ms=0.0,
        )


class TestRunExperiment:
    def test_repetitions_deterministic_and_distinct(self):
        config = small_config(seed=3)
        config.repetitions = 2
        summary_a, reps_a, _ = run_experiment(config)
        summary_b, reps_b, _ = run_experiment(config)
        for ra, rb in zip(reps_a, reps_b):
            assert [r.rate for r in ra] == [r.rate for r in rb]
        assert [r.rate for r in reps_a[0]] != [r.rate for r in reps_a[1]]
        assert summary_a.stream_digest == summary_b.stream_digest

    def test_summary_mean_equals_brute_force_over_reports(self):
        config = small_config(seed=4)
        config.repetitions = 2
        summary, reps, _ = run_experiment(config)
        rates = [r.rate for rep in reps for r in rep]
        assert summary.rate_mean == pytest.approx(np.mean(rates))
        assert summary.rate_std == pytest.approx(np.std(rates))

    def test_majority_predictor_scores_the_prior(self):
        # balanced-prior sanity check of the harness metric path
        spec = StreamSpec(kind="gaussians", total=20000, batch_size=1000, seed=5,
                          params={"priors": [0.7, 0.3]})
        reports, _ = run_stream(MajorityModel(), make_stream(spec))
        assert np.mean([r.rate for r in reports[1:]]) == pytest.approx(0.7, abs=0.02)

    def test_models_returned_for_snapshotting(self):
        summary, _, models = run_experiment(small_config(seed=6))
        assert isinstance(models[0], AdlModel)
        snapshot = models[0].snapshot()
        assert snapshot["n"] == 2


class TestFixedDnn:
    def test_rejects_zero_hidden_layers(self):
        with pytest.raises(ValueError):
            FixedDnnModel([], PipelineConfig(), 0)
        with pytest.raises(ValueError):
            ExperimentConfig(
                stream=StreamSpec(kind="gaussians", total=100, batch_size=50, seed=0),
                pipeline=PipelineConfig(),
                model="fixed_dnn",
                fixed_layers=[],
            )

    def test_static_structure(self):
        summary, reps, _ = run_fixed_dnn(small_config(seed=7, model="fixed_dnn"))
        hls = {r.hl for rep in reps for r in rep}
        hns = {r.hn for rep in reps for r in rep}
        assert hls == {1} and hns == {10}

    def test_matches_adl_final_structure_on_stationary_stream(self):
        # parity check: same structure, no drift, rates within 5 points
        adl_summary, adl_reps, models = run_experiment(small_config(seed=8, total=6000))
        sizes = [layer.nodes for layer in models[0].net.layers]
        config = small_config(seed=8, model="fixed_dnn", total=6000)
        config.fixed_layers = sizes
        fixed_summary, _, _ = run_fixed_dnn(config)
        assert abs(adl_summary.rate_mean - fixed_summary.rate_mean) < 0.05

    def test_learns_the_easy_stream(self):
        summary, reps, _ = run_fixed_dnn(small_config(seed=9, model="fixed_dnn", total=4000))
        assert reps[0][-1].rate > 0.9


class TestEmitReports:
    def _reports(self, seed=10):
        config = small_config(seed=seed)
        summary, reps, _ = run_experiment(config)
        return summary, reps

    def test_jsonl_line_per_batch(self, tmp_path):
        summary, reps = self._reports()
        paths = emit_reports(summary, reps, tmp_path)
        lines = paths["jsonl"].read_text().strip().split("\n")
        assert len(lines) == sum(len(r) for r in reps)
        doc = json.loads(lines[0])
        assert doc["rep"] == 0 and "rate" in doc

    def test_summary_csv_schema(self, tmp_path):
        summary, reps = self._reports()
        paths = emit_reports(summary, reps, tmp_path)
        header = paths["summary"].read_text().splitlines()[0]
        assert header == "model,stream,seed,rate_mean,rate_std,HL,HN,NoP,ET_ms"

    def test_byte_stable_given_same_inputs(self, tmp_path):
        summary, reps = self._reports()
        paths = emit_reports(summary, reps, tmp_path / "a")
        blobs = {k: p.read_bytes() for k, p in paths.items()}
        paths2 = emit_reports(summary, reps, tmp_path / "b")
        for k, p in paths2.items():
            assert p.read_bytes() == blobs[k]

    def test_curves_csv(self, tmp_path):
        summary, reps = self._reports()
        paths = emit_reports(summary, reps, tmp_path)
        lines = paths["curves"].read_text().strip().split("\n")
        assert lines[0] == "rep,batch,rate,HL,HN"
        assert len(lines) == 1 + sum(len(r) for r in reps)


class TestEventCounts:
    def test_drift_events_counted(self):
        config = small_config(seed=11, total=8000, drift_schedule=[(3250, 1)],
                              params={"priors": [0.65, 0.35], "separation": 4.0})
        summary, reps, _ = run_experiment(config)
        assert summary.drift_count >= 1
        assert summary.layer_add_count >= 1
        assert summary.grow_count >= 1

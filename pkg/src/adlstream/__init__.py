"""Self-organizing deep network for streaming classification.

The network starts as a single hidden node and restructures itself on
the fly: the winning layer grows and prunes nodes from a streaming
bias/variance estimate, drift detection over the prequential error
appends new hidden layers, redundant layer heads are retired, and the
per-layer classifiers are combined by dynamically weighted voting.
"""
from .depth import DriftConfig, DriftOutcome, ErrorWindow, detect, find_cut, hoeffding_bound, mici
from .harness import AdlModel, ExperimentConfig, FixedDnnModel, RunSummary, run_experiment
from .kernels import BACKEND
from .model import AdlNetwork, ForwardResult, LayerParams, forward, new_network
from .numerics import RecursiveStat, sigmoid, softmax, xavier_init
from .pipeline import BatchReport, PipelineConfig, StreamBatch, WarningBuffer, process_batch
from .streams import CsvSchema, StreamSpec, ingest_csv, make_stream
from .vote import VotingState
from .width import NsEstimate, WidthState, ns_estimate

__version__ = "0.1.0"

__all__ = [
    "AdlModel",
    "AdlNetwork",
    "BACKEND",
    "BatchReport",
    "CsvSchema",
    "DriftConfig",
    "DriftOutcome",
    "ErrorWindow",
    "ExperimentConfig",
    "FixedDnnModel",
    "ForwardResult",
    "LayerParams",
    "NsEstimate",
    "PipelineConfig",
    "RecursiveStat",
    "RunSummary",
    "StreamBatch",
    "StreamSpec",
    "VotingState",
    "WarningBuffer",
    "WidthState",
    "detect",
    "find_cut",
    "forward",
    "hoeffding_bound",
    "ingest_csv",
    "make_stream",
    "mici",
    "new_network",
    "ns_estimate",
    "process_batch",
    "run_experiment",
    "sigmoid",
    "softmax",
    "xavier_init",
]

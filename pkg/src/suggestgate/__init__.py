"""Behavioral pre-filtering gate for editor code suggestions.

Predicts, from content-agnostic editor telemetry alone, whether a developer
is likely to accept a code suggestion, and gates LLM invocation on that
prediction. Ships the full pipeline: telemetry ingestion, feature
engineering, task-complexity estimation, training, threshold tuning,
evaluation, proportion statistics, session synthesis/replay, and a gate
service (HTTP and newline-delimited JSON).
"""

from .complexity import ComplexityMethod, ComplexityReport, task_complexity
from .dataset import SuggestionRecord, Split, class_weights, stratified_split
from .features import FEATURE_NAMES, FeatureVector, build_feature_vector
from .gate import Decision, GateDecision, Reason, select_threshold, should_trigger
from .model import (
    AcceptanceModel,
    LogisticHyper,
    TreeHyper,
    load_model,
    predict_proba,
    save_model,
    train_logistic,
    train_tree_ensemble,
)
from .telemetry import (
    BehaviorWindow,
    Label,
    SessionState,
    TelemetryEvent,
    TelemetryKind,
    ingest_event,
    label_suggestion,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceModel",
    "BehaviorWindow",
    "ComplexityMethod",
    "ComplexityReport",
    "Decision",
    "FEATURE_NAMES",
    "FeatureVector",
    "GateDecision",
    "Label",
    "LogisticHyper",
    "Reason",
    "SessionState",
    "Split",
    "SuggestionRecord",
    "TelemetryEvent",
    "TelemetryKind",
    "TreeHyper",
    "build_feature_vector",
    "class_weights",
    "ingest_event",
    "label_suggestion",
    "load_model",
    "predict_proba",
    "save_model",
    "select_threshold",
    "should_trigger",
    "stratified_split",
    "task_complexity",
    "train_logistic",
    "train_tree_ensemble",
]

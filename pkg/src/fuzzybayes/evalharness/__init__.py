"""Experiment harness: datasets, splits, baselines, metrics and benchmarks."""

from .baselines import FuzzyNaiveBayesClassifier, WeightedScoringClassifier
from .benchmark import BenchmarkConfig, BenchmarkTable, MODEL_REGISTRY, run_benchmark
from .datasets import (
    DataError,
    Dataset,
    DatasetSchema,
    FeatureSpec,
    SplitSpec,
    impute,
    load_dataset,
    make_student_dataset,
    split,
)
from .metrics import EvalReport, compute_metrics, format_report

__all__ = [
    "BenchmarkConfig",
    "BenchmarkTable",
    "DataError",
    "Dataset",
    "DatasetSchema",
    "EvalReport",
    "FeatureSpec",
    "FuzzyNaiveBayesClassifier",
    "MODEL_REGISTRY",
    "SplitSpec",
    "WeightedScoringClassifier",
    "compute_metrics",
    "format_report",
    "impute",
    "load_dataset",
    "make_student_dataset",
    "run_benchmark",
    "split",
]

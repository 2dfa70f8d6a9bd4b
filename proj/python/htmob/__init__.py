"""Relevance ratio and head/tail breaks analysis of human mobility data."""

from htmob._core import (
    ConfigError,
    ContractViolation,
    FormatError,
    HtmobError,
    IoError,
    __version__,
    ccdf,
    classify,
    cohort_summary,
    head_tail_breaks,
    kmeans_1d,
    rand_index,
    relevance,
    run_cli,
    spearman,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "FormatError",
    "HtmobError",
    "IoError",
    "__version__",
    "ccdf",
    "classify",
    "cohort_summary",
    "head_tail_breaks",
    "kmeans_1d",
    "rand_index",
    "relevance",
    "run_cli",
    "spearman",
]

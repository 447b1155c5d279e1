"""Argument-to-key-point matching toolkit.

Builds gold-labeled (argument, key point) datasets from raw crowd
judgments, scores candidate pairs (native tf-idf or external score
files), selects matches under four policies with learned thresholds,
and evaluates with cross-topic cross-validation.
"""

__version__ = "0.1.0"

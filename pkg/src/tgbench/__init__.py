"""Benchmark harness for anomaly-emergence detection on temporal interaction graphs."""

__version__ = "0.1.0"

"""Benchmark harness: declarative experiment configs, seeded trials, CSV/JSON reports."""

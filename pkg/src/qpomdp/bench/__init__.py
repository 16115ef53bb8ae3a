"""Benchmark generators, random corpora and the results-table harness."""

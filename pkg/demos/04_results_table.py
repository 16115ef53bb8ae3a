"""Regenerate the benchmark results table (about a quarter of a minute).

Pass row prefixes to restrict it, e.g. ``python3 demos/04_results_table.py grid maze/C``.
"""
import sys

from qpomdp.bench.suite import run_suite, to_text

selection = sys.argv[1:] or None
results = run_suite(selection)
print(to_text(results))

for r in results:
    want = r.spec.expected_states
    off = 100 * (r.states - want) / want
    flag = "" if r.states == want else f"  ({off:+.1f}% vs published {want})"
    print(f"{r.spec.name:28s} product {r.product_states:6d}, largest support {r.max_support}{flag}")

"""Walk through the whole pipeline on a two-state toy model.

Run with ``python3 demos/01_straddle_walkthrough.py``.
"""
from qpomdp import ingest
from qpomdp.bench import tiny
from qpomdp.model import reachable_belief_supports
from qpomdp.policy import export
from qpomdp.product import build, dump
from qpomdp.solve import almost_sure_win, solve
from qpomdp.verify import check, simulate

# x is absorbing with priority 2, y flips a coin between x and y and has
# priority 1.  Both states look alike, and we start unsure which one we are in.
m = tiny.straddle()
print(ingest.write(m))

# the controller only ever knows the belief-support {x, y}
print("belief-supports:", [sorted(m.state_names[s] for s in y) for y in reachable_belief_supports(m)])

# the belief product pairs each support with a claim about which states are recurrent
prod = build(m)
print(dump(prod))
sol = almost_sure_win(prod)
print("verdict on the product:", sol.verdict)

# the full pipeline also normalizes priorities and applies the coBuchi reduction
result = solve(m)
print("reduction used:", result.reduction)
print(export(result.policy, result.analyzed))
print(result.certificate.to_text(result.analyzed, result.policy))

# a certificate is exact; simulation is only a sanity check
stats = simulate(result.analyzed, result.policy, steps=100, episodes=1000, seed=1)
print("tail minimum priorities:", dict(stats.tail_min_counts()))
print("re-checked certificate:", check(result.analyzed, result.policy).verdict)

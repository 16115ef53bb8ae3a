"""Robot-planning objectives on a grid maze where only areas A-D are visible.

Each objective is compiled into a small parity automaton, multiplied with the
maze, reduced, and solved.
"""
from qpomdp.bench.navigation import maze
from qpomdp.bench.suite import NAV_OBJECTIVES, TABLE_READS
from qpomdp.objective import ObjectiveSpec
from qpomdp.solve import solve

m = maze("C")
print(f"maze C: {m.n_states} states, observations {m.obs_names}")

for kind, (regions, avoid) in NAV_OBJECTIVES.items():
    spec = ObjectiveSpec(kind, regions, avoid)
    dpa = spec.to_automaton(set(m.labels))
    r = solve(m, spec, reads=TABLE_READS)
    print(f"{kind:17s} automaton {dpa.n_states} states | product model {r.model.n_states:4d} "
          f"| after reduction {r.analyzed.n_states:4d} ({r.reduction}) "
          f"| belief product {r.product.n_states():5d} | {r.verdict}")

# the same automaton can be written out as an explicit .qobj file
from qpomdp.objective import write_objective
print(write_objective(ObjectiveSpec(automaton=ObjectiveSpec("liveness", (("goal", ("D",)),)).to_automaton())))

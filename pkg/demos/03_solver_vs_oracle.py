"""Compare the polynomial solver with brute-force policy enumeration.

The oracle tries every observation-based controller with up to three memory
states, so it only works on tiny models; it is the yardstick for how much
the solver's restricted policy class gives up.
"""
import time

import numpy as np

from qpomdp.bench.corpus import random_pomdp
from qpomdp.oracle import PolicyClassSpec, decide
from qpomdp.solve import ALMOST_SURE, solve

spec = PolicyClassSpec(memory=3)
table = np.zeros((2, 2), dtype=int)   # rows: solver no/yes, columns: oracle no/yes
t_solver = t_oracle = 0.0
for seed in range(200):
    m = random_pomdp(seed)
    t0 = time.perf_counter()
    s = solve(m).verdict == ALMOST_SURE
    t1 = time.perf_counter()
    o = decide(m, spec).yes
    t2 = time.perf_counter()
    t_solver += t1 - t0
    t_oracle += t2 - t1
    table[int(s), int(o)] += 1

print("            oracle NO  oracle YES")
print(f"solver NO   {table[0, 0]:9d}  {table[0, 1]:10d}")
print(f"solver YES  {table[1, 0]:9d}  {table[1, 1]:10d}")
print(f"agreement {np.trace(table) / table.sum():.1%}; "
      f"solver {t_solver:.2f}s, oracle {t_oracle:.2f}s")

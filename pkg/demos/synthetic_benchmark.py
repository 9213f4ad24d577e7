"""Closed-form weights against a constant-weight baseline on random graphs.

For every edge count, random connected graphs with U(0, 1) weights are
drawn and GMRF samples generated from each. Two quick constructions on the
true topology are scored: relative Frobenius error to the ground truth
(after the best scalar rescaling) and the objective gap to the iterative
optimum. Pass --full for the 64-node, 500-graph configuration (slow).
"""

import sys
import time

from lapfit import BenchConfig, run_benchmark

config = BenchConfig.large_scale() if "--full" in sys.argv else BenchConfig()

t0 = time.perf_counter()
rows = run_benchmark(config, workers=0)
print(f"n={config.n}, {config.graphs_per_point} graphs per point, N={config.samples} "
      f"({time.perf_counter() - t0:.1f}s)\n")
print(" m/n   RE closed  RE const   gap closed  gap const")
for r in rows:
    print(f"{r['m_over_n']:4.2f}   {r['mean_re_cf']:8.3f}  {r['mean_re_const']:8.3f}   "
          f"{r['mean_jgap_cf']:9.3f}  {r['mean_jgap_const']:9.3f}")

"""Learn weights on a tree from GMRF samples and compare with the iterative solver.

On a spanning tree the optimal weight of edge (s, t) only depends on the
mean squared difference of the two endpoint signals, so no optimization is
needed. This script draws samples from a random weighted tree, estimates
the weights both ways and prints how close they are to each other and to
the ground truth.
"""

import time

import numpy as np

from lapfit import build_K, random_connected_graph, sample_gmrf, solve_acyclic_cgl, solve_cgl
from lapfit.graph import assemble_laplacian

rng = np.random.default_rng(0)
n, N, alpha = 30, 2000, 0.0

topology, u_true = random_connected_graph(n, n - 1, rng)
x = sample_gmrf(assemble_laplacian(topology, u_true), N, rng)

t0 = time.perf_counter()
closed = solve_acyclic_cgl(x, topology, alpha)
t1 = time.perf_counter()
iterative = solve_cgl(build_K(x, alpha), topology, u0=np.ones(n - 1))
t2 = time.perf_counter()

print(f"closed form: {1e3 * (t1 - t0):.2f} ms, iterative: {1e3 * (t2 - t1):.1f} ms "
      f"({iterative.iterations} Newton steps)")
print(f"max |closed - iterative| = {np.max(np.abs(closed.u - iterative.u)):.2e}")
print(f"relative error to the true weights: "
      f"{np.linalg.norm(closed.u - u_true) / np.linalg.norm(u_true):.3f}")

print("\n edge     true  estimate")
for (s, t), a, b in list(zip(topology.edges, u_true, closed.u))[:8]:
    print(f"({s:2d},{t:2d})  {a:6.3f}  {b:8.3f}")

"""How far are closed-form weights from optimal once the graph has cycles?

The edge-wise formula is no longer exact on cyclic graphs. Given the true
optimum, the objective gap of the closed form is bounded by a quantity built
from the weight ratios u*/u on a spanning tree and on the extra edges. This
script sweeps the number of extra edges and prints the gap and both bounds.
"""

import numpy as np

from lapfit import build_K, closed_form_weights, compute_bound, random_connected_graph, sample_gmrf, solve_cgl
from lapfit.graph import assemble_laplacian

rng = np.random.default_rng(1)
n, N = 16, 400

print("   m  gap      tight    loose    beta")
for m in (15, 17, 20, 24, 32, 40, 48):
    topology, u_true = random_connected_graph(n, m, rng)
    x = sample_gmrf(assemble_laplacian(topology, u_true), N, rng)
    K = build_K(x)
    opt = solve_cgl(K, topology)
    rep = compute_bound(closed_form_weights(x, topology), opt.u, topology, K)
    print(f"{m:4d}  {rep.gap:7.4f}  {rep.bound_tight:7.4f}  {rep.bound_loose:7.4f}  {rep.beta:.3f}")

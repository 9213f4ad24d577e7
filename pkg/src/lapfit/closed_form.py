"""Closed-form Laplacian weights for acyclic topologies.

On a connected tree the optimal weight of edge ``(s, t)`` is::

    w_st = 1 / ( mean_i (x_i[s] - x_i[t])^2 + 2 alpha )

which needs one pass over the samples and no matrix at all. The same
expression applied edge-wise to a cyclic topology gives the approximate
weights whose suboptimality :mod:`lapfit.bound` certifies.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateEdge, DegenerateLoop, NotAcyclic, NotConnected
from .graph import GraphTopology, WeightedLaplacian, classify_structure
from .objective import as_samples, edge_quadratic

LOOP_FORMS = ("k_matrix", "sample")


def mean_square_differences(samples, topology: GraphTopology) -> np.ndarray:
    x = as_samples(samples)
    if x.shape[1] != topology.n:
        raise ValueError(f"samples have length {x.shape[1]}, topology has {topology.n} vertices")
    diff = x[:, topology.sources] - x[:, topology.targets]
    return np.mean(diff * diff, axis=0)


def _invert_denominators(denom: np.ndarray, topology: GraphTopology | None = None) -> np.ndarray:
    bad = np.flatnonzero(denom <= 0)
    if bad.size:
        j = int(bad[0])
        where = f"edge {topology.edges[j]}" if topology is not None else f"edge {j}"
        raise DegenerateEdge(
            f"{where} has zero mean squared difference with alpha = 0; "
            "its weight would be infinite (use alpha > 0)"
        )
    return 1.0 / denom


def closed_form_weights(samples, topology: GraphTopology, alpha: float = 0.0) -> np.ndarray:
    """Edge-wise closed-form weights on any topology (no structure check)."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    d = mean_square_differences(samples, topology)
    return _invert_denominators(d + 2.0 * alpha, topology)


def closed_form_weights_from_K(K, topology: GraphTopology) -> np.ndarray:
    """The same weights written as ``1 / (xi_j^T K xi_j)``."""
    return _invert_denominators(edge_quadratic(K, topology), topology)


def _require_tree(topology: GraphTopology) -> None:
    st = classify_structure(topology)
    if not st.connected:
        raise NotConnected(f"topology has {st.components} connected components")
    if not st.acyclic:
        raise NotAcyclic("topology contains a cycle")


def solve_acyclic_cgl(samples, topology: GraphTopology, alpha: float = 0.0) -> WeightedLaplacian:
    """Optimal combinatorial Laplacian on a connected tree.

    Raises
    ------
    NotConnected, NotAcyclic
        If the topology is not a spanning tree.
    DegenerateEdge
        If ``alpha == 0`` and some edge has identical endpoint values in
        every sample.
    """
    if topology.self_loops:
        raise ValueError("self-loops present; use solve_acyclic_ggl")
    _require_tree(topology)
    return WeightedLaplacian(topology, closed_form_weights(samples, topology, alpha))


def solve_acyclic_ggl(
    samples, topology: GraphTopology, alpha: float = 0.0, loop_form: str = "k_matrix"
) -> WeightedLaplacian:
    """Optimal generalized Laplacian on a tree with exactly one self-loop.

    Edge weights are the tree closed form. The loop weight at vertex ``k``
    depends on ``loop_form``:

    ``"k_matrix"``
        ``1 / (e_k^T K e_k)`` with the combinatorial ``K`` (which carries the
        ``11^T/n`` term), i.e. ``1 / (S_kk + 1/n)``.
    ``"sample"``
        ``1 / S_kk = 1 / mean_i x_i[k]^2``.

    Each form is the stationary point of ``-log det(L) + trace(L K)`` for
    its own ``K``: the first for ``S + alpha(I - 11^T) + 11^T/n``, the second
    for ``S + alpha(I - 11^T)``.
    """
    if loop_form not in LOOP_FORMS:
        raise ValueError(f"loop_form must be one of {LOOP_FORMS}")
    if len(topology.self_loops) != 1:
        raise ValueError(f"expected exactly one self-loop, got {len(topology.self_loops)}")
    _require_tree(topology)
    x = as_samples(samples)
    u = closed_form_weights(x, topology, alpha)
    k = topology.self_loops[0]
    skk = float(np.mean(x[:, k] ** 2))
    denom = skk + 1.0 / topology.n if loop_form == "k_matrix" else skk
    if denom <= 0:
        raise DegenerateLoop(f"vertex {k} is identically zero; loop weight would be infinite")
    v = np.zeros(topology.n)
    v[k] = 1.0 / denom
    return WeightedLaplacian(topology, u, v)


def learn_line_graph(rows, alpha: float = 0.0, symmetric: bool = False) -> WeightedLaplacian:
    """Path-graph weights from 1-D segments (one per row of ``rows``).

    ``d_k`` is the mean squared difference between positions ``k`` and
    ``k + 1``. In symmetric mode ``d`` is averaged with its mirror image
    first, so the weights read the same from either end.
    """
    r = as_samples(rows)
    n = r.shape[1]
    if n < 2:
        raise ValueError("segments must have length >= 2")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    diff = np.diff(r, axis=1)
    d = np.mean(diff * diff, axis=0)
    if symmetric:
        d = (d + d[::-1]) / 2.0
    topology = GraphTopology.path(n)
    return WeightedLaplacian(topology, _invert_denominators(d + 2.0 * alpha, topology))


def extract_image_lines(image, block: int, axis: str = "rows") -> np.ndarray:
    """Row or column segments of every full ``block x block`` tile.

    Partial tiles at the right and bottom borders are dropped. Returns an
    array of shape ``(N, block)``.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if axis not in ("rows", "columns"):
        raise ValueError("axis must be 'rows' or 'columns'")
    h, w = img.shape
    if block < 1 or block > h or block > w:
        raise ValueError(f"block {block} does not fit a {h}x{w} image")
    th, tw = h // block, w // block
    tiles = img[: th * block, : tw * block].reshape(th, block, tw, block)
    if axis == "rows":
        lines = tiles.transpose(0, 2, 1, 3)
    else:
        lines = tiles.transpose(0, 2, 3, 1)
    return np.ascontiguousarray(lines.reshape(-1, block))

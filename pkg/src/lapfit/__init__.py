"""Graph Laplacian weight estimation under a fixed topology.

Closed-form optimal weights on trees, an iterative reference solver and a
certified suboptimality bound for cyclic graphs, GMRF benchmarking, and
edge-adaptive image denoising built on the same weights.
"""

from .bound import BoundReport, compute_bound, determinant_lemma, select_positive_spanning_tree
from .closed_form import (
    closed_form_weights,
    extract_image_lines,
    learn_line_graph,
    solve_acyclic_cgl,
    solve_acyclic_ggl,
)
from .denoise import (
    DenoiseParams,
    add_gaussian_noise,
    build_denoise_graph,
    denoise,
    estimate_noise_sigma,
    filter_image,
    psnr,
)
from .errors import (
    DegenerateEdge,
    DegenerateLoop,
    DimensionMismatch,
    ImageTooSmall,
    LapfitError,
    MalformedHeader,
    NoPositiveSpanningTree,
    NotAcyclic,
    NotConnected,
    NotPositiveDefinite,
    TruncatedData,
)
from .gmrf import BenchConfig, random_connected_graph, run_benchmark, sample_gmrf, spectral_decomposition
from .graph import GraphTopology, WeightedLaplacian, assemble_laplacian, build_incidence, classify_structure
from .objective import RegularizedCovariance, build_K, gradient_J, objective_J
from .solver import SolverConfig, SolverResult, solve_cgl

__version__ = "0.1.0"

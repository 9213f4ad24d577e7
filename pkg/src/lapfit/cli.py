"""Command-line interface: ``lapfit <subcommand> [options]``.

Exit status is 0 on success, 2 on usage errors and 1 when a computation
fails (the error class and message go to stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import io as lio
from .bound import compute_bound
from .closed_form import (
    LOOP_FORMS,
    closed_form_weights,
    extract_image_lines,
    learn_line_graph,
    solve_acyclic_cgl,
    solve_acyclic_ggl,
)
from .denoise import TOPOLOGIES, WEIGHT_KINDS, denoise, denoise_benchmark, estimate_noise_sigma
from .errors import LapfitError
from .gmrf import BenchConfig, run_benchmark, sample_gmrf
from .graph import WeightedLaplacian
from .objective import build_K
from .solver import METHODS, SolverConfig, solve_cgl

BENCH_COLUMNS = ["m", "m_over_n", "mean_re_cf", "std_re_cf", "mean_re_const", "mean_jgap_cf", "mean_jgap_const"]


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.phases: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        yield
        self.phases[name] = round(1000.0 * (time.perf_counter() - start), 3)

    def report(self):
        return self.phases if self.enabled else None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _threads() -> int | None:
    raw = os.environ.get("LF_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise LapfitError(f"LF_THREADS must be an integer, got {raw!r}") from None
    return None if value <= 0 else value


def _load_problem(args):
    x = lio.read_samples_csv(args.samples)
    topology, _, _ = lio.read_edge_list(args.topology)
    if x.shape[1] != topology.n:
        raise LapfitError(f"samples have {x.shape[1]} columns but the topology has {topology.n} vertices")
    return x, topology


def _solver_config(args) -> SolverConfig:
    return SolverConfig(grad_tol=args.tol, max_iters=args.max_iters, method=args.method)


def cmd_learn_tree(args, timer):
    with timer.phase("read"):
        x, topology = _load_problem(args)
    with timer.phase("solve"):
        if topology.self_loops:
            lap = solve_acyclic_ggl(x, topology, args.alpha, loop_form=args.loop_form)
        else:
            lap = solve_acyclic_cgl(x, topology, args.alpha)
    lio.write_edge_list(args.out, lap)
    result = {"u": lap.u.tolist()}
    if lap.v is not None:
        result["v"] = lap.v.tolist()
    inputs = {"samples_shape": list(x.shape), "n": topology.n, "m": topology.m, "alpha": args.alpha}
    return lio.RunReport("learn-tree", inputs, result, timer.report())


def cmd_learn_line(args, timer):
    with timer.phase("read"):
        image = lio.read_pgm(args.image)
    with timer.phase("solve"):
        rows = extract_image_lines(image, args.block, args.axis)
        lap = learn_line_graph(rows, args.alpha, args.symmetric)
    lio.write_edge_list(args.out, lap)
    inputs = {"image_shape": list(image.shape), "block": args.block, "axis": args.axis, "segments": rows.shape[0]}
    return lio.RunReport("learn-line", inputs, {"u": lap.u.tolist()}, timer.report())


def cmd_solve(args, timer):
    with timer.phase("read"):
        x, topology = _load_problem(args)
    with timer.phase("solve"):
        K = build_K(x, args.alpha, center=args.center)
        res = solve_cgl(K, topology, _solver_config(args))
    lio.write_edge_list(args.out, res.laplacian)
    result = {
        "J": res.J,
        "iterations": res.iterations,
        "converged": res.converged,
        "grad_inf_norm": res.grad_inf_norm,
    }
    inputs = {"samples_shape": list(x.shape), "n": topology.n, "m": topology.m, "alpha": args.alpha}
    return lio.RunReport("solve", inputs, result, timer.report())


def cmd_bound(args, timer):
    with timer.phase("read"):
        x, topology = _load_problem(args)
    with timer.phase("solve"):
        K = build_K(x, args.alpha, center=args.center)
        u_cf = closed_form_weights(x, topology, args.alpha)
        res = solve_cgl(K, topology, _solver_config(args))
    with timer.phase("bound"):
        report = compute_bound(u_cf, res.u, topology, K)
    result = report.to_dict()
    result["solver_converged"] = res.converged
    inputs = {"samples_shape": list(x.shape), "n": topology.n, "m": topology.m, "alpha": args.alpha}
    return lio.RunReport("bound", inputs, result, timer.report())


def cmd_synth_bench(args, timer):
    config = BenchConfig(
        n=args.n,
        edge_counts=tuple(args.m_list),
        graphs_per_point=args.graphs,
        samples=args.samples,
        alpha=args.alpha,
        seed=args.seed,
    )
    with timer.phase("benchmark"):
        rows = run_benchmark(config, workers=_threads())
    lio.write_rows_csv(args.out, rows, BENCH_COLUMNS)
    inputs = {"n": args.n, "m_list": args.m_list, "graphs": args.graphs, "samples": args.samples,
              "alpha": args.alpha, "seed": args.seed}
    return lio.RunReport("synth-bench", inputs, {"rows": rows}, timer.report())


def cmd_sample_gmrf(args, timer):
    topology, u, v = lio.read_edge_list(args.laplacian)
    if u is None:
        raise LapfitError("the Laplacian edge list must carry weights")
    lap = WeightedLaplacian(topology, u, v)
    with timer.phase("sample"):
        x = sample_gmrf(lap, args.count, args.seed)
    lio.write_samples_csv(args.out, x)
    inputs = {"n": topology.n, "m": topology.m, "count": args.count, "seed": args.seed}
    return lio.RunReport("sample-gmrf", inputs, {"samples_shape": list(x.shape)}, timer.report())


def cmd_denoise(args, timer):
    image = lio.read_pgm(args.input)
    with timer.phase("filter"):
        sigma_n = args.sigma_n if args.sigma_n is not None else estimate_noise_sigma(image)
        out, params = denoise(image, args.topology, args.weights, sigma_n, sigma_d=args.sigma_d)
    lio.write_pgm(args.out, out)
    result = {"sigma_n": sigma_n, "sigma_d": params.sigma_d, "sigma_r": params.sigma_r, "alpha": params.alpha}
    inputs = {"image_shape": list(image.shape), "weights": args.weights, "topology": args.topology}
    return lio.RunReport("denoise", inputs, result, timer.report())


def cmd_denoise_bench(args, timer):
    clean = lio.read_pgm(args.clean)
    with timer.phase("benchmark"):
        rows = denoise_benchmark(clean, args.sigmas, args.seed, args.topologies)
    columns = ["sigma", "sigma_est", "noisy"] + [f"{t}_{k}" for t in args.topologies for k in WEIGHT_KINDS]
    lio.write_rows_csv(args.report, rows, columns)
    inputs = {"image_shape": list(clean.shape), "sigmas": args.sigmas, "seed": args.seed}
    return lio.RunReport("denoise-bench", inputs, {"rows": rows}, timer.report())


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=SolverConfig.grad_tol, help="projected-gradient tolerance")
    p.add_argument("--max-iters", type=int, default=SolverConfig.max_iters)
    p.add_argument("--method", choices=METHODS, default=SolverConfig.method)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapfit", description="Graph Laplacian weight estimation under a fixed topology.")
    parser.add_argument("--timing", action="store_true", help="record wall-clock phase timings in JSON reports")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)

    p = sub.add_parser("learn-tree", help="closed-form weights on a tree topology")
    p.add_argument("--samples", required=True, help="CSV, one sample per row")
    p.add_argument("--topology", required=True, help="edge list")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--loop-form", choices=LOOP_FORMS, default="k_matrix")
    p.add_argument("--out", required=True, help="output weighted edge list")
    p.add_argument("--report", help="optional JSON report")
    p.set_defaults(func=cmd_learn_tree)

    p = sub.add_parser("learn-line", help="line-graph weights from image blocks")
    p.add_argument("--image", required=True, help="binary PGM")
    p.add_argument("--block", type=int, default=8)
    p.add_argument("--axis", choices=("rows", "columns"), default="rows")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_learn_line)

    p = sub.add_parser("solve", help="iterative optimum on any connected topology")
    p.add_argument("--samples", required=True)
    p.add_argument("--topology", required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--center", action="store_true", help="subtract the sample mean before forming S")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bound", help="suboptimality bound of closed-form weights")
    p.add_argument("--samples", required=True)
    p.add_argument("--topology", required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--center", action="store_true")
    _add_solver_flags(p)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("synth-bench", help="random-graph benchmark (CSV)")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--m-list", type=_int_list, default=[15, 20, 24, 32, 40])
    p.add_argument("--graphs", type=int, default=50)
    p.add_argument("--samples", type=int, default=800)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_synth_bench)

    p = sub.add_parser("sample-gmrf", help="draw signals from N(0, L^+)")
    p.add_argument("--laplacian", required=True, help="weighted edge list")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_sample_gmrf)

    p = sub.add_parser("denoise", help="edge-adaptive graph filtering of a PGM image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--weights", choices=WEIGHT_KINDS, default="cgl")
    p.add_argument("--topology", choices=TOPOLOGIES, default="3x3")
    p.add_argument("--sigma-n", type=float, help="noise level (estimated if omitted)")
    p.add_argument("--sigma-d", type=float, default=3.0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("denoise-bench", help="PSNR table over noise levels and topologies")
    p.add_argument("--clean", required=True)
    p.add_argument("--sigmas", type=_float_list, default=[15.0, 20.0, 25.0, 30.0])
    p.add_argument("--seed", type=int, default=9)
    p.add_argument("--topologies", type=lambda s: s.split(","), default=list(TOPOLOGIES))
    p.add_argument("--report", required=True, help="output CSV")
    p.set_defaults(func=cmd_denoise_bench, json_report=None)
    return parser


_SEEDED = {"synth-bench", "sample-gmrf", "denoise-bench"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command in _SEEDED:
        print(f"seed={args.seed}", file=sys.stderr)
    timer = _Timer(args.timing)
    try:
        report = args.func(args, timer)
        json_path = getattr(args, "json_report", getattr(args, "report", None))
        if json_path:
            report.write(json_path)
    except (LapfitError, OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"lapfit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

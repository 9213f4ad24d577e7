"""Reference optimizer for the weight-estimation problem on any connected topology.

Minimizes ``J(u)`` over ``u >= u_floor`` by projected descent with Armijo
backtracking along the projection arc. Two directions are available:

``"newton"`` (default)
    Two-metric projected Newton: Newton step on the free weights using the
    exact Hessian ``H_jk = (xi_j^T M^{-1} xi_k)^2`` with ``M = L + 11^T/n``,
    scaled gradient steps on weights held at the floor.
``"gradient"``
    Plain projected gradient with the same line search. Slow on
    ill-conditioned instances; kept as the simplest verifiable variant.

The iteration is deterministic given its inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NotConnected, NotPositiveDefinite
from .graph import (
    GraphTopology,
    WeightedLaplacian,
    assemble_laplacian,
    build_incidence,
    classify_structure,
)
from .objective import _kmatrix, cholesky_checked, edge_quadratic, objective_J

METHODS = ("newton", "gradient")


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50000
    grad_tol: float = 1e-9
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    u_floor: float = 1e-12
    method: str = "newton"
    max_backtracks: int = 80

    def __post_init__(self):
        if self.max_iters < 1 or self.max_backtracks < 1:
            raise ValueError("iteration limits must be positive")
        if not (self.grad_tol > 0 and self.step_init > 0 and self.u_floor > 0):
            raise ValueError("grad_tol, step_init and u_floor must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


@dataclass(frozen=True)
class SolverResult:
    """Outcome of :func:`solve_cgl`.

    ``laplacian`` reports weights pinned at the floor as exactly zero;
    ``u_iterate`` is the raw final iterate.
    """

    laplacian: WeightedLaplacian
    u_iterate: np.ndarray
    J: float
    iterations: int
    converged: bool
    grad_inf_norm: float
    history: list[float] = field(repr=False, default_factory=list)

    @property
    def u(self) -> np.ndarray:
        return self.laplacian.u

    @property
    def inactive(self) -> np.ndarray:
        return self.laplacian.u == 0.0


class _Problem:
    def __init__(self, K, topology: GraphTopology):
        self.topology = topology
        self.n = topology.n
        self.c = edge_quadratic(K, topology)
        self.xi = build_incidence(topology)

    def factor(self, u):
        """Cholesky factor ``C`` of ``M`` and ``Y = C^{-1} Xi``."""
        M = assemble_laplacian(self.topology, u) + 1.0 / self.n
        C = cholesky_checked(M)
        Y = scipy.linalg.solve_triangular(C, self.xi, lower=True, check_finite=False)
        return C, Y

    def value(self, u, C) -> float:
        return -2.0 * float(np.sum(np.log(np.diag(C)))) + float(self.c @ u)

    def decrement(self, Y, du) -> float:
        """``J(u + du) - J(u)`` without cancellation against ``J`` itself.

        ``log det(M + Xi diag(du) Xi^T) - log det M`` is the sum of
        ``log1p`` over the eigenvalues of ``Y diag(du) Y^T``.
        """
        A = (Y * du) @ Y.T
        lam = np.linalg.eigvalsh(0.5 * (A + A.T))
        if lam.min() <= -1.0:
            return np.inf
        return float(self.c @ du) - float(np.sum(np.log1p(lam)))

    def try_factor(self, u):
        try:
            return self.factor(u)
        except NotPositiveDefinite:
            return None, None


def projected_gradient(u, g, floor) -> np.ndarray:
    """Gradient with components removed where the floor constraint is active."""
    return np.where(u <= floor, np.minimum(g, 0.0), g)


def _newton_direction(Y, u, g, floor):
    eps = min(1e-6, float(np.linalg.norm(u - np.maximum(u - g, floor))))
    active = (u <= floor + eps) & (g > 0)
    free = np.flatnonzero(~active)
    d = np.zeros_like(u)
    if active.any():
        ia = np.flatnonzero(active)
        hdiag = np.sum(Y[:, ia] ** 2, axis=0) ** 2
        d[ia] = -g[ia] / hdiag
    if free.size:
        Yf = Y[:, free]
        H = (Yf.T @ Yf) ** 2
        gf = g[free]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                p = scipy.linalg.solve(H, gf, assume_a="pos", check_finite=False)
            if not np.all(np.isfinite(p)) or gf @ p <= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            p = gf / np.diag(H)
        d[free] = -p
    return d, free, active


def solve_cgl(K, topology: GraphTopology, config: SolverConfig | None = None, u0=None) -> SolverResult:
    """Minimize ``J(u)`` over the edge weights of a connected topology.

    Parameters
    ----------
    K : RegularizedCovariance or ndarray
        The regularized covariance.
    topology : GraphTopology
        Must be connected.
    config : SolverConfig, optional
    u0 : array-like, optional
        Starting weights; defaults to the closed-form ``1 / (xi_j^T K xi_j)``.

    Returns
    -------
    SolverResult
        ``converged`` is False when ``max_iters`` ran out or the line search
        stalled before the projected-gradient tolerance was met; the best
        iterate is returned either way.
    """
    cfg = config or SolverConfig()
    Km = _kmatrix(K)
    if Km.shape != (topology.n, topology.n):
        raise ValueError("K does not match the topology size")
    st = classify_structure(topology)
    if not st.connected:
        raise NotConnected(f"topology has {st.components} connected components")
    prob = _Problem(Km, topology)
    floor = cfg.u_floor

    if u0 is None:
        with np.errstate(divide="ignore"):
            u = np.where(prob.c > 0, 1.0 / np.where(prob.c > 0, prob.c, 1.0), 1.0)
    else:
        u = np.array(u0, dtype=float)
        if u.shape != (topology.m,):
            raise ValueError(f"u0 must have length {topology.m}")
    u = np.maximum(u, floor)
    C, Y = prob.factor(u)
    f = prob.value(u, C)
    history = [f]
    converged = False
    gnorm = np.inf
    step_carry = cfg.step_init

    it = 0
    for it in range(cfg.max_iters + 1):
        g = prob.c - np.sum(Y * Y, axis=0)
        gnorm = float(np.max(np.abs(projected_gradient(u, g, floor)), initial=0.0))
        if gnorm < cfg.grad_tol:
            converged = True
            break
        if it == cfg.max_iters:
            break

        if cfg.method == "newton":
            d, free, active = _newton_direction(Y, u, g, floor)
            step = cfg.step_init
        else:
            d = -g
            free, active = np.arange(topology.m), np.zeros(topology.m, dtype=bool)
            step = step_carry

        accepted = False
        for _ in range(cfg.max_backtracks):
            u_new = np.maximum(u + step * d, floor)
            C_new, Y_new = prob.try_factor(u_new)
            df = prob.decrement(Y, u_new - u) if C_new is not None else np.inf
            if cfg.method == "newton":
                pred = step * float(g[free] @ -d[free]) + float(g[active] @ (u[active] - u_new[active]))
            else:
                pred = float(g @ (u - u_new))
            if df <= 0 and -df >= cfg.armijo_c * pred:
                accepted = True
                break
            step *= cfg.backtrack_factor
        if not accepted:
            break
        if cfg.method == "gradient":
            step_carry = min(cfg.step_init * 1e12, step / cfg.backtrack_factor)
        assert df <= 0
        u, C, Y = u_new, C_new, Y_new
        f = prob.value(u, C)
        history.append(f)

    reported = np.where(u <= floor, 0.0, u)
    lap = WeightedLaplacian(topology, reported)
    try:
        J = objective_J(lap, Km)
    except NotPositiveDefinite:
        J = f
    return SolverResult(
        laplacian=lap,
        u_iterate=u,
        J=J,
        iterations=it,
        converged=converged,
        grad_inf_norm=gnorm,
        history=history,
    )

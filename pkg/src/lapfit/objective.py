"""Regularized covariance and the log-det objective in edge-weight form.

For a combinatorial Laplacian ``L`` on a fixed topology the estimation
objective is::

    J(L) = -log det(L + 11^T/n) + trace(L K),
    K    = S + alpha (I - 11^T) + 11^T/n,

where ``S`` is the (uncentred) sample covariance. With ``L = sum_j u_j
xi_j xi_j^T`` the trace term is linear in ``u`` with coefficients
``xi_j^T K xi_j``, which are cached instead of forming ``L K``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite
from .graph import GraphTopology, WeightedLaplacian, assemble_laplacian, build_incidence

PIVOT_RTOL = 1e-12


def as_samples(samples) -> np.ndarray:
    """Validate a sample array of shape ``(N, n)`` (one signal per row)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"samples must have shape (N, n) with N, n >= 1; got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    return x


def sample_covariance(samples, center: bool = False) -> np.ndarray:
    """``S = (1/N) sum_i x_i x_i^T``; the mean is removed only if ``center``."""
    x = as_samples(samples)
    if center:
        x = x - x.mean(axis=0)
    return x.T @ x / x.shape[0]


@dataclass(frozen=True)
class RegularizedCovariance:
    """``K = S + alpha (I - 11^T) + 11^T / n`` together with its ingredients."""

    K: np.ndarray
    S: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @classmethod
    def from_covariance(cls, S, alpha: float = 0.0) -> "RegularizedCovariance":
        S = np.array(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("covariance must be square")
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        n = S.shape[0]
        ones = np.ones((n, n))
        K = S + alpha * (np.eye(n) - ones) + ones / n
        K = 0.5 * (K + K.T)
        return cls(K=K, S=S, alpha=float(alpha))


def build_K(samples, alpha: float = 0.0, center: bool = False) -> RegularizedCovariance:
    return RegularizedCovariance.from_covariance(sample_covariance(samples, center), alpha)


def _kmatrix(K) -> np.ndarray:
    return K.K if isinstance(K, RegularizedCovariance) else np.asarray(K, dtype=float)


def edge_quadratic(K, topology: GraphTopology) -> np.ndarray:
    """``xi_j^T K xi_j = K_ss + K_tt - 2 K_st`` for every edge."""
    K = _kmatrix(K)
    s, t = topology.sources, topology.targets
    return K[s, s] + K[t, t] - 2.0 * K[s, t]


def cholesky_checked(M: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising NotPositiveDefinite on tiny pivots."""
    scale = max(float(np.trace(M)), np.finfo(float).tiny)
    try:
        C = scipy.linalg.cholesky(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    pivots = np.diag(C) ** 2
    if not np.all(np.isfinite(pivots)) or pivots.min() < PIVOT_RTOL * scale:
        raise NotPositiveDefinite(
            f"smallest Cholesky pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * trace"
        )
    return C


def logdet_spd(M: np.ndarray) -> float:
    C = cholesky_checked(M)
    return 2.0 * float(np.sum(np.log(np.diag(C))))


def _shifted(lap: WeightedLaplacian) -> np.ndarray:
    n = lap.n
    return lap.matrix() + np.full((n, n), 1.0 / n)


def _trace_term(lap: WeightedLaplacian, K) -> float:
    Km = _kmatrix(K)
    val = float(lap.u @ edge_quadratic(Km, lap.topology))
    if lap.v is not None:
        val += float(lap.v @ np.diag(Km))
    return val


def objective_J(lap: WeightedLaplacian, K) -> float:
    """``-log det(L + 11^T/n) + trace(L K)``."""
    return -logdet_spd(_shifted(lap)) + _trace_term(lap, K)


def edge_resistance(C: np.ndarray, topology: GraphTopology) -> np.ndarray:
    """``xi_j^T M^{-1} xi_j`` for every edge, given the lower Cholesky factor of ``M``.

    Computed as ``||C^{-1} xi_j||^2`` by one triangular solve per edge,
    which is more accurate than differencing entries of ``M^{-1}``.
    """
    Y = scipy.linalg.solve_triangular(C, build_incidence(topology), lower=True, check_finite=False)
    return np.sum(Y * Y, axis=0)


def gradient_J(lap: WeightedLaplacian, K) -> np.ndarray:
    """Partial derivatives of ``J`` with respect to the edge weights.

    ``dJ/du_j = -xi_j^T (L + 11^T/n)^{-1} xi_j + xi_j^T K xi_j``.
    """
    C = cholesky_checked(_shifted(lap))
    return edge_quadratic(K, lap.topology) - edge_resistance(C, lap.topology)


def objective_ggl(lap: WeightedLaplacian, K) -> float:
    """Generalized-Laplacian objective ``-log det(L) + trace(L K)``.

    ``L`` must be nonsingular (self-loops present); no ``11^T/n`` shift is
    applied.
    """
    return -logdet_spd(lap.matrix()) + _trace_term(lap, K)


def gradient_ggl(lap: WeightedLaplacian, K) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of :func:`objective_ggl` as ``(d/du, d/dv)``."""
    Km = _kmatrix(K)
    C = cholesky_checked(lap.matrix())
    gu = edge_quadratic(Km, lap.topology) - edge_resistance(C, lap.topology)
    Cinv = scipy.linalg.solve_triangular(C, np.eye(lap.n), lower=True, check_finite=False)
    gv = np.diag(Km) - np.sum(Cinv * Cinv, axis=0)
    return gu, gv


def pseudo_determinant(L: np.ndarray, rtol: float = 1e-10) -> float:
    """Product of the eigenvalues of symmetric ``L`` above ``rtol * max|lambda|``."""
    lam = np.linalg.eigvalsh(L)
    keep = np.abs(lam) > rtol * np.abs(lam).max()
    return float(np.prod(lam[keep]))


def shifted_determinant(L: np.ndarray) -> float:
    n = L.shape[0]
    return float(np.linalg.det(L + np.full((n, n), 1.0 / n)))

"""Linear NOTEARS plus knowledge-graph post-processing.

The optimiser solves

    min_W  1/(2n) ||X - X W||_F^2 + lambda1 ||W||_1   s.t.  h(W) = 0,
    h(W) = tr(exp(W * W)) - d,

with an augmented Lagrangian. The L1 term is handled by splitting
``W = W+ - W-`` with non-negative bounds, so each subproblem is a smooth
bound-constrained problem for L-BFGS-B.

Post-processing runs in a fixed order: boost weak required edges, zero
forbidden ones, threshold with prior-dependent cut-offs, break cycles.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.optimize as sopt

from .constraints import ConstraintSet
from .graph import DirectedGraph, resolve_cycles
from .stats import Dataset

logger = logging.getLogger(__name__)

_OVERFLOW_VALUE = 1e300


@dataclass(frozen=True)
class NotearsConfig:
    lambda1: float = 0.05
    base_threshold: float = 0.3
    boost_floor: float = 0.3
    boost_value: float = 0.5
    rho_init: float = 1.0
    rho_max: float = 1e16
    alpha_dual: float = 0.0
    h_tol: float = 1e-8
    max_outer_iters: int = 100
    max_inner_iters: int = 500
    grad_tol: float = 1e-6

    def __post_init__(self):
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be non-negative")
        if self.h_tol <= 0:
            raise ValueError("h_tol must be positive")


def acyclicity(W: np.ndarray) -> tuple[float, np.ndarray]:
    """``h(W) = tr(exp(W o W)) - d`` and its gradient."""
    E = sla.expm(W * W)
    return float(np.trace(E) - W.shape[0]), E.T * W * 2.0


def smooth_objective(W: np.ndarray, X: np.ndarray, rho: float, alpha: float):
    """Value and gradient of the smooth part of the augmented Lagrangian.

    ``1/(2n) ||X - XW||^2 + rho/2 h(W)^2 + alpha h(W)``; the L1 term is
    excluded.
    """
    n = X.shape[0]
    R = X - X @ W
    loss = 0.5 / n * float((R ** 2).sum())
    g_loss = -1.0 / n * X.T @ R
    h, g_h = acyclicity(W)
    val = loss + 0.5 * rho * h * h + alpha * h
    return val, g_loss + (rho * h + alpha) * g_h


@dataclass
class NotearsFit:
    W: np.ndarray
    h: float
    converged: bool
    outer_iters: int


def notears_optimize(X, cfg: NotearsConfig = NotearsConfig()) -> NotearsFit:
    """Augmented-Lagrangian NOTEARS from a zero start.

    ``rho`` grows tenfold whenever a subproblem fails to shrink ``h`` by a
    factor of four; the dual variable then takes a step ``rho * h``.
    """
    M = X.X if isinstance(X, Dataset) else np.asarray(X, dtype=float)
    n, d = M.shape
    M = M - M.mean(axis=0)
    if d < 2:
        return NotearsFit(np.zeros((d, d)), 0.0, True, 0)
    dd = d * d
    lam = cfg.lambda1

    def adj(w):
        return (w[:dd] - w[dd:]).reshape(d, d)

    def func(w, rho, alpha):
        W = adj(w)
        with np.errstate(over="ignore", invalid="ignore"):
            val, G = smooth_objective(W, M, rho, alpha)
        g = G.ravel()
        if not (np.isfinite(val) and np.all(np.isfinite(g))):
            # a trial step so long that exp(W o W) overflows; report a huge
            # value so the line search backs off
            return _OVERFLOW_VALUE, np.ones(2 * dd)
        return val + lam * w.sum(), np.concatenate([g + lam, -g + lam])

    bounds = [(0, 0) if i == j else (0, None) for _ in range(2) for i in range(d) for j in range(d)]
    w_est = np.zeros(2 * dd)
    rho, alpha, h = cfg.rho_init, cfg.alpha_dual, np.inf
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        w_new, h_new = w_est, h
        while rho < cfg.rho_max:
            sol = sopt.minimize(func, w_est, args=(rho, alpha), method="L-BFGS-B", jac=True,
                                bounds=bounds,
                                options={"maxiter": cfg.max_inner_iters, "gtol": cfg.grad_tol})
            w_new = sol.x
            with np.errstate(over="ignore", invalid="ignore"):
                h_new, _ = acyclicity(adj(w_new))
            if h_new > 0.25 * h:
                rho *= 10.0
            else:
                break
        w_est, h = w_new, h_new
        alpha += rho * h
        if h <= cfg.h_tol or rho >= cfg.rho_max:
            break
    W = adj(w_est)
    np.fill_diagonal(W, 0.0)
    converged = h <= cfg.h_tol
    if not converged:
        logger.warning("NOTEARS stopped with h=%.3g after %d outer iterations", h, it)
    return NotearsFit(W, float(h), converged, it)


def enforce_required(W: np.ndarray, cs: ConstraintSet, floor: float = 0.3, value: float = 0.5) -> np.ndarray:
    """Lift required entries with ``|W| < floor`` to magnitude ``value``, keeping the sign."""
    W = np.array(W, dtype=float, copy=True)
    for e in sorted(cs.required):
        if abs(W[e]) < floor:
            W[e] = -value if W[e] < 0 else value
    return W


def suppress_forbidden(W: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    W = np.array(W, dtype=float, copy=True)
    for e in cs.forbidden:
        W[e] = 0.0
    return W


def edge_thresholds(cs: ConstraintSet, base: float = 0.3) -> np.ndarray:
    """Per-entry cut-offs ``base * exp(-w / 2)``."""
    return base * np.exp(-cs.weight_matrix() / 2.0)


def adaptive_threshold(W: np.ndarray, cs: ConstraintSet, cfg: NotearsConfig = NotearsConfig()) -> DirectedGraph:
    keep = np.abs(W) > edge_thresholds(cs, cfg.base_threshold)
    np.fill_diagonal(keep, False)
    return DirectedGraph.from_adjacency(keep)


@dataclass
class NotearsResult:
    graph: DirectedGraph
    W_raw: np.ndarray
    W_final: np.ndarray
    converged: bool
    h: float
    stages: dict = field(default_factory=dict)


def _diff(before: np.ndarray, after: np.ndarray) -> list[tuple[int, int, float, float]]:
    idx = np.argwhere(before != after)
    return [(int(i), int(j), float(before[i, j]), float(after[i, j])) for i, j in idx]


def run_notears(X: Dataset, cs: ConstraintSet | None = None, cfg: NotearsConfig = NotearsConfig()) -> NotearsResult:
    """Optimise, then boost, suppress, threshold and break cycles."""
    if cs is None:
        cs = ConstraintSet.empty(X.n_vars)
    fit = notears_optimize(X, cfg)
    W0 = fit.W
    W1 = enforce_required(W0, cs, cfg.boost_floor, cfg.boost_value)
    W2 = suppress_forbidden(W1, cs)
    kept = adaptive_threshold(W2, cs, cfg)
    W3 = W2 * kept.adjacency()
    W4 = resolve_cycles(W3, cs)
    graph = DirectedGraph.from_adjacency(W4 != 0)
    stages = {
        "enforce_required": _diff(W0, W1),
        "suppress_forbidden": _diff(W1, W2),
        "adaptive_threshold": _diff(W2, W3),
        "resolve_cycles": _diff(W3, W4),
    }
    return NotearsResult(graph, W0, W4, fit.converged, fit.h, stages)

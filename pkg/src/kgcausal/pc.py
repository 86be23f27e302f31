"""Knowledge-guided PC: protected skeleton search plus prior-driven orientation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .catalog import tiers_for
from .constraints import ConstraintSet
from .errors import DomainError
from .graph import DirectedGraph, resolve_cycles
from .stats import Dataset, fisher_z_pvalue, partial_correlation


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.15
    delta: float = 0.2
    max_cond_size: int = 3

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.max_cond_size < 0:
            raise ValueError("max_cond_size must be non-negative")


@dataclass(frozen=True)
class CiTest:
    i: int
    j: int
    S: tuple[int, ...]
    rho: float
    p: float
    alpha_adj: float
    removed: bool


def adaptive_alpha(alpha: float, w: float) -> float:
    """``alpha * exp(-w)``: stronger priors demand more evidence to drop an edge."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return alpha * math.exp(-w)


def pc_skeleton(X: Dataset, cs: ConstraintSet, cfg: PcConfig = PcConfig(),
                trace: list | None = None):
    """Undirected skeleton and separating sets.

    Returns ``(pairs, sepsets)`` where ``pairs`` is a set of ``(i, j)`` with
    ``i < j``. Pairs with a required direction are never tested; pairs
    forbidden in both directions never enter. Tests use the PC-stable
    schedule: neighbourhoods are frozen at the start of each level.
    """
    d = X.n_vars
    n = X.n_samples
    corr = X.correlation()
    adj = {i: set() for i in range(d)}
    protected = set()
    for i, j in combinations(range(d), 2):
        if (i, j) in cs.forbidden and (j, i) in cs.forbidden:
            continue
        adj[i].add(j)
        adj[j].add(i)
        if (i, j) in cs.required or (j, i) in cs.required:
            protected.add((i, j))
    sepsets: dict[tuple[int, int], tuple[int, ...]] = {}

    for level in range(cfg.max_cond_size + 1):
        frozen = {i: sorted(a) for i, a in adj.items()}
        if not any(len(a) - 1 >= level for a in frozen.values()):
            break
        for i, j in combinations(range(d), 2):
            if j not in adj[i] or (i, j) in protected:
                continue
            w = max(cs.weight(i, j), cs.weight(j, i))
            a_adj = adaptive_alpha(cfg.alpha, w)
            cands = []
            for base in (frozen[i], frozen[j]):
                pool = [k for k in base if k not in (i, j)]
                if len(pool) >= level:
                    cands.extend(combinations(pool, level))
            seen = set()
            for S in cands:
                if S in seen:
                    continue
                seen.add(S)
                if n <= len(S) + 3:
                    break
                rho = partial_correlation(X, i, j, S, corr=corr)
                p = fisher_z_pvalue(rho, n, len(S))
                removed = p > a_adj
                if trace is not None:
                    trace.append(CiTest(i, j, tuple(S), rho, p, a_adj, removed))
                if removed:
                    adj[i].discard(j)
                    adj[j].discard(i)
                    sepsets[(i, j)] = tuple(S)
                    break
    pairs = {(i, j) for i in range(d) for j in adj[i] if i < j}
    return pairs, sepsets


def _fallback_direction(i: int, j: int, tiers: list[int]) -> tuple[int, int]:
    # one-parent R^2 is symmetric in (i, j), so after tiers only the index decides
    if tiers[i] != tiers[j]:
        return (i, j) if tiers[i] < tiers[j] else (j, i)
    return (i, j) if i < j else (j, i)


def pc_orient(pairs, cs: ConstraintSet, X: Dataset, cfg: PcConfig = PcConfig()) -> DirectedGraph:
    """Orient skeleton pairs by prior weights, then tiers, then index.

    The oriented graph is made acyclic by dropping, per cycle, the
    non-required edge with the weakest absolute correlation.
    """
    tiers = tiers_for(X.catalog)
    corr = X.correlation()
    d = X.n_vars
    W = np.zeros((d, d))
    for i, j in sorted(pairs):
        wij, wji = cs.weight(i, j), cs.weight(j, i)
        if (i, j) in cs.required or (j, i) in cs.forbidden:
            e = (i, j)
        elif (j, i) in cs.required or (i, j) in cs.forbidden:
            e = (j, i)
        elif wij > wji + cfg.delta:
            e = (i, j)
        elif wji > wij + cfg.delta:
            e = (j, i)
        else:
            e = _fallback_direction(i, j, tiers)
        # keep zero-correlation edges in the support
        W[e] = max(abs(corr[i, j]), 1e-12)
    W = resolve_cycles(W, cs)
    return DirectedGraph.from_adjacency(W != 0)


def run_pc(X: Dataset, cs: ConstraintSet | None = None, cfg: PcConfig = PcConfig(),
           trace: list | None = None) -> DirectedGraph:
    """Skeleton search followed by orientation; the result is a DAG."""
    if cs is None:
        cs = ConstraintSet.empty(X.n_vars)
    pairs, _ = pc_skeleton(X, cs, cfg, trace)
    return pc_orient(pairs, cs, X, cfg)

"""Greedy DAG-space search on BIC plus a knowledge-graph bonus.

This is hill climbing over single-edge additions and deletions on directed
graphs, not the equivalence-class search of classical GES. The objective is

    score_kg(G) = BIC(G) + lambda_kg * w_req * sum_{req in G} w(u, v)
                         - w_forb * 10 * |forbidden in G|

where ``w(u, v)`` for a required edge is its composite score. The forbidden
penalty sits outside ``lambda_kg`` so that one forbidden edge costs 200.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import ConstraintSet
from .graph import DirectedGraph, is_acyclic
from .stats import Dataset, LocalScorer

FORBIDDEN_UNIT = 10.0


@dataclass(frozen=True)
class GesConfig:
    lambda_kg: float = 10.0
    w_req: float = 5.0
    w_forb: float = 20.0
    epsilon: float = 1e-6
    seed_weight_threshold: float = 0.8
    max_iters: int = 100

    def __post_init__(self):
        for name in ("lambda_kg", "w_req", "w_forb", "epsilon", "seed_weight_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass(frozen=True)
class Move:
    iteration: int
    phase: str
    edge: tuple[int, int]
    d_bic: float
    d_kg: float
    accepted: bool


@dataclass
class GesResult:
    graph: DirectedGraph
    score: float
    converged: bool
    moves: list[Move] = field(default_factory=list)


def _required_strength(cs: ConstraintSet, e) -> float:
    # hand-built constraint sets may lack evidence scores; treat them as full strength
    return cs.scores.get(e, 1.0)


def edge_kg_delta(e, cs: ConstraintSet, cfg: GesConfig) -> float:
    """Score change from including edge ``e`` (KG part only)."""
    if e in cs.required:
        return cfg.lambda_kg * cfg.w_req * _required_strength(cs, e)
    if e in cs.forbidden:
        return -cfg.w_forb * FORBIDDEN_UNIT
    return 0.0


def kg_regularizer(g: DirectedGraph, cs: ConstraintSet, cfg: GesConfig = GesConfig()) -> float:
    """Net KG contribution added to BIC for graph ``g``."""
    return sum(edge_kg_delta(e, cs, cfg) for e in g.sorted_edges())


def score_kg(g: DirectedGraph, X: Dataset, cs: ConstraintSet, cfg: GesConfig = GesConfig(),
             scorer: LocalScorer | None = None) -> float:
    scorer = scorer or LocalScorer(X)
    return scorer.score(g) + kg_regularizer(g, cs, cfg)


class _State:
    def __init__(self, g: DirectedGraph):
        self.n = g.n
        self.parents = [set(g.parents(j)) for j in range(g.n)]
        self.children = [set(g.children(j)) for j in range(g.n)]

    def graph(self) -> DirectedGraph:
        return DirectedGraph(self.n, ((p, j) for j in range(self.n) for p in self.parents[j]))

    def reaches(self, src: int, dst: int) -> bool:
        stack, seen = [src], {src}
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for c in self.children[x]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def add(self, u, v):
        self.parents[v].add(u)
        self.children[u].add(v)

    def remove(self, u, v):
        self.parents[v].discard(u)
        self.children[u].discard(v)


def _blocks_required(st: _State, a: int, b: int, cs: ConstraintSet) -> bool:
    # a->b must not close a cycle in G plus every required edge, present or not;
    # otherwise some required edge (or chain of them) could never be added
    if (a, b) in cs.required or not cs.required:
        return False
    extra: dict[int, list[int]] = {}
    for u, v in cs.required:
        if u not in st.parents[v]:
            extra.setdefault(u, []).append(v)
    stack, seen = [b], {b}
    while stack:
        x = stack.pop()
        if x == a:
            return True
        for c in (*st.children[x], *extra.get(x, ())):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def _forward(st: _State, scorer: LocalScorer, cs, cfg, log, it) -> bool:
    moved = False
    while True:
        best = None
        for v in range(st.n):
            pa = st.parents[v]
            base = scorer.local(v, pa)
            for u in range(st.n):
                if u == v or u in pa or (u, v) in cs.forbidden:
                    continue
                if st.reaches(v, u) or _blocks_required(st, u, v, cs):
                    continue
                d_bic = scorer.local(v, pa | {u}) - base
                d_kg = edge_kg_delta((u, v), cs, cfg)
                tot = d_bic + d_kg
                if best is None or tot > best[0] + 1e-12 or (abs(tot - best[0]) <= 1e-12 and (u, v) < best[1]):
                    best = (tot, (u, v), d_bic, d_kg)
        if best is None or best[0] <= cfg.epsilon:
            if best is not None:
                log.append(Move(it, "forward", best[1], best[2], best[3], False))
            return moved
        st.add(*best[1])
        log.append(Move(it, "forward", best[1], best[2], best[3], True))
        moved = True


def _backward(st: _State, scorer: LocalScorer, cs, cfg, log, it) -> bool:
    moved = False
    while True:
        best = None
        for v in range(st.n):
            pa = st.parents[v]
            if not pa:
                continue
            base = scorer.local(v, pa)
            for u in sorted(pa):
                if (u, v) in cs.required:
                    continue
                d_bic = scorer.local(v, pa - {u}) - base
                d_kg = -edge_kg_delta((u, v), cs, cfg)
                tot = d_bic + d_kg
                if best is None or tot > best[0] + 1e-12 or (abs(tot - best[0]) <= 1e-12 and (u, v) < best[1]):
                    best = (tot, (u, v), d_bic, d_kg)
        if best is None or best[0] <= cfg.epsilon:
            if best is not None:
                log.append(Move(it, "backward", best[1], best[2], best[3], False))
            return moved
        st.remove(*best[1])
        log.append(Move(it, "backward", best[1], best[2], best[3], True))
        moved = True


def ges_forward(g: DirectedGraph, X: Dataset, cs: ConstraintSet, cfg: GesConfig = GesConfig(),
                scorer: LocalScorer | None = None, log: list | None = None) -> DirectedGraph:
    """Add the best-improving admissible edge until nothing beats ``epsilon``."""
    st = _State(g)
    _forward(st, scorer or LocalScorer(X), cs, cfg, log if log is not None else [], 0)
    return st.graph()


def ges_backward(g: DirectedGraph, X: Dataset, cs: ConstraintSet, cfg: GesConfig = GesConfig(),
                 scorer: LocalScorer | None = None, log: list | None = None) -> DirectedGraph:
    """Delete the best-improving edge until nothing beats ``epsilon``."""
    st = _State(g)
    _backward(st, scorer or LocalScorer(X), cs, cfg, log if log is not None else [], 0)
    return st.graph()


def seed_graph(cs: ConstraintSet, cfg: GesConfig = GesConfig()) -> DirectedGraph:
    """Required edges whose composite score exceeds the seed threshold."""
    seeds = [e for e in sorted(cs.required) if _required_strength(cs, e) > cfg.seed_weight_threshold]
    g = DirectedGraph(cs.n)
    for e in seeds:
        cand = g.with_edges([e])
        if is_acyclic(cand):
            g = cand
    return g


def run_ges(X: Dataset, cs: ConstraintSet | None = None, cfg: GesConfig = GesConfig()) -> GesResult:
    """Seeded forward/backward alternation until a full round makes no move."""
    if cs is None:
        cs = ConstraintSet.empty(X.n_vars)
    scorer = LocalScorer(X)
    st = _State(seed_graph(cs, cfg))
    log: list[Move] = []
    converged = False
    for it in range(cfg.max_iters):
        fwd = _forward(st, scorer, cs, cfg, log, it)
        bwd = _backward(st, scorer, cs, cfg, log, it)
        if not (fwd or bwd):
            converged = True
            break
    g = st.graph()
    return GesResult(g, scorer.score(g) + kg_regularizer(g, cs, cfg), converged, log)

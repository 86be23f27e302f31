"""Knowledge-graph evidence scoring and constraint sets.

Evidence for an ordered pair (u, v) is a set of mention counts split by the
extraction model's confidence label plus the number of distinct companies
that mention it. Scores combine strength, frequency and coverage with a
geometric mean; thresholds turn scores into required/forbidden/soft edges.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .catalog import VariableCatalog
from .errors import DomainError

if TYPE_CHECKING:
    from .providers import EdgeProposal

Edge = tuple[int, int]

REQUIRED_WEIGHT = 2.0
FORBIDDEN_WEIGHT = -2.0


@dataclass(frozen=True)
class EdgeEvidence:
    source: str
    target: str
    n_strong: int
    n_moderate: int
    n_weak: int
    n_companies: int

    @property
    def n_total(self) -> int:
        return self.n_strong + self.n_moderate + self.n_weak


@dataclass(frozen=True)
class KgEvidence:
    edges: tuple[EdgeEvidence, ...]
    max_mentions: int
    max_coverage: int

    @classmethod
    def from_dict(cls, obj: Mapping) -> "KgEvidence":
        edges = tuple(
            EdgeEvidence(e["source"], e["target"], int(e["n_strong"]), int(e["n_moderate"]),
                         int(e["n_weak"]), int(e["n_companies"]))
            for e in obj["edges"]
        )
        return cls(edges, int(obj["max_mentions"]), int(obj["max_coverage"]))

    @classmethod
    def load(cls, path) -> "KgEvidence":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "edges": [
                {"source": e.source, "target": e.target, "n_strong": e.n_strong,
                 "n_moderate": e.n_moderate, "n_weak": e.n_weak, "n_companies": e.n_companies}
                for e in self.edges
            ],
            "max_mentions": self.max_mentions,
            "max_coverage": self.max_coverage,
        }


def score_components(n_strong, n_moderate, n_weak, n_companies, max_mentions, max_coverage):
    """Return ``(S_strength, S_freq, S_cov)`` for one edge."""
    counts = (n_strong, n_moderate, n_weak, n_companies)
    if any(c < 0 for c in counts):
        raise DomainError(f"negative evidence count in {counts}")
    if max_mentions <= 0 or max_coverage <= 0:
        raise DomainError("corpus maxima must be positive")
    n_total = n_strong + n_moderate + n_weak
    if n_total < 1:
        raise DomainError("edge has no mentions")
    s_strength = (n_strong + 0.5 * n_moderate) / n_total
    s_freq = n_total / max_mentions
    s_cov = n_companies / max_coverage
    return s_strength, s_freq, s_cov


def composite_score(ev: EdgeEvidence, max_mentions: int, max_coverage: int) -> float:
    """Geometric mean of strength, frequency and coverage, in [0, 1]."""
    s = score_components(ev.n_strong, ev.n_moderate, ev.n_weak, ev.n_companies,
                         max_mentions, max_coverage)
    return (s[0] * s[1] * s[2]) ** (1.0 / 3.0)


@dataclass(frozen=True)
class ConstraintSet:
    """Required/forbidden edge sets plus soft prior weights in [0, 1].

    ``scores`` keeps the composite score of every KG edge (required ones
    included) for consumers that need the raw evidence strength rather than
    the clamped +/-2 weights.
    """

    n: int
    required: frozenset = frozenset()
    forbidden: frozenset = frozenset()
    soft: Mapping[Edge, float] = field(default_factory=dict)
    scores: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "required", frozenset(map(tuple, self.required)))
        object.__setattr__(self, "forbidden", frozenset(map(tuple, self.forbidden)))
        object.__setattr__(self, "soft", dict(sorted(self.soft.items())))
        object.__setattr__(self, "scores", dict(sorted(self.scores.items())))
        if self.required & self.forbidden:
            raise ValueError("an edge cannot be both required and forbidden")
        for e, w in self.soft.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"soft weight {w} for {e} outside [0, 1]")
            if e in self.required or e in self.forbidden:
                raise ValueError(f"soft edge {e} is also a hard constraint")
        for u, v in [*self.required, *self.forbidden, *self.soft]:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"invalid edge ({u}, {v})")

    @classmethod
    def empty(cls, n: int) -> "ConstraintSet":
        return cls(n)

    def is_empty(self) -> bool:
        return not (self.required or self.forbidden or self.soft)

    def weight(self, u: int, v: int) -> float:
        return edge_weight(self, u, v)

    def score(self, u: int, v: int) -> float:
        """Composite score (or soft weight) of a KG edge; 0 when unknown."""
        e = (u, v)
        if e in self.scores:
            return self.scores[e]
        return self.soft.get(e, 0.0)

    def weight_matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        for (u, v), w in self.soft.items():
            M[u, v] = w
        for e in self.required:
            M[e] = REQUIRED_WEIGHT
        for e in self.forbidden:
            M[e] = FORBIDDEN_WEIGHT
        return M

    def to_dict(self, catalog: VariableCatalog) -> dict:
        nm = catalog.name
        return {
            "required": [[nm(u), nm(v)] for u, v in sorted(self.required)],
            "forbidden": [[nm(u), nm(v)] for u, v in sorted(self.forbidden)],
            "soft": [{"source": nm(u), "target": nm(v), "weight": round(w, 12)}
                     for (u, v), w in self.soft.items()],
            "scores": [{"source": nm(u), "target": nm(v), "score": round(w, 12)}
                       for (u, v), w in self.scores.items()],
        }

    def to_json(self, catalog: VariableCatalog) -> str:
        return json.dumps(self.to_dict(catalog), indent=2) + "\n"

    @classmethod
    def from_dict(cls, obj: Mapping, catalog: VariableCatalog) -> "ConstraintSet":
        ix = catalog.idx
        return cls(
            len(catalog),
            required={(ix(u), ix(v)) for u, v in obj.get("required", [])},
            forbidden={(ix(u), ix(v)) for u, v in obj.get("forbidden", [])},
            soft={(ix(s["source"]), ix(s["target"])): float(s["weight"]) for s in obj.get("soft", [])},
            scores={(ix(s["source"]), ix(s["target"])): float(s["score"]) for s in obj.get("scores", [])},
        )


def edge_weight(cs: ConstraintSet, u: int, v: int) -> float:
    """Prior weight: +2 required, -2 forbidden, composite score if soft, else 0."""
    e = (u, v)
    if e in cs.required:
        return REQUIRED_WEIGHT
    if e in cs.forbidden:
        return FORBIDDEN_WEIGHT
    return cs.soft.get(e, 0.0)


def classify_edges(ev: KgEvidence, catalog: VariableCatalog, score_threshold: float = 0.4,
                   coverage_threshold: int = 18, rarity_threshold: int = 5) -> ConstraintSet:
    """Split KG edges into required / forbidden / soft.

    Required: score > ``score_threshold`` and companies > ``coverage_threshold``
    (both strict). Forbidden: fewer than ``rarity_threshold`` mentions. The
    required test runs first.
    """
    required, forbidden, soft, scores = set(), set(), {}, {}
    for e in ev.edges:
        key = (catalog.idx(e.source), catalog.idx(e.target))
        if key[0] == key[1]:
            continue
        s = composite_score(e, ev.max_mentions, ev.max_coverage)
        scores[key] = s
        if s > score_threshold and e.n_companies > coverage_threshold:
            required.add(key)
        elif e.n_total < rarity_threshold:
            forbidden.add(key)
        else:
            soft[key] = s
    return ConstraintSet(len(catalog), required, forbidden, soft, scores)


def merge_with_proposals(cs: ConstraintSet | None, proposals: Iterable["EdgeProposal"],
                         catalog: VariableCatalog) -> ConstraintSet:
    """Fold LLM edge proposals into a constraint set.

    With ``cs=None`` (LLM-only) the proposals' confidences are the only soft
    weights. Otherwise KG hard constraints are kept, soft weights become
    ``max(kg, llm)``, and proposals on forbidden or required edges change
    nothing.
    """
    n = len(catalog)
    base = cs if cs is not None else ConstraintSet.empty(n)
    soft = dict(base.soft)
    scores = dict(base.scores)
    for p in proposals:
        e = (catalog.idx(p.source), catalog.idx(p.target))
        if e in base.forbidden or e in base.required:
            continue
        soft[e] = max(soft.get(e, 0.0), float(p.confidence))
        scores[e] = max(scores.get(e, 0.0), float(p.confidence))
    return ConstraintSet(n, base.required, base.forbidden, soft, scores)


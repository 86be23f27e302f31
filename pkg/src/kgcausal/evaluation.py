"""Graph-recovery metrics and method-comparison tables.

Edges are matched exactly as ordered pairs, so a reversed edge is both a
false positive and a false negative. Skeleton (undirected) scores are
reported alongside as a diagnostic.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CatalogMismatch
from .graph import DirectedGraph

ALGORITHM_ORDER = ("pc", "ges", "notears")
MODE_ORDER = ("baseline", "kg", "llm", "kg+llm")


@dataclass(frozen=True)
class RecoveryMetrics:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    n_edges_predicted: int
    skeleton_f1: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _prf(tp: int, n_pred: int, n_true: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_true if n_true else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def score_graph(predicted: DirectedGraph, truth: DirectedGraph) -> RecoveryMetrics:
    """Directed exact-match precision, recall and F1 (plus skeleton F1)."""
    if predicted.n != truth.n:
        raise CatalogMismatch(f"graphs over {predicted.n} and {truth.n} variables")
    pe, te = set(predicted.edges), set(truth.edges)
    tp = len(pe & te)
    p, r, f = _prf(tp, len(pe), len(te))
    ps = {frozenset(e) for e in pe}
    ts = {frozenset(e) for e in te}
    _, _, fs = _prf(len(ps & ts), len(ps), len(ts))
    return RecoveryMetrics(tp, len(pe) - tp, len(te) - tp, p, r, f, len(pe), fs)


@dataclass(frozen=True)
class RunSummary:
    algorithm: str
    mode: str
    runs: tuple[RecoveryMetrics, ...]

    def _stat(self, attr: str) -> tuple[float, float]:
        x = np.array([getattr(m, attr) for m in self.runs], dtype=float)
        sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        return float(np.mean(x)), sd

    @property
    def label(self) -> str:
        return f"{self.algorithm}/{self.mode}"

    @property
    def f1(self) -> tuple[float, float]:
        return self._stat("f1")

    @property
    def precision(self) -> tuple[float, float]:
        return self._stat("precision")

    @property
    def recall(self) -> tuple[float, float]:
        return self._stat("recall")

    @property
    def edges(self) -> float:
        return self._stat("n_edges_predicted")[0]


def aggregate_runs(metrics: Sequence[RecoveryMetrics], algorithm: str = "", mode: str = "") -> RunSummary:
    """Mean and sample standard deviation (n - 1) over runs; sd is 0 for one run."""
    if not metrics:
        raise ValueError("no runs to aggregate")
    return RunSummary(algorithm, mode, tuple(metrics))


def _order(s: RunSummary):
    a = ALGORITHM_ORDER.index(s.algorithm) if s.algorithm in ALGORITHM_ORDER else len(ALGORITHM_ORDER)
    m = MODE_ORDER.index(s.mode) if s.mode in MODE_ORDER else len(MODE_ORDER)
    return (a, s.algorithm, m, s.mode)


HEADER = ("algorithm", "mode", "runs", "precision", "precision_sd", "recall", "recall_sd",
          "f1", "f1_sd", "edges", "skeleton_f1", "f1_gain_vs_baseline")


def comparison_rows(summaries: Sequence[RunSummary]) -> list[tuple]:
    """Rows sorted by (algorithm, mode); the gain column is NaN without a baseline row."""
    base = {s.algorithm: s.f1[0] for s in summaries if s.mode == "baseline"}
    rows = []
    for s in sorted(summaries, key=_order):
        p, r, f = s.precision, s.recall, s.f1
        sk = float(np.mean([m.skeleton_f1 for m in s.runs]))
        gain = f[0] - base[s.algorithm] if s.algorithm in base else math.nan
        rows.append((s.algorithm, s.mode, len(s.runs), p[0], p[1], r[0], r[1], f[0], f[1], s.edges, sk, gain))
    return rows


def comparison_table(summaries: Sequence[RunSummary]) -> tuple[str, str]:
    """The comparison as ``(csv_text, aligned_text)``."""
    rows = comparison_rows(summaries)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for row in rows:
        w.writerow([v if isinstance(v, (str, int)) else f"{v:.6f}" for v in row])
    lines = [f"{'method':<18}{'runs':>5}{'precision':>11}{'recall':>9}{'F1 (mean +- sd)':>20}"
             f"{'edges':>8}{'skel F1':>9}{'gain':>8}"]
    for a, m, n, p, _, r, _, f, fsd, e, sk, g in rows:
        gain = "" if math.isnan(g) else f"{g:+.3f}"
        lines.append(f"{a + '/' + m:<18}{n:>5}{p:>11.3f}{r:>9.3f}{f:>12.3f} +- {fsd:.3f}"
                     f"{e:>8.1f}{sk:>9.3f}{gain:>8}")
    return buf.getvalue(), "\n".join(lines) + "\n"


def summaries_json(summaries: Sequence[RunSummary]) -> str:
    out = []
    for s in sorted(summaries, key=_order):
        out.append({
            "algorithm": s.algorithm, "mode": s.mode,
            "f1": {"mean": round(s.f1[0], 12), "sd": round(s.f1[1], 12)},
            "precision": {"mean": round(s.precision[0], 12), "sd": round(s.precision[1], 12)},
            "recall": {"mean": round(s.recall[0], 12), "sd": round(s.recall[1], 12)},
            "runs": [m.to_dict() for m in s.runs],
        })
    return json.dumps(out, indent=2) + "\n"

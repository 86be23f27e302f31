"""Linear structural causal models and do-interventions."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .catalog import VariableCatalog
from .errors import CycleError
from .graph import DirectedGraph, topological_order
from .stats import Dataset, ols_fit


@dataclass(frozen=True)
class LinearScm:
    dag: DirectedGraph
    catalog: VariableCatalog
    intercepts: tuple[float, ...]
    coefficients: tuple[Mapping[int, float], ...]
    noise_variances: tuple[float, ...]
    means: tuple[float, ...]

    def __post_init__(self):
        for j in range(self.dag.n):
            if set(self.coefficients[j]) != set(self.dag.parents(j)):
                raise ValueError(f"coefficients of node {j} do not match its parents")

    @classmethod
    def from_coefficients(cls, dag: DirectedGraph, catalog: VariableCatalog,
                          coefficients: Mapping[tuple[int, int], float],
                          intercepts: Sequence[float] | None = None,
                          noise_variances: Sequence[float] | None = None) -> "LinearScm":
        """Build an SCM from an edge -> coefficient map; means follow from intercepts."""
        order = topological_order(dag)
        n = dag.n
        icpt = tuple(intercepts) if intercepts is not None else (0.0,) * n
        coef = tuple({p: float(coefficients[(p, j)]) for p in dag.parents(j)} for j in range(n))
        mu = [0.0] * n
        for j in order:
            mu[j] = icpt[j] + sum(b * mu[p] for p, b in coef[j].items())
        nv = tuple(noise_variances) if noise_variances is not None else (1.0,) * n
        return cls(dag, catalog, icpt, coef, nv, tuple(mu))

    def coefficient(self, u: int, v: int) -> float:
        return self.coefficients[v][u]


def fit_scm(dag: DirectedGraph, X: Dataset) -> LinearScm:
    """Per-node OLS on the DAG parents."""
    if dag.n != X.n_vars:
        raise ValueError("graph and dataset disagree on the number of variables")
    topological_order(dag)  # CycleError on cyclic input
    icpt, coef, nv = [], [], []
    for j in range(dag.n):
        fit = ols_fit(j, dag.parents(j), X)
        icpt.append(fit.intercept)
        coef.append(dict(fit.coefficients))
        nv.append(fit.residual_variance)
    means = tuple(float(m) for m in X.X.mean(axis=0))
    return LinearScm(dag, X.catalog, tuple(icpt), tuple(coef), tuple(nv), means)


def do_intervention(scm: LinearScm, var, value: float, X: Dataset | None = None) -> np.ndarray:
    """Expected values of all variables under ``do(var = value)``.

    Incoming edges of ``var`` are cut and noise sits at its mean (zero).
    Variables that are not descendants of ``var`` keep their observational
    means (taken from ``X`` when given, otherwise from the model).
    """
    j0 = scm.catalog.idx(var) if isinstance(var, str) else int(var)
    base = np.array(X.X.mean(axis=0) if X is not None else scm.means, dtype=float)
    out = base.copy()
    out[j0] = value
    affected = scm.dag.descendants(j0)
    # linear equations: propagate the change from baseline, so intercepts cancel
    for j in topological_order(scm.dag):
        if j in affected:
            out[j] = base[j] + sum(b * (out[p] - base[p]) for p, b in scm.coefficients[j].items())
    return out


def intervention_effect(scm: LinearScm, var, value: float, target, X: Dataset | None = None) -> float:
    """Change of the target's mean under ``do(var = value)`` versus no intervention."""
    t = scm.catalog.idx(target) if isinstance(target, str) else int(target)
    base = np.array(X.X.mean(axis=0) if X is not None else scm.means, dtype=float)
    return float(do_intervention(scm, var, value, X)[t] - base[t])


@dataclass(frozen=True)
class InterventionScenario:
    label: str
    intervention_var: str
    intervention_value: float
    target_var: str

    def validate(self, catalog: VariableCatalog) -> None:
        for v in (self.intervention_var, self.target_var):
            if v not in catalog:
                raise ValueError(f"scenario {self.label!r}: unknown variable {v!r}")
        if self.intervention_var == self.target_var:
            raise ValueError(f"scenario {self.label!r}: intervention and target coincide")

    def to_dict(self) -> dict:
        return {"label": self.label, "intervention_var": self.intervention_var,
                "intervention_value": self.intervention_value, "target_var": self.target_var}

    @classmethod
    def from_dict(cls, d: Mapping) -> "InterventionScenario":
        return cls(d["label"], d["intervention_var"], float(d["intervention_value"]), d["target_var"])


@dataclass(frozen=True)
class CounterfactualResult:
    scenario: InterventionScenario
    predicted_effect: float
    true_effect: float

    @property
    def abs_error(self) -> float:
        return abs(self.predicted_effect - self.true_effect)

    @property
    def direction_match(self) -> bool:
        if self.true_effect == 0.0:
            return abs(self.predicted_effect) < 1e-6
        return math.copysign(1.0, self.predicted_effect) == math.copysign(1.0, self.true_effect) \
            and self.predicted_effect != 0.0


@dataclass(frozen=True)
class ScenarioSummary:
    results: tuple[CounterfactualResult, ...]
    mae: float
    directional_accuracy: float


def evaluate_scenarios(scm: LinearScm, scenarios: Sequence[InterventionScenario],
                       truth_scm: LinearScm, X: Dataset | None = None) -> ScenarioSummary:
    """Predicted vs. true effects; MAE is the mean of per-scenario absolute errors."""
    if not scenarios:
        raise ValueError("no scenarios given")
    results = []
    for sc in scenarios:
        sc.validate(scm.catalog)
        pred = intervention_effect(scm, sc.intervention_var, sc.intervention_value, sc.target_var, X)
        true = intervention_effect(truth_scm, sc.intervention_var, sc.intervention_value, sc.target_var)
        results.append(CounterfactualResult(sc, pred, true))
    mae = float(np.mean([r.abs_error for r in results]))
    acc = float(np.mean([r.direction_match for r in results]))
    return ScenarioSummary(tuple(results), mae, acc)


def results_csv(summary: ScenarioSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "intervention", "target", "predicted", "true", "abs_error",
                "direction_match", "predicted_bp"])
    for r in summary.results:
        sc = r.scenario
        w.writerow([sc.label, f"{sc.intervention_var}={sc.intervention_value:g}", sc.target_var,
                    f"{r.predicted_effect:.10g}", f"{r.true_effect:.10g}", f"{r.abs_error:.10g}",
                    str(r.direction_match).lower(), f"{r.predicted_effect * 1e4:.4f}"])
    return buf.getvalue()


def summary_json(summary: ScenarioSummary) -> str:
    return json.dumps({
        "n_scenarios": len(summary.results),
        "mae": round(summary.mae, 12),
        "directional_accuracy": summary.directional_accuracy,
        "scenarios": [
            {**r.scenario.to_dict(), "predicted_effect": round(r.predicted_effect, 12),
             "true_effect": round(r.true_effect, 12), "abs_error": round(r.abs_error, 12),
             "direction_match": r.direction_match}
            for r in summary.results
        ],
    }, indent=2) + "\n"


__all__ = ["LinearScm", "fit_scm", "do_intervention", "intervention_effect", "InterventionScenario",
           "CounterfactualResult", "ScenarioSummary", "evaluate_scenarios", "CycleError"]

"""Causal discovery with knowledge-graph and LLM edge priors.

Three structure learners (PC, GES, NOTEARS) accept a ``ConstraintSet`` of
required, forbidden and soft-weighted edges built from a KG evidence file
and/or LLM edge proposals. Discovered graphs feed a linear SCM for
do-interventions; a synthetic financial panel with a known DAG supplies
ground truth.
"""
from .catalog import FINANCIAL_CATALOG, VariableCatalog
from .constraints import ConstraintSet, KgEvidence, classify_edges, composite_score, merge_with_proposals
from .errors import KgCausalError
from .evaluation import RecoveryMetrics, aggregate_runs, comparison_table, score_graph
from .ges import GesConfig, run_ges
from .graph import DirectedGraph, is_acyclic, resolve_cycles, topological_order
from .notears import NotearsConfig, run_notears
from .pc import PcConfig, run_pc
from .providers import EdgeProposal, ProposalBatch, parse_proposals, replay
from .scm import InterventionScenario, LinearScm, evaluate_scenarios, fit_scm, intervention_effect
from .stats import Dataset
from .synthgen import GenConfig, aggregate_cross_section, generate_panel, generate_scenarios, ground_truth

__version__ = "0.1.0"

__all__ = [
    "FINANCIAL_CATALOG", "VariableCatalog", "ConstraintSet", "KgEvidence", "classify_edges",
    "composite_score", "merge_with_proposals", "KgCausalError", "RecoveryMetrics", "aggregate_runs",
    "comparison_table", "score_graph", "GesConfig", "run_ges", "DirectedGraph", "is_acyclic",
    "resolve_cycles", "topological_order", "NotearsConfig", "run_notears", "PcConfig", "run_pc",
    "EdgeProposal", "ProposalBatch", "parse_proposals", "replay", "InterventionScenario", "LinearScm",
    "evaluate_scenarios", "fit_scm", "intervention_effect", "Dataset", "GenConfig",
    "aggregate_cross_section", "generate_panel", "generate_scenarios", "ground_truth", "__version__",
]

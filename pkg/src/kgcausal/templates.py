"""Prompt templates for the edge-proposal providers.

Placeholders use ``string.Template`` syntax (``$name``) so the JSON
examples inside the prompts need no escaping. Only the missing-edge
template is used by default; the other four ship for experimentation.
"""
from __future__ import annotations

from string import Template

MISSING_EDGE = Template("""\
You are a financial economist. Your job is to name DIRECT causes of one variable.

## Target variable: $target_variable

## Drivers already in the graph
$sources_to_target

## Candidate drivers not yet in the graph (correlation with the target)
$correlations

$pattern_guidance

## What counts as a direct cause
Consider three kinds of direct cause for $target_variable:

1. FUNDAMENTAL: profitability, growth and capital-structure metrics that
   determine an outcome without an intermediate step.
2. RISK_TRANSMISSION: one risk or exposure raising another. Risk variables: $risk_vars
3. EVENT: corporate or regulatory events with a first-order effect.
   Event variables: $event_vars

Skip any relationship that only works through another listed variable.

## Response format
Reply with JSON only:
{
  "hypotheses": [
    {
      "source": "<variable name>",
      "target": "$target_variable",
      "confidence": 0.0,
      "mechanism": "<one or two sentences>",
      "mechanism_type": "FUNDAMENTAL|RISK_TRANSMISSION|EVENT",
      "expected_coefficient_sign": "POSITIVE|NEGATIVE",
      "expected_strength": "STRONG|MODERATE",
      "alternative_explanations": "<non-causal reasons for the correlation>"
    }
  ]
}
Include only hypotheses with confidence of at least 0.7.
""")

DATA_PATTERN = Template("""\
You are an econometrician looking for causal structure in firm-level panel data.

## Summary statistics
$data_summary

## Strongest correlations
$correlations

## Variable groups
- Events: $event_vars
- Risks: $risk_vars
- Financial outcomes: $financial_vars

Use correlations, timing (events precede outcomes), finance theory and
likely confounders. Reply with JSON only:
{
  "causal_patterns": [
    {"source": "<variable>", "target": "<variable>", "confidence": 0.0,
     "reasoning": "<text>", "pattern_type": "temporal|statistical|theoretical"}
  ],
  "spurious_correlations": [
    {"var1": "<variable>", "var2": "<variable>", "likely_confounder": "<text>", "reasoning": "<text>"}
  ]
}
""")

KG_VALIDATOR = Template("""\
You are checking a financial causal graph against knowledge-graph evidence.

## Edges in the current graph
$current_edges

## Required edges from the knowledge graph
$required_edges

## Forbidden edges from the knowledge graph
$forbidden_edges

## Statistical evidence
$statistics

For each knowledge-graph edge judge plausibility of its direction, support in
the statistics and possible mediators or confounders. Flag edges to reverse
or remove and edges the knowledge graph misses. Reply with JSON only:
{
  "edge_assessments": [
    {"source": "<variable>", "target": "<variable>", "kg_status": "required|forbidden",
     "plausibility": 0.0, "statistical_support": 0.0,
     "recommendation": "keep|reverse|remove", "reasoning": "<text>"}
  ],
  "missing_edges": [
    {"source": "<variable>", "target": "<variable>", "confidence": 0.0, "reasoning": "<text>"}
  ]
}
""")

STRUCTURE_REFINER = Template("""\
You are refining a financial causal graph.

## Graph statistics
Nodes: $n_nodes, edges: $n_edges, density: $density, cyclic: $has_cycles, weak components: $n_components

## Structural warnings
Cycles: $n_cycles
Hubs (many children): $hubs
Sinks (many parents): $sinks

## Candidate edges from other modules
$hypotheses

Outcomes should not cause fundamentals and later events cannot cause earlier
ones; prefer the simpler structure. Reply with JSON only:
{
  "edges_to_remove": [{"source": "<variable>", "target": "<variable>", "reason": "<text>"}],
  "edges_to_add": [{"source": "<variable>", "target": "<variable>", "confidence": 0.0, "reason": "<text>"}],
  "edges_to_reverse": [{"current_source": "<variable>", "current_target": "<variable>", "reason": "<text>"}]
}
""")

DOMAIN_EXPERT = Template("""\
You are a corporate-finance economist. Propose causal relationships from
general theory, not from the specific edges below.

## Current graph (up to 40 edges)
$current_edges

## Variables
- Events: $event_vars
- Risks: $risk_vars
- Financial outcomes: $financial_vars
- Geographic exposure: $geographic_vars
- Governance and ESG: $governance_vars

Useful lenses: risk and required return, event timing, revenue / margin /
return transmission channels, and how concentration or geography amplifies
risk. Reply with JSON only:
{
  "domain_hypotheses": [
    {"source": "<variable>", "target": "<variable>", "confidence": 0.0,
     "mechanism": "<text>", "framework": "<text>",
     "expected_sign": "POSITIVE|NEGATIVE", "strength": "STRONG|MODERATE|WEAK"}
  ]
}
""")

# template id -> (template, JSON key holding edge proposals, enabled by default)
TEMPLATES: dict[str, tuple[Template, str, bool]] = {
    "missing_edge_discoverer": (MISSING_EDGE, "hypotheses", True),
    "data_pattern_analyzer": (DATA_PATTERN, "causal_patterns", False),
    "kg_relationship_validator": (KG_VALIDATOR, "missing_edges", False),
    "graph_structure_refiner": (STRUCTURE_REFINER, "edges_to_add", False),
    "domain_expert_reasoner": (DOMAIN_EXPERT, "domain_hypotheses", False),
}

DEFAULT_TEMPLATE = "missing_edge_discoverer"

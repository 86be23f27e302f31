"""Rebuild the bundled evidence and proposal fixtures.

    python tools/build_fixtures.py

Writes ``src/kgcausal/data/kg_evidence.json``, ``llm_proposals.jsonl`` and
``fixture_manifest.json``. The counts below are hand-set to mimic a
filings-derived knowledge graph: well-documented transmission channels get
many strong mentions across many companies, textbook-but-rarely-stated links
get moderate evidence, and implausible reverse directions are mentioned a
handful of times at most.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from kgcausal.catalog import FINANCIAL_CATALOG as CAT, tiers_for  # noqa: E402
from kgcausal.constraints import KgEvidence, classify_edges  # noqa: E402
from kgcausal.providers import ProposalBatch, batch_record, combine, parse_proposals  # noqa: E402
from kgcausal.synthgen import ground_truth  # noqa: E402

DATA = ROOT / "src" / "kgcausal" / "data"

MAX_MENTIONS = 317
MAX_COVERAGE = 96

# (source, target): (strong, moderate, weak, companies)
REQUIRED = {
    ("Market_Risk_Score", "Monthly_Return"): (160, 110, 10, 90),
    ("Revenue_Growth_YoY", "Monthly_Return"): (150, 100, 15, 88),
    ("EBITDA_Margin", "Monthly_Return"): (140, 95, 12, 85),
    ("Supply_Chain_Risk_Score", "Revenue_Growth_YoY"): (138, 173, 6, 91),
    ("Regulatory_Risk_Score", "Monthly_Return"): (120, 110, 20, 80),
    ("Regulatory_Change_Event", "Regulatory_Risk_Score"): (90, 80, 10, 70),
    ("Cyber_Risk_Score", "EBITDA_Margin"): (80, 70, 10, 60),
    ("Supply_Chain_Risk_Score", "EBITDA_Margin"): (70, 60, 15, 55),
    ("Major_Product_Launch", "Revenue_Growth_YoY"): (65, 50, 6, 50),
    ("M_and_A_Event", "EBITDA_Margin"): (60, 55, 8, 45),
    ("Supply_Chain_Risk_Score", "Market_Risk_Score"): (45, 50, 10, 40),
}

SOFT = {
    # true edges with thinner evidence
    ("Governance_Score", "M_and_A_Event"): (8, 12, 5, 10),
    ("Governance_Score", "Cyber_Risk_Score"): (15, 15, 5, 14),
    ("Supplier_Concentration", "Supply_Chain_Risk_Score"): (20, 18, 4, 16),
    ("China_Revenue_Percent", "Supply_Chain_Risk_Score"): (18, 20, 6, 17),
    ("Major_Product_Launch", "Cyber_Risk_Score"): (6, 8, 4, 8),
    ("Carbon_Emissions_Score", "Regulatory_Risk_Score"): (22, 18, 5, 18),
    ("Market_Risk_Score", "Revenue_Growth_YoY"): (24, 20, 6, 17),
    ("Regulatory_Risk_Score", "Revenue_Growth_YoY"): (18, 16, 5, 15),
    ("Regulatory_Risk_Score", "EBITDA_Margin"): (14, 15, 6, 13),
    ("China_Revenue_Percent", "Market_Risk_Score"): (12, 14, 5, 12),
    ("M_and_A_Event", "Debt_to_Equity"): (16, 14, 4, 15),
    ("Debt_to_Equity", "Monthly_Return"): (20, 22, 6, 18),
    # plausible-sounding but absent from the generator
    ("US_Revenue_Percent", "China_Revenue_Percent"): (8, 10, 9, 21),
    ("Europe_Revenue_Percent", "Market_Risk_Score"): (5, 6, 4, 6),
    ("Governance_Score", "EBITDA_Margin"): (6, 8, 5, 7),
    ("Carbon_Emissions_Score", "Monthly_Return"): (4, 6, 3, 5),
}

# reverse-causation claims that show up only in passing
EXTRA_FORBIDDEN = [
    ("Monthly_Return", "Revenue_Growth_YoY"),
    ("Monthly_Return", "Debt_to_Equity"),
]


def forbidden_pairs() -> list[tuple[str, str]]:
    """Every edge pointing from a later causal tier to an earlier one, plus extras."""
    tiers = tiers_for(CAT)
    pairs = [(CAT.name(u), CAT.name(v)) for u in range(len(CAT)) for v in range(len(CAT))
             if tiers[u] > tiers[v]]
    return pairs + EXTRA_FORBIDDEN


def rare_counts(u: int, v: int) -> tuple[int, int, int, int]:
    total = 1 + (7 * u + 3 * v) % 4
    strong = (u + v) % 2 if total > 1 else 0
    weak = total - strong - (total - strong) // 2
    return strong, (total - strong) // 2, weak, 1 + (u * v) % total


def evidence() -> dict:
    edges = []
    for (s, t), (a, b, c, k) in {**REQUIRED, **SOFT}.items():
        edges.append({"source": s, "target": t, "n_strong": a, "n_moderate": b, "n_weak": c, "n_companies": k})
    for s, t in forbidden_pairs():
        a, b, c, k = rare_counts(CAT.idx(s), CAT.idx(t))
        edges.append({"source": s, "target": t, "n_strong": a, "n_moderate": b, "n_weak": c, "n_companies": k})
    edges.sort(key=lambda e: (CAT.idx(e["source"]), CAT.idx(e["target"])))
    return {"edges": edges, "max_mentions": MAX_MENTIONS, "max_coverage": MAX_COVERAGE}


def _h(src, tgt, conf, mech, mtype, sign, strength="MODERATE"):
    return {"source": src, "target": tgt, "confidence": conf, "mechanism": mech,
            "mechanism_type": mtype, "expected_coefficient_sign": sign, "expected_strength": strength,
            "alternative_explanations": "Common exposure to the business cycle."}


MR, RG, EB = "Monthly_Return", "Revenue_Growth_YoY", "EBITDA_Margin"

# five recorded runs; each run answers the three default targets
RUNS = [
    {
        MR: [_h("Debt_to_Equity", MR, 0.85, "Leverage raises the cost of equity.", "FUNDAMENTAL", "NEGATIVE", "STRONG"),
             _h("Regulatory_Risk_Score", MR, 0.9, "Regulatory exposure lifts discount rates.", "FUNDAMENTAL", "NEGATIVE"),
             _h("Governance_Score", MR, 0.72, "Investors pay for good governance.", "FUNDAMENTAL", "POSITIVE")],
        RG: [_h("US_Revenue_Percent", RG, 0.8, "Exposure to the faster-growing US market.", "RISK_TRANSMISSION", "POSITIVE"),
             _h("Customer_Concentration", RG, 0.78, "Dependence on few buyers caps volume growth.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Major_Product_Launch", RG, 0.9, "New products add sales.", "EVENT", "POSITIVE", "STRONG")],
        EB: [_h("Customer_Concentration", EB, 0.82, "Large customers negotiate prices down.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Supply_Chain_Risk_Score", EB, 0.8, "Disruptions raise input costs.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Cyber_Risk_Score", EB, 0.75, "Incidents bring remediation costs.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Regulatory_Change_Event", EB, 0.65, "Compliance costs after new rules.", "EVENT", "NEGATIVE")],
    },
    {
        MR: [_h("Debt_to_Equity", MR, 0.8, "Higher leverage, higher required return, lower price.", "FUNDAMENTAL", "NEGATIVE"),
             _h("Carbon_Emissions_Score", MR, 0.7, "Transition risk is priced.", "RISK_TRANSMISSION", "NEGATIVE")],
        RG: [_h("US_Revenue_Percent", RG, 0.75, "US demand supports growth.", "RISK_TRANSMISSION", "POSITIVE"),
             _h("Market_Risk_Score", RG, 0.88, "Market stress depresses demand.", "RISK_TRANSMISSION", "NEGATIVE", "STRONG")],
        EB: [_h("Customer_Concentration", EB, 0.85, "Buyer power squeezes margins.", "RISK_TRANSMISSION", "NEGATIVE", "STRONG"),
             _h("Supply_Chain_Risk_Score", EB, 0.78, "Shortages push up unit costs.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Governance_Score", EB, 0.7, "Better oversight trims waste.", "FUNDAMENTAL", "POSITIVE")],
    },
    {
        MR: [_h("Debt_to_Equity", MR, 0.88, "Leverage amplifies downside and raises the discount rate.", "FUNDAMENTAL", "NEGATIVE", "STRONG"),
             _h("EBITDA_Margin", MR, 0.92, "Profitability is priced.", "FUNDAMENTAL", "POSITIVE", "STRONG")],
        RG: [_h("US_Revenue_Percent", RG, 0.72, "US end-markets grow faster.", "RISK_TRANSMISSION", "POSITIVE"),
             _h("China_Revenue_Percent", RG, 0.74, "Emerging-market demand.", "RISK_TRANSMISSION", "POSITIVE")],
        EB: [_h("Supply_Chain_Risk_Score", EB, 0.83, "Input disruptions hit gross margin.", "RISK_TRANSMISSION", "NEGATIVE", "STRONG"),
             _h("Cyber_Risk_Score", EB, 0.8, "Breach costs and downtime.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Customer_Concentration", EB, 0.76, "Concentrated buyers demand discounts.", "RISK_TRANSMISSION", "NEGATIVE")],
    },
    {
        MR: [_h("Debt_to_Equity", MR, 0.82, "Financial distress risk is priced.", "FUNDAMENTAL", "NEGATIVE"),
             _h("Governance_Score", MR, 0.75, "Governance premium.", "FUNDAMENTAL", "POSITIVE")],
        RG: [_h("Customer_Concentration", RG, 0.8, "Few customers limit expansion.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("US_Revenue_Percent", RG, 0.78, "Growth of the US market.", "RISK_TRANSMISSION", "POSITIVE")],
        EB: [_h("Customer_Concentration", EB, 0.8, "Pricing pressure from key accounts.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Supply_Chain_Risk_Score", EB, 0.72, "Costlier sourcing.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Supplier_Concentration", EB, 0.71, "Single suppliers extract rents.", "RISK_TRANSMISSION", "NEGATIVE")],
    },
    {
        MR: [_h("Debt_to_Equity", MR, 0.86, "Leverage and the cost of capital.", "FUNDAMENTAL", "NEGATIVE", "STRONG"),
             _h("Firm_Size", MR, 0.9, "Size premium.", "FUNDAMENTAL", "NEGATIVE")],
        RG: [_h("US_Revenue_Percent", RG, 0.81, "US consumer strength.", "RISK_TRANSMISSION", "POSITIVE")],
        EB: [_h("Cyber_Risk_Score", EB, 0.77, "Security spending and incident losses.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Supply_Chain_Risk_Score", EB, 0.8, "Logistics costs.", "RISK_TRANSMISSION", "NEGATIVE"),
             _h("Customer_Concentration", EB, 0.84, "Customer bargaining power.", "RISK_TRANSMISSION", "NEGATIVE", "STRONG"),
             _h("Monthly_Return", EB, 0.7, "Strong shares lower financing costs.", "FUNDAMENTAL", "POSITIVE")],
    },
]

PROVIDER = "missing_edge_discoverer"


def _raw(run: int, target: str, hyps: list[dict]) -> str:
    body = json.dumps({"hypotheses": hyps}, indent=2)
    if (run + len(target)) % 3 == 0:
        return f"Here are the direct drivers I would add for {target}.\n\n```json\n{body}\n```\n"
    if (run + len(target)) % 3 == 1:
        return f"After weighing direct mechanisms only:\n{body}\nOther candidates looked indirect."
    return body


def proposals() -> list[dict]:
    lines = []
    for r, run in enumerate(RUNS):
        targets = [MR, RG, EB]
        raws = [_raw(r, t, run[t]) for t in targets]
        parts = [parse_proposals(x, CAT, PROVIDER, r) for x in raws]
        batch: ProposalBatch = combine(parts, PROVIDER, r)
        lines.append(batch_record(batch, raws, targets))
    return lines


def manifest(ev: dict) -> dict:
    cs = classify_edges(KgEvidence.from_dict(ev), CAT)
    truth = set(ground_truth().dag.edges)
    soft = set(cs.soft)
    return {
        "required": len(cs.required),
        "forbidden": len(cs.forbidden),
        "soft": len(soft),
        "truth_edges": len(truth),
        "truth_covered_by_required": len(truth & cs.required),
        "truth_covered_by_kg": len(truth & (cs.required | soft)),
        "forbidden_true_edges": len(truth & cs.forbidden),
        "llm_runs": len(RUNS),
    }


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    ev = evidence()
    (DATA / "kg_evidence.json").write_text(json.dumps(ev, indent=2) + "\n")
    with open(DATA / "llm_proposals.jsonl", "w", encoding="utf-8") as fh:
        for rec in proposals():
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    man = manifest(ev)
    (DATA / "fixture_manifest.json").write_text(json.dumps(man, indent=2) + "\n")
    print(json.dumps(man, indent=2))


if __name__ == "__main__":
    main()

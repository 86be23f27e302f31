"""Walk through how KG evidence becomes hard and soft edge constraints.

Run with ``python3 demos/kg_constraints.py``. Prints the strongest KG edges
with their score components, the required/forbidden/soft split, and the
per-edge significance levels and thresholds the learners derive from them.
"""
from kgcausal import FINANCIAL_CATALOG as CAT, KgEvidence, classify_edges
from kgcausal.constraints import composite_score, edge_weight, score_components
from kgcausal.notears import edge_thresholds
from kgcausal.pc import adaptive_alpha
from kgcausal.pipeline import bundled_path

ev = KgEvidence.load(bundled_path("kg_evidence.json"))
cs = classify_edges(ev, CAT)
print(f"{len(ev.edges)} KG edges; max mentions {ev.max_mentions}, max coverage {ev.max_coverage} firms\n")

print(f"{'edge':<58}{'strength':>9}{'freq':>7}{'cov':>7}{'score':>7}  class")
ranked = sorted(ev.edges, key=lambda e: -composite_score(e, ev.max_mentions, ev.max_coverage))
for e in ranked[:12]:
    s, f, c = score_components(e.n_strong, e.n_moderate, e.n_weak, e.n_companies, ev.max_mentions, ev.max_coverage)
    key = (CAT.idx(e.source), CAT.idx(e.target))
    kind = "required" if key in cs.required else "forbidden" if key in cs.forbidden else "soft"
    print(f"{e.source + ' -> ' + e.target:<58}{s:>9.3f}{f:>7.3f}{c:>7.3f}"
          f"{(s * f * c) ** (1 / 3):>7.3f}  {kind}")

print(f"\nrequired {len(cs.required)}, forbidden {len(cs.forbidden)}, soft {len(cs.soft)}")
print("(the forbidden set also contains every pair the KG marks as implausible, not only rare edges)\n")

tau = edge_thresholds(cs)
print(f"{'edge':<58}{'w':>6}{'PC alpha':>10}{'NOTEARS tau':>13}")
examples = sorted(cs.required)[:2] + sorted(cs.soft)[:3] + sorted(cs.forbidden)[:1]
for u, v in examples:
    w = edge_weight(cs, u, v)
    alpha = f"{adaptive_alpha(0.15, w):.4f}" if w > -2 else "removed"
    print(f"{CAT.name(u) + ' -> ' + CAT.name(v):<58}{w:>6.2f}{alpha:>10}{tau[u, v]:>13.4f}")

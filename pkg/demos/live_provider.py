"""Record LLM edge proposals from an HTTP endpoint and replay them.

Run with ``python3 demos/live_provider.py``. With the endpoint environment
variables set (KGCAUSAL_LLM_ENDPOINT, KGCAUSAL_LLM_API_KEY,
KGCAUSAL_LLM_MODEL) it queries the real endpoint; otherwise it serves canned
answers from an in-process mock so the flow can be seen offline. Either way
the batch is appended to a JSONL fixture and read back with ``replay``.
"""
import json
import os
import tempfile
from pathlib import Path

import httpx

from kgcausal import FINANCIAL_CATALOG as CAT, DirectedGraph
from kgcausal.providers import EndpointConfig, build_context, fetch_live, live_batch, render_prompt, replay
from kgcausal.synthgen import population_covariance

TARGETS = ("Monthly_Return", "Revenue_Growth_YoY", "EBITDA_Margin")

CANNED = {
    "Monthly_Return": [{"source": "Market_Risk_Score", "target": "Monthly_Return", "confidence": 0.86,
                        "mechanism": "risk premium", "mechanism_type": "RISK_TRANSMISSION"},
                       {"source": "Cyber_Risk_Score", "target": "Monthly_Return", "confidence": 0.55,
                        "mechanism": "breach headlines"}],
    "Revenue_Growth_YoY": [{"source": "Major_Product_Launch", "target": "Revenue_Growth_YoY",
                            "confidence": 0.9, "mechanism": "new products", "mechanism_type": "EVENT"}],
    "EBITDA_Margin": [],
}


def mock_client() -> httpx.Client:
    def handler(request):
        prompt = json.loads(request.content)["messages"][0]["content"]
        target = next(t for t in TARGETS if f"## Target variable: {t}\n" in prompt)
        text = "Here is my analysis.\n```json\n" + json.dumps({"hypotheses": CANNED[target]}) + "\n```"
        return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})
    return httpx.Client(transport=httpx.MockTransport(handler))


if os.environ.get("KGCAUSAL_LLM_ENDPOINT"):
    cfg = EndpointConfig.from_env()
    fetch = fetch_live
    print(f"querying {cfg.url} with model {cfg.model}")
else:
    cfg = EndpointConfig("http://mock.invalid/v1/chat/completions", "none", "mock")
    client = mock_client()
    fetch = lambda c, prompt: fetch_live(c, prompt, client=client)  # noqa: E731
    print("no endpoint configured; using the offline mock")

# context: current parents from a KG-only graph and the strongest correlations
corr = population_covariance()
graph = DirectedGraph(len(CAT), [(CAT.idx("Revenue_Growth_YoY"), CAT.idx("Monthly_Return"))])
contexts = {t: build_context(t, graph, corr) for t in TARGETS}
print("\nfirst lines of the Monthly_Return prompt:")
print("\n".join(render_prompt("missing_edge_discoverer", "Monthly_Return", contexts["Monthly_Return"])
                .splitlines()[:12]))

out = Path(tempfile.mkdtemp()) / "recorded.jsonl"
batch = live_batch(cfg, TARGETS, contexts, run_index=0, fixture_path=out, fetch=fetch)
print(f"\nkept {len(batch)} proposals, dropped {len(batch.dropped)}:")
for p in batch.proposals:
    print(f"  {p.source} -> {p.target} (confidence {p.confidence})")
for d in batch.dropped:
    print(f"  dropped: {d.reason}")
assert replay(out, 0) == batch
print(f"\nreplayed batch matches; fixture written to {out}")

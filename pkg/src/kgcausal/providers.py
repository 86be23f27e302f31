"""LLM edge proposals: prompt rendering, response parsing, live and replay providers.

A *batch* is the set of proposals one provider produced in one run, over
all target variables. Replay fixtures are JSON Lines, one batch per line::

    {"provider_id": ..., "run_index": 0, "targets": [...],
     "raw_response": ["<text for target 1>", ...],
     "parsed": {"hypotheses": [...]}}

``parsed`` holds the proposals that survived validation; ``replay`` returns
exactly those.
"""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import httpx
import numpy as np

from .catalog import EVENTS, FINANCIAL_CATALOG, RISKS, VariableCatalog
from .errors import (AuthError, ConfigError, IndexOutOfRange, MissingFixture, MissingPlaceholder,
                     ParseError, ProviderError, RateLimitError, TransportError)
from .templates import DEFAULT_TEMPLATE, TEMPLATES

logger = logging.getLogger(__name__)

MIN_CONFIDENCE = 0.7
MECHANISM_TYPES = ("FUNDAMENTAL", "RISK_TRANSMISSION", "EVENT")
SIGNS = ("POSITIVE", "NEGATIVE")
STRENGTHS = ("STRONG", "MODERATE")

ENV_ENDPOINT = "KGCAUSAL_LLM_ENDPOINT"
ENV_API_KEY = "KGCAUSAL_LLM_API_KEY"
ENV_MODEL = "KGCAUSAL_LLM_MODEL"


@dataclass(frozen=True)
class EdgeProposal:
    source: str
    target: str
    confidence: float
    mechanism: str = ""
    mechanism_type: str | None = None
    expected_sign: str | None = None
    expected_strength: str | None = None

    def to_dict(self) -> dict:
        d = {"source": self.source, "target": self.target, "confidence": self.confidence,
             "mechanism": self.mechanism}
        if self.mechanism_type is not None:
            d["mechanism_type"] = self.mechanism_type
        if self.expected_sign is not None:
            d["expected_coefficient_sign"] = self.expected_sign
        if self.expected_strength is not None:
            d["expected_strength"] = self.expected_strength
        return d


@dataclass(frozen=True)
class Dropped:
    entry: object
    reason: str


@dataclass(frozen=True)
class ProposalBatch:
    proposals: tuple[EdgeProposal, ...]
    provider_id: str = ""
    run_index: int = 0
    dropped: tuple[Dropped, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.proposals)

    def edges(self) -> list[tuple[str, str]]:
        return [(p.source, p.target) for p in self.proposals]


def _dedupe(props: Sequence[EdgeProposal]) -> tuple[EdgeProposal, ...]:
    """Keep the highest-confidence proposal per (source, target); first wins ties."""
    best: dict[tuple[str, str], EdgeProposal] = {}
    for p in props:
        k = (p.source, p.target)
        if k not in best or p.confidence > best[k].confidence:
            best[k] = p
    return tuple(best.values())


# ----------------------------------------------------------------------
# prompts


@dataclass(frozen=True)
class PromptContext:
    drivers: Sequence[str] = ()
    correlations: Sequence[tuple[str, float]] = ()
    risk_vars: Sequence[str] = RISKS
    event_vars: Sequence[str] = EVENTS
    pattern_guidance: str = ""
    extra: Mapping[str, str] = field(default_factory=dict)


def build_context(target: str, graph, corr: np.ndarray, catalog: VariableCatalog = FINANCIAL_CATALOG,
                  top_k: int = 8) -> PromptContext:
    """Current parents of ``target`` plus its strongest-correlated non-parents."""
    t = catalog.idx(target)
    parents = sorted(graph.parents(t)) if graph is not None else []
    cands = [j for j in range(len(catalog)) if j != t and j not in parents]
    cands.sort(key=lambda j: (-round(abs(float(corr[t, j])), 12), j))
    return PromptContext(
        drivers=[catalog.name(p) for p in parents],
        correlations=[(catalog.name(j), float(corr[t, j])) for j in cands[:top_k]],
    )


def render_prompt(template_id: str, target_variable: str, context: PromptContext | None = None) -> str:
    """Fill a template; identical inputs give byte-identical text."""
    if template_id not in TEMPLATES:
        raise ConfigError(f"unknown template {template_id!r}; known: {sorted(TEMPLATES)}")
    tpl = TEMPLATES[template_id][0]
    ctx = context or PromptContext()
    drivers = "\n".join(f"- {d}" for d in ctx.drivers) if ctx.drivers else "None identified"
    corr = "\n".join(f"- {n}: r = {r:+.3f}" for n, r in ctx.correlations) if ctx.correlations else "None"
    values = {
        "target_variable": target_variable,
        "sources_to_target": drivers,
        "correlations": corr,
        "pattern_guidance": ctx.pattern_guidance,
        "risk_vars": ", ".join(ctx.risk_vars),
        "event_vars": ", ".join(ctx.event_vars),
        **ctx.extra,
    }
    try:
        return tpl.substitute(values)
    except KeyError as e:
        raise MissingPlaceholder(f"template {template_id!r} needs {e.args[0]!r}") from None


# ----------------------------------------------------------------------
# parsing


def _json_candidates(raw: str):
    dec = json.JSONDecoder()
    i = raw.find("{")
    while i != -1:
        try:
            obj, _ = dec.raw_decode(raw, i)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict):
            yield obj
        i = raw.find("{", i + 1)


def extract_payload(raw: str, key: str = "hypotheses") -> dict:
    """First JSON object in ``raw`` whose ``key`` is a list.

    Models tend to wrap JSON in prose or markdown fences; scanning every
    ``{`` with a raw decoder handles both.
    """
    if not isinstance(raw, str):
        raise ParseError("response is not text")
    for obj in _json_candidates(raw):
        if isinstance(obj.get(key), list):
            return obj
    raise ParseError(f"no JSON object with a {key!r} array found")


def _enum(entry: Mapping, keys: Sequence[str], allowed: Sequence[str]):
    for k in keys:
        if k in entry and entry[k] is not None:
            v = str(entry[k]).strip().upper()
            if v not in allowed:
                raise ValueError(f"{k}={entry[k]!r} not in {allowed}")
            return v
    return None


def validate_entry(entry, catalog: VariableCatalog, min_confidence: float = MIN_CONFIDENCE) -> EdgeProposal:
    """Return a proposal or raise ValueError with the drop reason."""
    if not isinstance(entry, Mapping):
        raise ValueError("entry is not an object")
    src, tgt = entry.get("source"), entry.get("target")
    for role, v in (("source", src), ("target", tgt)):
        if not isinstance(v, str) or v not in catalog:
            raise ValueError(f"unknown {role} variable {v!r}")
    if src == tgt:
        raise ValueError("self-loop")
    conf = entry.get("confidence")
    if isinstance(conf, bool) or not isinstance(conf, (int, float)) or not 0.0 <= conf <= 1.0:
        raise ValueError(f"invalid confidence {conf!r}")
    if conf < min_confidence:
        raise ValueError(f"confidence {conf} below {min_confidence}")
    return EdgeProposal(
        src, tgt, float(conf), str(entry.get("mechanism", entry.get("reasoning", entry.get("reason", "")))),
        _enum(entry, ("mechanism_type",), MECHANISM_TYPES),
        _enum(entry, ("expected_coefficient_sign", "expected_sign"), SIGNS),
        _enum(entry, ("expected_strength",), STRENGTHS),
    )


def parse_proposals(raw: str, catalog: VariableCatalog = FINANCIAL_CATALOG, provider_id: str = "",
                    run_index: int = 0, key: str = "hypotheses",
                    min_confidence: float = MIN_CONFIDENCE) -> ProposalBatch:
    """Validate the proposals in one model response.

    Entries with unknown variables, self-loops, malformed fields or
    confidence below ``min_confidence`` are dropped; the reasons are kept on
    the batch and logged.
    """
    payload = extract_payload(raw, key)
    kept, dropped = [], []
    for entry in payload[key]:
        try:
            kept.append(validate_entry(entry, catalog, min_confidence))
        except ValueError as e:
            dropped.append(Dropped(entry, str(e)))
            logger.info("dropped proposal %r: %s", entry, e)
    return ProposalBatch(_dedupe(kept), provider_id, run_index, tuple(dropped))


def combine(batches: Sequence[ProposalBatch], provider_id: str = "", run_index: int = 0) -> ProposalBatch:
    props = [p for b in batches for p in b.proposals]
    dropped = tuple(d for b in batches for d in b.dropped)
    return ProposalBatch(_dedupe(props), provider_id, run_index, dropped)


# ----------------------------------------------------------------------
# live provider


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    api_key: str
    model: str
    temperature: float = 0.6
    timeout: float = 60.0
    max_attempts: int = 3
    backoff: float = 1.0

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None, **overrides) -> "EndpointConfig":
        env = os.environ if env is None else env
        missing = [k for k in (ENV_ENDPOINT, ENV_API_KEY, ENV_MODEL) if not env.get(k)]
        if missing:
            raise ConfigError(f"live provider needs environment variables {', '.join(missing)}")
        return cls(env[ENV_ENDPOINT], env[ENV_API_KEY], env[ENV_MODEL], **overrides)


def _assistant_text(body) -> str:
    try:
        return body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise ProviderError("response has no choices[0].message.content") from None


def fetch_live(cfg: EndpointConfig, prompt: str, client: httpx.Client | None = None,
               sleep=time.sleep, log_path=None) -> str:
    """POST one chat request and return the assistant text.

    Transport failures, 5xx and 429 are retried with exponential backoff up
    to ``cfg.max_attempts``; 401/403 fail at once. When ``log_path`` is set
    the exchange is appended there as a JSON line.
    """
    payload = {"model": cfg.model, "messages": [{"role": "user", "content": prompt}],
               "temperature": cfg.temperature}
    headers = {"Authorization": f"Bearer {cfg.api_key}", "Content-Type": "application/json"}
    own = client is None
    client = client or httpx.Client(timeout=cfg.timeout)
    last: Exception | None = None
    try:
        for attempt in range(cfg.max_attempts):
            if attempt:
                sleep(cfg.backoff * 2 ** (attempt - 1))
            try:
                resp = client.post(cfg.url, json=payload, headers=headers)
            except httpx.HTTPError as e:
                last = TransportError(f"attempt {attempt + 1}: {e}")
                logger.warning("%s", last)
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code} from {cfg.url}")
            if resp.status_code == 429:
                last = RateLimitError(f"HTTP 429 from {cfg.url}")
                logger.warning("rate limited (attempt %d)", attempt + 1)
                continue
            if resp.status_code >= 500:
                last = TransportError(f"HTTP {resp.status_code} from {cfg.url}")
                logger.warning("%s (attempt %d)", last, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise ProviderError(f"HTTP {resp.status_code} from {cfg.url}: {resp.text[:200]}")
            text = _assistant_text(resp.json())
            if log_path is not None:
                with open(log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"request": payload, "response": text}, sort_keys=True) + "\n")
            return text
    finally:
        if own:
            client.close()
    assert last is not None
    raise last


def live_batch(cfg: EndpointConfig, targets: Sequence[str], contexts: Mapping[str, PromptContext],
               run_index: int = 0, provider_id: str = DEFAULT_TEMPLATE, fixture_path=None,
               catalog: VariableCatalog = FINANCIAL_CATALOG, max_workers: int = 3,
               fetch=fetch_live) -> ProposalBatch:
    """Query every target, parse, merge, and optionally record a replay line."""
    key = TEMPLATES[provider_id][1]
    prompts = [render_prompt(provider_id, t, contexts.get(t)) for t in targets]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        raws = list(pool.map(lambda p: fetch(cfg, p), prompts))
    parts = []
    for raw in raws:
        try:
            parts.append(parse_proposals(raw, catalog, provider_id, run_index, key))
        except ParseError as e:
            logger.warning("unparseable response for run %d: %s", run_index, e)
    batch = combine(parts, provider_id, run_index)
    if fixture_path is not None:
        append_fixture(fixture_path, batch, raws, targets)
    return batch


# ----------------------------------------------------------------------
# replay provider


def batch_record(batch: ProposalBatch, raws: Sequence[str], targets: Sequence[str]) -> dict:
    return {
        "provider_id": batch.provider_id,
        "run_index": batch.run_index,
        "targets": list(targets),
        "raw_response": list(raws),
        "parsed": {"hypotheses": [p.to_dict() for p in batch.proposals]},
    }


def append_fixture(path, batch: ProposalBatch, raws: Sequence[str], targets: Sequence[str]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(batch_record(batch, raws, targets), sort_keys=True) + "\n")


def load_fixture(path) -> list[dict]:
    p = Path(path)
    if not p.is_file():
        raise MissingFixture(f"replay fixture not found: {p}")
    return [json.loads(line) for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]


def replay(path, run_index: int, catalog: VariableCatalog = FINANCIAL_CATALOG,
           provider_id: str | None = None) -> ProposalBatch:
    """The recorded batch for ``run_index`` (optionally of one provider)."""
    records = [r for r in load_fixture(path) if provider_id is None or r["provider_id"] == provider_id]
    for r in records:
        if int(r["run_index"]) == run_index:
            props = tuple(validate_entry(h, catalog, 0.0) for h in r["parsed"]["hypotheses"])
            return ProposalBatch(props, r["provider_id"], run_index)
    raise IndexOutOfRange(f"run {run_index} not in fixture {path} ({len(records)} batches)")


def n_runs(path, provider_id: str | None = None) -> int:
    return len([r for r in load_fixture(path) if provider_id is None or r["provider_id"] == provider_id])

import json

import httpx
import pytest
from hypothesis import given, strategies as st

from kgcausal.catalog import FINANCIAL_CATALOG as CAT
from kgcausal.errors import (AuthError, ConfigError, IndexOutOfRange, MissingFixture, MissingPlaceholder,
                             ParseError, RateLimitError, TransportError)
from kgcausal.providers import (EndpointConfig, PromptContext, live_batch, load_fixture, n_runs, parse_proposals,
                                render_prompt, replay, fetch_live)
from kgcausal.templates import DEFAULT_TEMPLATE, TEMPLATES

HYP = {"source": "Regulatory_Risk_Score", "target": "Monthly_Return", "confidence": 0.82,
       "mechanism": "compliance costs", "mechanism_type": "RISK_TRANSMISSION",
       "expected_coefficient_sign": "NEGATIVE", "expected_strength": "MODERATE"}


def _payload(*hyps):
    return json.dumps({"hypotheses": list(hyps)})


def test_empty_drivers_render_none_identified():
    text = render_prompt(DEFAULT_TEMPLATE, "Monthly_Return")
    assert "None identified" in text
    assert "Monthly_Return" in text


def test_unknown_template():
    with pytest.raises(ConfigError):
        render_prompt("no_such_template", "Monthly_Return")


def test_prompt_is_deterministic():
    ctx = PromptContext(drivers=["EBITDA_Margin"], correlations=[("Revenue_Growth_YoY", 0.41)])
    assert render_prompt(DEFAULT_TEMPLATE, "Monthly_Return", ctx) == render_prompt(
        DEFAULT_TEMPLATE, "Monthly_Return", ctx)
    assert "- EBITDA_Margin" in render_prompt(DEFAULT_TEMPLATE, "Monthly_Return", ctx)


def test_optional_templates_need_their_placeholders():
    names = ("data_summary", "financial_vars", "current_edges", "forbidden_edges", "required_edges",
             "statistics", "density", "has_cycles", "hubs", "hypotheses", "n_components", "n_cycles",
             "n_edges", "n_nodes", "sinks", "geographic_vars", "governance_vars")
    full = PromptContext(extra={k: f"<{k}>" for k in names})
    for tid in TEMPLATES:
        if tid == DEFAULT_TEMPLATE:
            continue
        with pytest.raises(MissingPlaceholder):
            render_prompt(tid, "EBITDA_Margin")
        text = render_prompt(tid, "EBITDA_Margin", full)
        assert any(f"<{k}>" in text for k in names)


def test_single_hypothesis():
    batch = parse_proposals(_payload(HYP))
    assert len(batch) == 1
    p = batch.proposals[0]
    assert (p.source, p.target, p.confidence, p.expected_sign) == (
        "Regulatory_Risk_Score", "Monthly_Return", 0.82, "NEGATIVE")


def test_low_confidence_dropped_with_reason():
    batch = parse_proposals(_payload({**HYP, "confidence": 0.65}))
    assert len(batch) == 0
    assert "below" in batch.dropped[0].reason


def test_unknown_variable_and_self_loop_dropped():
    batch = parse_proposals(_payload({**HYP, "source": "Moon_Phase"}, {**HYP, "source": "Monthly_Return"}))
    assert len(batch) == 0
    assert [d.reason for d in batch.dropped][1] == "self-loop"


def test_fenced_and_prose_wrapped_payloads():
    fenced = "Here are my hypotheses:\n```json\n" + _payload(HYP) + "\n```\nLet me know."
    assert parse_proposals(fenced).edges() == [("Regulatory_Risk_Score", "Monthly_Return")]
    # a stray brace object before the payload is skipped
    prose = 'Note {"unrelated": 1} then ' + _payload(HYP)
    assert len(parse_proposals(prose)) == 1


def test_no_payload_is_parse_error():
    with pytest.raises(ParseError):
        parse_proposals("I could not find any new edges.")


def test_duplicates_keep_max_confidence():
    batch = parse_proposals(_payload(HYP, {**HYP, "confidence": 0.9}, {**HYP, "confidence": 0.75}))
    assert [p.confidence for p in batch.proposals] == [0.9]


@given(st.lists(st.fixed_dictionaries({
    "source": st.sampled_from([*CAT.names, "Unknown_Var", ""]),
    "target": st.sampled_from([*CAT.names, "Unknown_Var"]),
    "confidence": st.floats(0, 1),
}), max_size=8))
def test_parsed_proposals_stay_in_catalog(hyps):
    batch = parse_proposals(_payload(*hyps))
    for p in batch.proposals:
        assert p.source in CAT and p.target in CAT and p.source != p.target
        assert p.confidence >= 0.7
    valid = [h for h in hyps
             if h["source"] in CAT and h["target"] in CAT and h["source"] != h["target"] and h["confidence"] >= 0.7]
    assert set(batch.edges()) == {(h["source"], h["target"]) for h in valid}
    assert len(batch.dropped) == len(hyps) - len(valid)


# ----------------------------------------------------------------------
# live provider over a mock transport

CFG = EndpointConfig("https://llm.test/v1/chat", "key", "m", backoff=0.01)


def _reply(text):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_fetch_returns_text_and_logs(tmp_path):
    seen = []

    def handler(request):
        seen.append(json.loads(request.content))
        assert request.headers["authorization"] == "Bearer key"
        return _reply("hello")

    log = tmp_path / "log.jsonl"
    assert fetch_live(CFG, "prompt", _client(handler), sleep=lambda s: None, log_path=log) == "hello"
    assert seen[0]["messages"] == [{"role": "user", "content": "prompt"}]
    assert seen[0]["temperature"] == 0.6
    assert json.loads(log.read_text())["response"] == "hello"


def test_unreachable_endpoint_retries_three_times():
    calls, waits = [], []

    def handler(request):
        calls.append(1)
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(TransportError):
        fetch_live(CFG, "p", _client(handler), sleep=waits.append)
    assert len(calls) == 3
    assert waits == [0.01, 0.02]


def test_auth_error_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    with pytest.raises(AuthError):
        fetch_live(CFG, "p", _client(handler), sleep=lambda s: None)
    assert len(calls) == 1


def test_rate_limit_then_success():
    responses = iter([httpx.Response(429), httpx.Response(429), _reply("ok")])
    assert fetch_live(CFG, "p", _client(lambda r: next(responses)), sleep=lambda s: None) == "ok"


def test_rate_limit_exhausted():
    with pytest.raises(RateLimitError):
        fetch_live(CFG, "p", _client(lambda r: httpx.Response(429)), sleep=lambda s: None)


def test_endpoint_config_from_env():
    with pytest.raises(ConfigError):
        EndpointConfig.from_env({})
    cfg = EndpointConfig.from_env({"KGCAUSAL_LLM_ENDPOINT": "u", "KGCAUSAL_LLM_API_KEY": "k",
                                   "KGCAUSAL_LLM_MODEL": "m"})
    assert (cfg.url, cfg.model, cfg.max_attempts) == ("u", "m", 3)


def test_live_batch_records_a_replayable_line(tmp_path):
    def fetch(cfg, prompt):
        return _payload(HYP) if "Monthly_Return" in prompt else "no payload here"

    path = tmp_path / "rec.jsonl"
    batch = live_batch(CFG, ["Monthly_Return", "EBITDA_Margin"], {}, run_index=3, fixture_path=path, fetch=fetch)
    assert batch.edges() == [("Regulatory_Risk_Score", "Monthly_Return")]
    assert replay(path, 3) == batch


# ----------------------------------------------------------------------
# replay


def test_replay_bundled_run_zero(fixture_path):
    rec = load_fixture(fixture_path)[0]
    batch = replay(fixture_path, 0)
    assert [p.to_dict()["source"] for p in batch.proposals] == [h["source"] for h in rec["parsed"]["hypotheses"]]
    assert [p.confidence for p in batch.proposals] == [h["confidence"] for h in rec["parsed"]["hypotheses"]]
    assert replay(fixture_path, 0) == batch


def test_replay_out_of_range(fixture_path):
    assert n_runs(fixture_path) == 5
    with pytest.raises(IndexOutOfRange):
        replay(fixture_path, 7)


def test_missing_fixture(tmp_path):
    with pytest.raises(MissingFixture):
        replay(tmp_path / "absent.jsonl", 0)

"""Shared fixtures and the acceptance-criterion summary."""
from __future__ import annotations

import pytest

from kgcausal.catalog import FINANCIAL_CATALOG as CAT
from kgcausal.constraints import KgEvidence, classify_edges, merge_with_proposals
from kgcausal.pipeline import bundled_path
from kgcausal.providers import n_runs, replay
from kgcausal.synthgen import GenConfig, aggregate_cross_section, generate_panel

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if marker:
        n, text = marker
        _criteria[n] = (text, "PASS" if report.outcome == "passed" else "FAIL")


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        text, outcome = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {outcome}  {text}")


@pytest.fixture(scope="session")
def panel():
    return generate_panel(GenConfig(seed=42))


@pytest.fixture(scope="session")
def data(panel):
    return aggregate_cross_section(panel)


@pytest.fixture(scope="session")
def kg_constraints():
    return classify_edges(KgEvidence.load(bundled_path("kg_evidence.json")), CAT)


@pytest.fixture(scope="session")
def fixture_path():
    return bundled_path("llm_proposals.jsonl")


@pytest.fixture(scope="session")
def mode_constraints(kg_constraints, fixture_path):
    """Constraint sets per mode; LLM modes hold one set per recorded run."""
    batches = [replay(fixture_path, r) for r in range(n_runs(fixture_path))]
    return {
        "baseline": [None],
        "kg": [kg_constraints],
        "llm": [merge_with_proposals(None, b.proposals, CAT) for b in batches],
        "kg+llm": [merge_with_proposals(kg_constraints, b.proposals, CAT) for b in batches],
    }

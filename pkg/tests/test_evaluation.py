import math

import pytest
from hypothesis import given, strategies as st

from kgcausal.errors import CatalogMismatch
from kgcausal.evaluation import (HEADER, RecoveryMetrics, aggregate_runs, comparison_rows, comparison_table,
                                 score_graph, summaries_json)
from kgcausal.graph import DirectedGraph
from kgcausal.synthgen import ground_truth

A, B, C = range(3)


def _metrics(f1):
    return RecoveryMetrics(0, 0, 0, f1, f1, f1, 0)


def test_perfect_match():
    g = ground_truth().dag
    m = score_graph(g, g)
    assert (m.precision, m.recall, m.f1, m.skeleton_f1) == (1.0, 1.0, 1.0, 1.0)


def test_hand_counted_example():
    m = score_graph(DirectedGraph(3, [(A, B), (B, C)]), DirectedGraph(3, [(A, B), (C, B)]))
    assert (m.true_positives, m.false_positives, m.false_negatives) == (1, 1, 1)
    assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)
    # the reversed edge still matches on the skeleton
    assert m.skeleton_f1 == 1.0


def test_empty_prediction():
    m = score_graph(DirectedGraph(3), DirectedGraph(3, [(A, B)]))
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)


def test_size_mismatch():
    with pytest.raises(CatalogMismatch):
        score_graph(DirectedGraph(3), DirectedGraph(4))


@given(st.integers(2, 7).flatmap(lambda n: st.tuples(
    st.just(n),
    st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])),
    st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])))))
def test_metric_identities(args):
    n, pe, te = args
    m = score_graph(DirectedGraph(n, pe), DirectedGraph(n, te))
    assert m.true_positives == len(pe & te)
    assert m.precision * m.n_edges_predicted == pytest.approx(m.true_positives)
    if m.precision + m.recall > 0:
        assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall))
    else:
        assert m.f1 == 0.0


def test_aggregate_examples():
    s = aggregate_runs([_metrics(0.7), _metrics(0.8)])
    assert s.f1[0] == pytest.approx(0.75)
    assert s.f1[1] == pytest.approx(math.sqrt(0.005), rel=1e-12)
    assert s.f1[1] == pytest.approx(0.0707, abs=1e-4)
    assert aggregate_runs([_metrics(0.6)]).f1 == (0.6, 0.0)
    assert aggregate_runs([_metrics(0.6)] * 3).f1[1] == 0.0
    with pytest.raises(ValueError):
        aggregate_runs([])


def _grid():
    out = []
    for a in ("notears", "pc", "ges"):
        for m in ("kg+llm", "baseline", "llm", "kg"):
            out.append(aggregate_runs([_metrics(0.1 * len(m))], a, m))
    return out


def test_twelve_row_table_in_fixed_order():
    rows = comparison_rows(_grid())
    assert len(rows) == 12
    assert [(r[0], r[1]) for r in rows[:4]] == [("pc", "baseline"), ("pc", "kg"), ("pc", "llm"), ("pc", "kg+llm")]
    assert [r[0] for r in rows[::4]] == ["pc", "ges", "notears"]
    csv_text, table = comparison_table(_grid())
    assert csv_text.splitlines()[0] == ",".join(HEADER)
    assert len(csv_text.splitlines()) == 13 and len(table.splitlines()) == 13


def test_gain_column():
    rows = {(r[0], r[1]): r for r in comparison_rows(_grid())}
    assert rows["pc", "kg+llm"][-1] == pytest.approx(0.6 - 0.8)
    assert rows["pc", "baseline"][-1] == 0.0
    lone = comparison_rows([aggregate_runs([_metrics(0.5)], "pc", "kg")])
    assert math.isnan(lone[0][-1])


def test_json_report_lists_runs():
    assert '"sd": 0.0' in summaries_json(_grid())

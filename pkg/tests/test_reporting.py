import json
import os

import jsonschema
import pytest

from psumlint.api import analyze_text
from psumlint.propagation import backward_trace, forward_trace
from psumlint.reporting import (RenderError, count_lom, graph_node_labels,
                                render_derived, render_diagnostics,
                                render_graph, render_risks, render_stats,
                                render_suggestions, render_topics,
                                render_trace)

from conftest import ALL_FIXTURES, analyze_fixture, fixture_text

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "docs", "schemas")


def schema(name: str) -> dict:
    with open(os.path.join(SCHEMA_DIR, name), "r", encoding="utf-8") as fh:
        return json.load(fh)


def check(payload_text: str, schema_name: str):
    jsonschema.validate(json.loads(payload_text), schema(schema_name))


# -- statistics -------------------------------------------------------------------

def test_acc_statistics_hand_count(acc):
    stats = acc.stats().to_dict()
    counts = stats["stereotype_counts"]
    assert counts["BeliefStatement"]["state"]["direct"] == 1
    assert counts["Uncertainty"]["transition"]["direct"] == 2
    assert counts["IndeterminacySource"]["part"]["direct"] == 3
    assert counts["IndeterminacySpecification"]["constraint"]["direct"] == 2
    assert counts["Effect"]["action"]["direct"] == 1
    # line extents of the annotated elements, counted by hand in the fixture
    assert counts["BeliefStatement"]["state"]["element_lom"] == 32
    assert counts["Uncertainty"]["transition"]["element_lom"] == 18
    assert counts["IndeterminacySource"]["part"]["element_lom"] == 8
    assert counts["IndeterminacySpecification"]["constraint"]["element_lom"] == 4
    assert counts["UncertaintyTopic"]["item def"]["element_lom"] == 4
    assert stats["nature_breakdown"] == {"NonDeterminism": 1,
                                         "InsufficientResolution": 2}
    assert stats["specification_declarations"] == 2
    assert stats["specification_refs"] == 2
    assert stats["effect_declarations"] == 1
    assert stats["effect_refs"] == 1
    assert stats["reference_counts"]["Uncertainty"] == 2
    assert stats["topic_count"] == 1
    assert stats["topics"] == [{"topic": "SignalDefinition::PerceptionSignal",
                                "members": 2}]
    assert stats["risk_counts"] == {"low": 0, "medium": 0, "high": 1}


def test_acc_element_counts_follow_keyword_occurrences(acc):
    counts = acc.stats().to_dict()["element_counts"]
    assert counts["part def"] == 5      # ACC, Sensor, Radar, Lidar, Camera
    assert counts["part"] == 4          # radars, lidars, cameras, acc
    assert counts["state def"] == 1
    assert counts["state"] == 9
    assert counts["transition"] == 8
    assert counts["action"] == 2        # perceive, decide
    assert counts["item def"] == 3
    assert counts["attribute"] == 5
    assert counts["constraint"] == 2
    assert counts["metadata"] == 1


def test_vfea_statistics_match_single_uncertainty(vfea):
    stats = vfea.stats().to_dict()
    assert stats["stereotype_counts"]["Uncertainty"] == \
        {"attribute": {"direct": 1, "inherited": 0, "element_lom": 5}}
    assert "IndeterminacySource" not in stats["stereotype_counts"]
    assert stats["stereotype_counts"]["BeliefStatement"]["part def"] == \
        {"direct": 1, "inherited": 0, "element_lom": 12}
    assert stats["nature_breakdown"] == {}


def test_empty_model_all_zero():
    stats = analyze_text("").stats().to_dict()
    assert stats["element_counts"] == {}
    assert stats["stereotype_counts"] == {}
    assert stats["topic_count"] == 0
    assert stats["lom"]["total"] == 0


def test_lom_counts_non_blank_lines(acc):
    text = fixture_text("acc.sysml")
    expected = sum(1 for line in text.splitlines() if line.strip())
    stats = acc.stats()
    assert stats.lom_total == expected
    assert count_lom("a\n\n  \nb\n") == 2


# -- rendering ---------------------------------------------------------------------

def test_stats_json_round_trip(acc):
    stats = acc.stats()
    rendered = render_stats(stats, "json")
    check(rendered, "stats.schema.json")
    assert json.loads(rendered) == stats.to_dict()


def test_stats_rendering_is_pure(acc):
    stats = acc.stats()
    assert render_stats(stats, "json") == render_stats(stats, "json")
    assert render_stats(stats, "text") == render_stats(stats, "text")


def test_stats_text_contains_tables(acc):
    text = render_stats(acc.stats(), "text")
    assert "Lines of model" in text
    assert "Element counts" in text
    assert "Risks by impact" in text


def test_graph_dot_contains_publish_to_delivering(interaction):
    dot = render_graph(interaction.graph, "dot")
    assert "publish -> delivering" in dot
    assert dot.startswith("digraph")


def test_graph_json_schema(interaction):
    check(render_graph(interaction.graph, "json"), "graph.schema.json")


def test_graph_labels_are_unique():
    for name in ALL_FIXTURES:
        graph = analyze_fixture(name).graph
        labels = graph_node_labels(graph)
        assert len(set(labels.values())) == len(labels)


def test_diagnostics_render_ordered_json(acc):
    analysis = analyze_fixture("acc_verbatim.sysml")
    rendered = render_diagnostics(analysis.findings, "json")
    check(rendered, "diagnostics.schema.json")
    rows = json.loads(rendered)
    keys = [(r["file"], r["line"], r["column"], r["code"]) for r in rows]
    assert keys == sorted(keys)


def test_trace_render_json_schema(interaction):
    model = interaction.model
    publish = model.resolve_qualified(
        "Configuration::producer::producerBehavior::publish")
    result = forward_trace(interaction.graph, publish)
    check(render_trace(result, interaction.graph, "json"), "trace.schema.json")
    backward = backward_trace(interaction.graph, publish)
    check(render_trace(backward, interaction.graph, "json"), "trace.schema.json")


def test_derived_render_json_schema(interaction):
    rendered = render_derived(interaction.derived(), interaction.model, "json")
    check(rendered, "derived.schema.json")


def test_topics_render_json_schema(arrowhead):
    rendered = render_topics(arrowhead.topics(), arrowhead.model, "json")
    check(rendered, "topics.schema.json")


def test_risks_render_json_schema(arrowhead):
    roots = {}
    for risk in arrowhead.risks():
        roots[risk.element] = list(
            backward_trace(arrowhead.graph, risk.target).roots)
    rendered = render_risks(arrowhead.risks(), roots, arrowhead.model, "json")
    check(rendered, "risks.schema.json")


def test_suggestions_render_json_schema(interaction):
    rendered = render_suggestions(interaction.suggestions(),
                                  interaction.model, "json")
    check(rendered, "suggestions.schema.json")


def test_profile_catalog_matches_schema():
    from psumlint.profile import DEFAULT_CATALOG
    check(DEFAULT_CATALOG.to_json(), "profile-catalog.schema.json")


def test_unsupported_format_pairs_raise(acc):
    with pytest.raises(RenderError):
        render_stats(acc.stats(), "dot")
    with pytest.raises(RenderError):
        render_diagnostics(acc.findings, "dot")
    with pytest.raises(RenderError):
        render_graph(acc.graph, "text")

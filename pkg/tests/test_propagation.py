import pytest

from psumlint.api import analyze_text
from psumlint.propagation import (EFFECT_CHAIN_KINDS, NodeRole,
                                  PropagationEdgeKind, TRACE_KINDS,
                                  TraceStartError, backward_trace,
                                  detect_cycles, forward_trace,
                                  reachable_set)

from conftest import ALL_FIXTURES, analyze_fixture


def rq(analysis, name):
    eid = analysis.model.resolve_qualified(name)
    assert eid is not None, name
    return eid


def edge_pairs(analysis, kind):
    model = analysis.model
    return {(model.elements[e.source].name, model.elements[e.target].name)
            for e in analysis.graph.edges if e.kind is kind}


def test_interaction_propagates_edges(interaction):
    assert edge_pairs(interaction, PropagationEdgeKind.PROPAGATES) == {
        ("publish", "delivering"),
        ("delivering", "delivery"),
        ("subscribe", "subscribing"),
    }


def test_arrowhead_fail_chain_and_risks(arrowhead):
    propagates = edge_pairs(arrowhead, PropagationEdgeKind.PROPAGATES)
    assert ("failToAcceptCallGiveItems", "failToAcceptResultGiveItems") in propagates
    incurs = edge_pairs(arrowhead, PropagationEdgeKind.INCURS)
    assert incurs == {
        ("failToAcceptCallGiveItems", "lossOfCallGiveItemsRisk"),
        ("failToAcceptResultGiveItems", "resultReceptionFailureRisk"),
    }


def test_unannotated_model_yields_empty_graph():
    analysis = analyze_text("package P { part a; part b; }")
    assert analysis.graph.nodes() == []
    assert analysis.graph.edges == []


def test_forward_trace_two_hops_to_delivery(interaction):
    publish = rq(interaction, "Configuration::producer::producerBehavior::publish")
    delivery = rq(interaction, "Configuration::consumer::consumerBehavior::delivery")
    delivering = rq(interaction, "Configuration::server::serverBehavior::delivering")
    result = forward_trace(interaction.graph, publish, effects_only=True)
    assert delivering in result.reached and delivery in result.reached
    path = result.paths[delivery]
    assert len(path) == 2
    assert [e.kind for e in path] == [PropagationEdgeKind.PROPAGATES] * 2
    assert [e.target for e in path] == [delivering, delivery]


def test_forward_trace_of_sink_is_itself(interaction):
    delivery = rq(interaction, "Configuration::consumer::consumerBehavior::delivery")
    result = forward_trace(interaction.graph, delivery)
    assert result.reached == (delivery,)


def test_forward_trace_acc_radars(acc):
    radars = rq(acc, "StructuralModel::ACC::radars")
    result = forward_trace(acc.graph, radars)
    reached_names = {acc.model.elements[n].name for n in result.reached}
    assert {"startDeciding", "failToStartDeciding", "decide",
            "collisionRisk"} <= reached_names


def test_backward_trace_arrowhead_roots(arrowhead):
    model = arrowhead.model
    failure = rq(arrowhead, "AHFModel::AHFNorway_LocalCloudDD::TellUConsumer::"
                            "TellUbehavior::failToAcceptResultGiveItems")
    result = backward_trace(arrowhead.graph, failure)
    reached_names = {model.elements[n].name for n in result.reached}
    assert "failToAcceptCallGiveItems" in reached_names
    spec_roots = [r for r in result.roots
                  if NodeRole.SPECIFICATION in arrowhead.graph.roles[r]]
    assert len(spec_roots) >= 2
    source_sides = {model.elements[r].qualified_name for r in result.roots
                    if NodeRole.SOURCE in arrowhead.graph.roles[r]}
    assert source_sides == {
        "AHFModel::AHFNorway_LocalCloudDD::TellUConsumer::apisp::APIS_HTTP",
        "AHFModel::AHFNorway_LocalCloudDD::APISProducer::tellu::APIS_HTTP",
    }


def test_backward_trace_acc(acc):
    failure = rq(acc, "BehavioralModel::ACCState::accOn::decisionLayerState::"
                      "failToStartDeciding")
    result = backward_trace(acc.graph, failure)
    root_names = {acc.model.elements[r].name for r in result.roots}
    assert root_names == {"radars", "radarBlocked"}


def test_backward_trace_of_source_is_itself(acc):
    radars = rq(acc, "StructuralModel::ACC::radars")
    result = backward_trace(acc.graph, radars)
    assert result.reached == (radars,)
    assert result.roots == (radars,)


def test_trace_start_not_in_graph_raises_e001(acc):
    ready = rq(acc, "BehavioralModel::ACCState::ready")
    with pytest.raises(TraceStartError, match="E001"):
        forward_trace(acc.graph, ready)


def test_fixture_graphs_are_acyclic():
    for name in ALL_FIXTURES:
        assert detect_cycles(analyze_fixture(name).graph) == []


def test_synthetic_two_node_cycle():
    analysis = analyze_text(
        "package P { part def D; "
        "«Uncertainty<ocr, epi, subj>» part a defined by D { "
        "  «Effect» ref ::> b; } "
        "«Uncertainty<ocr, epi, subj>» part b defined by D { "
        "  «Effect» ref ::> a; } }")
    cycles = detect_cycles(analysis.graph)
    assert len(cycles) == 1
    a = analysis.model.resolve_qualified("P::a")
    b = analysis.model.resolve_qualified("P::b")
    assert sorted(cycles[0]) == sorted([a, b])
    # traces terminate despite the cycle
    result = forward_trace(analysis.graph, a)
    assert set(result.reached) == {a, b}


def test_empty_graph_has_no_cycles():
    analysis = analyze_text("package P { }")
    assert detect_cycles(analysis.graph) == []


def test_topic_report_examples(acc, arrowhead):
    model = arrowhead.model
    records = {arrowhead.model.elements[r.topic].name: r
               for r in arrowhead.topics()}
    publish_topic = records["PublishTopic"]
    assert [model.elements[m].name for m in publish_topic.members] == \
        ["sendPublish", "acceptPublish", "failToAcceptPublish"]

    acc_records = acc.topics()
    assert len(acc_records) == 1
    record = acc_records[0]
    assert acc.model.elements[record.topic].name == "PerceptionSignal"
    assert [acc.model.elements[m].name for m in record.members] == \
        ["startDeciding", "failToStartDeciding"]
    assert {acc.model.elements[r].name for r in record.roots} >= {"radars"}
    assert [acc.model.elements[e].name for e in record.effects] == ["decide"]
    assert [(r.name, r.impact) for r in record.risks] == \
        [("collisionRisk", "high")]


def test_topic_with_zero_members():
    analysis = analyze_text(
        "package P { «UncertaintyTopic» item def Empty; }")
    records = analysis.topics()
    assert len(records) == 1
    assert records[0].members == ()


def test_groups_edges_do_not_contribute_to_reachability(acc):
    topic = rq(acc, "SignalDefinition::PerceptionSignal")
    result = forward_trace(acc.graph, topic)
    assert result.reached == (topic,)


def test_derive_specs_clean_fixture_does_not_duplicate_explicit_ref(interaction):
    model = interaction.model
    delivering = rq(interaction, "Configuration::server::serverBehavior::delivering")
    assert all(s.effect != delivering for s in interaction.suggestions())


def test_derive_specs_mutant_suggests_removed_ref():
    from conftest import fixture_text
    text = fixture_text("interaction.sysml")
    removed = ("\t\t\t\t«IndeterminacySpecification» ref ::> "
               "producer.publicationPort.publicationPortOperational;\n")
    mutant = text.replace(removed, "")
    assert mutant != text
    analysis = analyze_text(mutant, path="interaction_mutant.sysml")
    model = analysis.model
    delivering = model.resolve_qualified(
        "Configuration::server::serverBehavior::delivering")
    hits = [s for s in analysis.suggestions() if s.effect == delivering]
    assert len(hits) == 1
    suggestion = hits[0]
    assert suggestion.display(model) == \
        "Configuration::producer::publicationPort.publicationPortOperational"
    assert model.elements[suggestion.via_uncertainty].name == "publish"


def test_no_propagates_edges_no_suggestions(vfea):
    assert vfea.suggestions() == []


# -- oracle comparisons ---------------------------------------------------------

def brute_force_reachability(graph, kinds):
    """Transitive closure by repeated relaxation over the edge list."""
    reach = {node: {node} for node in graph.nodes()}
    changed = True
    while changed:
        changed = False
        for edge in graph.edges:
            if edge.kind not in kinds:
                continue
            if NodeRole.RISK in graph.roles.get(edge.source, set()):
                continue  # risks are sinks
            target_set = reach[edge.target]
            source_set = reach[edge.source]
            if not target_set <= source_set:
                source_set |= target_set
                changed = True
    return reach


def test_traces_match_brute_force_closure():
    for name in ALL_FIXTURES:
        analysis = analyze_fixture(name)
        graph = analysis.graph
        assert len(graph.nodes()) <= 200
        for kinds in (TRACE_KINDS, EFFECT_CHAIN_KINDS):
            oracle = brute_force_reachability(graph, kinds)
            for node in graph.nodes():
                traced = reachable_set(graph, node, kinds)
                assert traced == oracle[node], (name, node)


def test_trace_duality():
    for name in ALL_FIXTURES:
        graph = analyze_fixture(name).graph
        nodes = graph.nodes()
        forward = {n: reachable_set(graph, n, TRACE_KINDS) for n in nodes}
        backward = {n: reachable_set(graph, n, TRACE_KINDS, reverse=True)
                    for n in nodes}
        for x in nodes:
            for y in nodes:
                fwd = y in forward[x]
                bwd = x in backward[y]
                if NodeRole.RISK in graph.roles.get(x, set()) and x != y:
                    continue  # forward traces stop at risk sinks
                assert fwd == bwd, (name, x, y)


def test_witness_paths_are_graph_edges():
    for name in ALL_FIXTURES:
        graph = analyze_fixture(name).graph
        edge_set = {(e.source, e.target, e.kind) for e in graph.edges}
        for node in graph.nodes():
            result = forward_trace(graph, node)
            for reached, path in result.paths.items():
                cursor = node
                for edge in path:
                    assert (edge.source, edge.target, edge.kind) in edge_set
                    assert edge.source == cursor
                    cursor = edge.target
                assert cursor == reached


def test_effect_nodes_are_also_uncertainty_nodes(interaction):
    graph = interaction.graph
    for eid, roles in graph.roles.items():
        if NodeRole.EFFECT in roles:
            assert NodeRole.UNCERTAINTY in roles
    delivering = rq(interaction,
                    "Configuration::server::serverBehavior::delivering")
    assert graph.roles[delivering] == {NodeRole.UNCERTAINTY, NodeRole.EFFECT}


def test_every_edge_has_provenance():
    for name in ALL_FIXTURES:
        graph = analyze_fixture(name).graph
        for edge in graph.edges:
            assert edge.provenance, edge

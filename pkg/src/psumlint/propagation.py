"""Uncertainty propagation graph and causal queries.

Edges:
  Specifies   source element -> its owned/inherited specification constraints
  Causes      specification  -> uncertainty/effect referencing it
  Propagates  uncertainty    -> each of its effect targets
  Incurs      uncertain element -> risk annotation attached to it
  Groups      topic -> each grouped uncertainty (organizational only; never
              traversed by traces)

Traces walk {Specifies, Causes, Propagates, Incurs} by default, or
Propagates only in the effect-chain view. Risk nodes are sinks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .inheritance import (EffectiveMap, effective_specifications,
                          has_effective, is_reference_carrier)
from .model import Model
from .profile import (EFFECT, INDETERMINACY_SOURCE,
                      INDETERMINACY_SPECIFICATION, UNCERTAINTY,
                      UNCERTAINTY_TOPIC, RiskAnnotation, collect_risks)
from .source import Span


class NodeRole(enum.Enum):
    SOURCE = "Source"
    SPECIFICATION = "Specification"
    UNCERTAINTY = "Uncertainty"
    EFFECT = "Effect"
    TOPIC = "Topic"
    RISK = "Risk"


class PropagationEdgeKind(enum.Enum):
    SPECIFIES = "Specifies"
    CAUSES = "Causes"
    PROPAGATES = "Propagates"
    INCURS = "Incurs"
    GROUPS = "Groups"


TRACE_KINDS = frozenset({
    PropagationEdgeKind.SPECIFIES, PropagationEdgeKind.CAUSES,
    PropagationEdgeKind.PROPAGATES, PropagationEdgeKind.INCURS,
})
EFFECT_CHAIN_KINDS = frozenset({PropagationEdgeKind.PROPAGATES})


@dataclass(frozen=True)
class PropagationEdge:
    source: int
    target: int
    kind: PropagationEdgeKind
    provenance: tuple[Span, ...] = ()


@dataclass
class PropagationGraph:
    model: Model
    roles: dict[int, set[NodeRole]] = field(default_factory=dict)
    edges: list[PropagationEdge] = field(default_factory=list)
    risks: list[RiskAnnotation] = field(default_factory=list)
    _out: dict[int, list[PropagationEdge]] = field(default_factory=dict)
    _in: dict[int, list[PropagationEdge]] = field(default_factory=dict)

    def nodes(self) -> list[int]:
        return sorted(self.roles)

    def has_node(self, eid: int) -> bool:
        return eid in self.roles

    def add_role(self, eid: int, role: NodeRole) -> None:
        self.roles.setdefault(eid, set()).add(role)

    def add_edge(self, source: int, target: int, kind: PropagationEdgeKind,
                 span: Optional[Span]) -> None:
        for i, edge in enumerate(self.edges):
            if (edge.source, edge.target, edge.kind) == (source, target, kind):
                if span is not None:
                    merged = PropagationEdge(source, target, kind,
                                             edge.provenance + (span,))
                    self.edges[i] = merged
                    self._reindex()
                return
        edge = PropagationEdge(source, target, kind,
                               (span,) if span is not None else ())
        self.edges.append(edge)
        self._out.setdefault(source, []).append(edge)
        self._in.setdefault(target, []).append(edge)

    def _reindex(self) -> None:
        self._out.clear()
        self._in.clear()
        for edge in self.edges:
            self._out.setdefault(edge.source, []).append(edge)
            self._in.setdefault(edge.target, []).append(edge)

    def out_edges(self, eid: int) -> list[PropagationEdge]:
        return self._out.get(eid, [])

    def in_edges(self, eid: int) -> list[PropagationEdge]:
        return self._in.get(eid, [])


class TraceStartError(ValueError):
    """E001: the requested trace start is not a node of the graph."""

    code = "E001"


def build_propagation_graph(model: Model,
                            effective: EffectiveMap) -> PropagationGraph:
    graph = PropagationGraph(model=model)

    uncertain_elements: list[int] = []
    for element in model.elements:
        if element.is_prelude or is_reference_carrier(element):
            continue
        eid = element.id
        if has_effective(effective, eid, INDETERMINACY_SOURCE):
            graph.add_role(eid, NodeRole.SOURCE)
        if has_effective(effective, eid, INDETERMINACY_SPECIFICATION):
            graph.add_role(eid, NodeRole.SPECIFICATION)
        if has_effective(effective, eid, UNCERTAINTY):
            graph.add_role(eid, NodeRole.UNCERTAINTY)
            uncertain_elements.append(eid)
        if has_effective(effective, eid, EFFECT):
            # an effect is also an uncertainty node
            graph.add_role(eid, NodeRole.EFFECT)
            graph.add_role(eid, NodeRole.UNCERTAINTY)
            if eid not in uncertain_elements:
                uncertain_elements.append(eid)
        if any(app.stereotype == UNCERTAINTY_TOPIC
               for app in element.annotations):
            # inherited topic-ness (e.g. a payload typed by a topic item
            # definition) groups nothing, so only declared topics are nodes
            graph.add_role(eid, NodeRole.TOPIC)

    for eid, roles in list(graph.roles.items()):
        if NodeRole.SOURCE in roles:
            for spec in effective_specifications(model, effective, eid):
                graph.add_role(spec, NodeRole.SPECIFICATION)
                graph.add_edge(eid, spec, PropagationEdgeKind.SPECIFIES,
                               model.elements[spec].span)

    for eid in uncertain_elements:
        for app in effective.get(eid, ()):
            if app.stereotype not in (UNCERTAINTY, EFFECT):
                continue
            for ref in app.spec_refs:
                if has_effective(effective, ref.target,
                                 INDETERMINACY_SPECIFICATION):
                    graph.add_role(ref.target, NodeRole.SPECIFICATION)
                    graph.add_edge(ref.target, eid, PropagationEdgeKind.CAUSES,
                                   ref.span)
            for ref in app.effect_refs:
                if has_effective(effective, ref.target, UNCERTAINTY, EFFECT):
                    graph.add_edge(eid, ref.target,
                                   PropagationEdgeKind.PROPAGATES, ref.span)

    for element in model.elements:
        for app in element.annotations:
            if app.stereotype == UNCERTAINTY_TOPIC:
                for ref in app.uncertainty_refs:
                    if has_effective(effective, ref.target, UNCERTAINTY, EFFECT):
                        graph.add_edge(element.id, ref.target,
                                       PropagationEdgeKind.GROUPS, ref.span)

    risks, _diags = collect_risks(model)
    graph.risks = risks
    for risk in risks:
        if graph.has_node(risk.target):
            graph.add_role(risk.element, NodeRole.RISK)
            graph.add_edge(risk.target, risk.element,
                           PropagationEdgeKind.INCURS, risk.span)
    return graph


# -- traces ---------------------------------------------------------------------

@dataclass(frozen=True)
class TraceResult:
    start: int
    reached: tuple[int, ...]
    paths: dict[int, tuple[PropagationEdge, ...]]


def _walk(graph: PropagationGraph, start: int, kinds: frozenset,
          reverse: bool) -> TraceResult:
    if not graph.has_node(start):
        raise TraceStartError(
            f"E001: {graph.model.elements[start].display_name()} is not a "
            f"node of the propagation graph")
    paths: dict[int, tuple[PropagationEdge, ...]] = {start: ()}
    frontier = [start]
    order = [start]
    while frontier:
        nxt: list[int] = []
        for node in sorted(frontier):
            edges = graph.in_edges(node) if reverse else graph.out_edges(node)
            if not reverse and NodeRole.RISK in graph.roles.get(node, set()):
                continue  # risks are sinks
            neighbours = sorted(
                (edge for edge in edges if edge.kind in kinds),
                key=lambda e: (e.source if reverse else e.target))
            for edge in neighbours:
                peer = edge.source if reverse else edge.target
                if peer in paths:
                    continue
                paths[peer] = paths[node] + (edge,)
                order.append(peer)
                nxt.append(peer)
        frontier = nxt
    return TraceResult(start=start, reached=tuple(order), paths=paths)


def forward_trace(graph: PropagationGraph, start: int,
                  effects_only: bool = False) -> TraceResult:
    kinds = EFFECT_CHAIN_KINDS if effects_only else TRACE_KINDS
    return _walk(graph, start, kinds, reverse=False)


@dataclass(frozen=True)
class BackwardResult:
    failure: int
    reached: tuple[int, ...]
    roots: tuple[int, ...]
    paths: dict[int, tuple[PropagationEdge, ...]]


def backward_trace(graph: PropagationGraph, failure: int,
                   effects_only: bool = False) -> BackwardResult:
    kinds = EFFECT_CHAIN_KINDS if effects_only else TRACE_KINDS
    walk = _walk(graph, failure, kinds, reverse=True)
    roots = tuple(
        node for node in walk.reached
        if graph.roles.get(node, set()) & {NodeRole.SOURCE, NodeRole.SPECIFICATION})
    return BackwardResult(failure=failure, reached=walk.reached, roots=roots,
                          paths=walk.paths)


def reachable_set(graph: PropagationGraph, start: int, kinds: frozenset,
                  reverse: bool = False) -> set[int]:
    """Raw reachability (start included); shared by trace duality checks."""
    return set(_walk(graph, start, kinds, reverse).reached)


# -- cycles ----------------------------------------------------------------------

def detect_cycles(graph: PropagationGraph) -> list[list[int]]:
    """All elementary cycles over Propagates edges (Johnson's algorithm)."""
    adjacency: dict[int, list[int]] = {}
    for edge in graph.edges:
        if edge.kind is PropagationEdgeKind.PROPAGATES:
            adjacency.setdefault(edge.source, []).append(edge.target)
    for targets in adjacency.values():
        targets.sort()
    nodes = sorted(set(adjacency)
                   | {t for targets in adjacency.values() for t in targets})
    cycles: list[list[int]] = []
    blocked: set[int] = set()
    block_map: dict[int, set[int]] = {}
    stack: list[int] = []

    def unblock(node: int) -> None:
        blocked.discard(node)
        for other in block_map.pop(node, set()):
            if other in blocked:
                unblock(other)

    def circuit(node: int, root: int, component: set[int]) -> bool:
        found = False
        stack.append(node)
        blocked.add(node)
        for peer in adjacency.get(node, ()):
            if peer not in component:
                continue
            if peer == root:
                cycles.append(list(stack))
                found = True
            elif peer not in blocked:
                if circuit(peer, root, component):
                    found = True
        if found:
            unblock(node)
        else:
            for peer in adjacency.get(node, ()):
                if peer in component:
                    block_map.setdefault(peer, set()).add(node)
        stack.pop()
        return found

    for root in nodes:
        component = {n for n in nodes if n >= root}
        blocked.clear()
        block_map.clear()
        if root in adjacency:
            circuit(root, root, component)
    return cycles


# -- topics ------------------------------------------------------------------------

@dataclass(frozen=True)
class TopicRecord:
    topic: int
    members: tuple[int, ...]
    roots: tuple[int, ...]
    effects: tuple[int, ...]
    risks: tuple[RiskAnnotation, ...]


def topic_report(model: Model, graph: PropagationGraph) -> list[TopicRecord]:
    """One record per directly declared uncertainty topic."""
    records: list[TopicRecord] = []
    for element in model.elements:
        topic_apps = [a for a in element.annotations
                      if a.stereotype == UNCERTAINTY_TOPIC]
        if not topic_apps:
            continue
        members: list[int] = []
        for app in topic_apps:
            for ref in app.uncertainty_refs:
                if ref.target not in members:
                    members.append(ref.target)
        roots: list[int] = []
        effects: list[int] = []
        risk_hits: list[RiskAnnotation] = []
        for member in members:
            if not graph.has_node(member):
                continue
            for root in backward_trace(graph, member).roots:
                if root not in roots:
                    roots.append(root)
            forward = forward_trace(graph, member)
            for node in forward.reached:
                node_roles = graph.roles.get(node, set())
                if NodeRole.EFFECT in node_roles and node != member \
                        and node not in effects:
                    effects.append(node)
                if NodeRole.RISK in node_roles:
                    for risk in graph.risks:
                        if risk.element == node and risk not in risk_hits:
                            risk_hits.append(risk)
        records.append(TopicRecord(
            topic=element.id, members=tuple(members), roots=tuple(roots),
            effects=tuple(effects), risks=tuple(risk_hits)))
    return records


# -- derived specifications -----------------------------------------------------------

@dataclass(frozen=True)
class SpecSuggestion:
    effect: int
    specification: int
    anchor: Optional[int]
    via_uncertainty: int

    def display(self, model: Model) -> str:
        spec = model.elements[self.specification]
        if self.anchor is not None:
            anchor = model.elements[self.anchor]
            return f"{anchor.display_name()}.{spec.name}"
        return spec.display_name()


def derive_effect_specifications(model: Model, effective: EffectiveMap,
                                 graph: PropagationGraph) -> list[SpecSuggestion]:
    """Specifications an effect would inherit from its causing uncertainty.

    For each Propagates edge u -> e, every (anchor, specification) pair
    referenced by u and not already referenced by e is suggested for e.
    Advisory only; the model is never changed.
    """
    def anchored_refs(eid: int) -> list[tuple[Optional[int], int]]:
        pairs: list[tuple[Optional[int], int]] = []
        for app in effective.get(eid, ()):
            if app.stereotype in (UNCERTAINTY, EFFECT):
                for ref in app.spec_refs:
                    pairs.append((ref.anchor, ref.target))
        return pairs

    suggestions: list[SpecSuggestion] = []
    for edge in graph.edges:
        if edge.kind is not PropagationEdgeKind.PROPAGATES:
            continue
        upstream, effect = edge.source, edge.target
        present = set(anchored_refs(effect))
        for anchor, spec in anchored_refs(upstream):
            if (anchor, spec) in present:
                continue
            suggestion = SpecSuggestion(effect=effect, specification=spec,
                                        anchor=anchor, via_uncertainty=upstream)
            if suggestion not in suggestions:
                suggestions.append(suggestion)
    return suggestions

"""Resolved semantic model: elements, ownership, name resolution, edges.

build_model turns parsed trees into an immutable model:

* every declaration is interned as an Element with a dense id,
* specialization relationships (``specializes``, ``defined by``/``:``,
  ``:>``, ``:>>``/``redefines``, ``::>``, ``~T``) become SpecializationEdge
  records or R001 diagnostics,
* wildcard imports make the imported namespace's direct members visible,
* a small built-in prelude stands in for the standard library names the
  fixtures assume (ScalarValues, ISQ, SI, Time, RiskMetadata).

Feature chains resolve segment by segment: each segment is looked up in the
previous element's owned members first, then in members inherited through
its specialization closure (which covers lookup through feature typing).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from . import diagnostics
from .diagnostics import Diagnostic
from .source import SourceFile, Span
from .syntax import AstNode, NamePath, Value


class ElementKind(enum.Enum):
    PACKAGE = "package"
    PART_DEF = "part def"
    PART_USAGE = "part"
    ITEM_DEF = "item def"
    ITEM_USAGE = "item"
    PORT_DEF = "port def"
    PORT_USAGE = "port"
    ATTRIBUTE_DEF = "attribute def"
    ATTRIBUTE_USAGE = "attribute"
    ACTION_DEF = "action def"
    ACTION_USAGE = "action"
    STATE_DEF = "state def"
    STATE_USAGE = "state"
    TRANSITION_USAGE = "transition"
    MESSAGE_USAGE = "message"
    CONSTRAINT_DEF = "constraint def"
    CONSTRAINT_USAGE = "constraint"
    OCCURRENCE_DEF = "occurrence def"
    OCCURRENCE_USAGE = "occurrence"
    ANALYSIS_DEF = "analysis def"
    ANALYSIS_USAGE = "analysis"
    REQUIREMENT_DEF = "requirement def"
    REQUIREMENT_USAGE = "requirement"
    METADATA_USAGE = "metadata"
    REF_USAGE = "ref"


class MetaclassCategory(enum.Enum):
    OCCURRENCE_DEFINITION_LIKE = "OccurrenceDefinitionLike"
    OCCURRENCE_USAGE_LIKE = "OccurrenceUsageLike"
    ATTRIBUTE_DEFINITION = "AttributeDefinition"
    ATTRIBUTE_USAGE = "AttributeUsage"
    CONSTRAINT_USAGE = "ConstraintUsage"
    OTHER = "Other"


_DEF_KIND_BY_KEYWORD = {
    "part": ElementKind.PART_DEF, "item": ElementKind.ITEM_DEF,
    "port": ElementKind.PORT_DEF, "attribute": ElementKind.ATTRIBUTE_DEF,
    "action": ElementKind.ACTION_DEF, "state": ElementKind.STATE_DEF,
    "constraint": ElementKind.CONSTRAINT_DEF,
    "analysis": ElementKind.ANALYSIS_DEF,
    "requirement": ElementKind.REQUIREMENT_DEF,
    "occurrence": ElementKind.OCCURRENCE_DEF,
}
_USAGE_KIND_BY_KEYWORD = {
    "part": ElementKind.PART_USAGE, "item": ElementKind.ITEM_USAGE,
    "port": ElementKind.PORT_USAGE, "attribute": ElementKind.ATTRIBUTE_USAGE,
    "action": ElementKind.ACTION_USAGE, "state": ElementKind.STATE_USAGE,
    "constraint": ElementKind.CONSTRAINT_USAGE,
    "analysis": ElementKind.ANALYSIS_USAGE,
    "requirement": ElementKind.REQUIREMENT_USAGE,
    "occurrence": ElementKind.OCCURRENCE_USAGE,
    "message": ElementKind.MESSAGE_USAGE,
    "metadata": ElementKind.METADATA_USAGE,
    "ref": ElementKind.REF_USAGE,
}

_DEFINITION_KINDS = frozenset(k for k in _DEF_KIND_BY_KEYWORD.values())

_CATEGORY_BY_KIND = {
    ElementKind.PART_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.ITEM_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.PORT_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.ACTION_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.STATE_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.OCCURRENCE_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.ANALYSIS_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.REQUIREMENT_DEF: MetaclassCategory.OCCURRENCE_DEFINITION_LIKE,
    ElementKind.PART_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.ITEM_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.PORT_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.ACTION_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.STATE_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.TRANSITION_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.MESSAGE_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.ANALYSIS_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.REQUIREMENT_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.OCCURRENCE_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.REF_USAGE: MetaclassCategory.OCCURRENCE_USAGE_LIKE,
    ElementKind.ATTRIBUTE_DEF: MetaclassCategory.ATTRIBUTE_DEFINITION,
    ElementKind.ATTRIBUTE_USAGE: MetaclassCategory.ATTRIBUTE_USAGE,
    ElementKind.CONSTRAINT_USAGE: MetaclassCategory.CONSTRAINT_USAGE,
    ElementKind.PACKAGE: MetaclassCategory.OTHER,
    ElementKind.METADATA_USAGE: MetaclassCategory.OTHER,
    ElementKind.CONSTRAINT_DEF: MetaclassCategory.OTHER,
}


class EdgeKind(enum.Enum):
    SUBCLASSIFICATION = "Subclassification"
    SUBSETTING = "Subsetting"
    REDEFINITION = "Redefinition"
    FEATURE_TYPING = "FeatureTyping"
    REFERENCE_SUBSETTING = "ReferenceSubsetting"
    CONJUGATION = "Conjugation"


#: edge kinds along which members and stereotypes are inherited
INHERITANCE_KINDS = frozenset({
    EdgeKind.SUBCLASSIFICATION, EdgeKind.SUBSETTING,
    EdgeKind.REDEFINITION, EdgeKind.FEATURE_TYPING,
})


@dataclass(frozen=True)
class SpecializationEdge:
    source: int
    target: int
    kind: EdgeKind
    span: Span
    conjugated: bool = False


@dataclass(frozen=True)
class BodyProperty:
    name: str
    span: Span
    value: Optional[Value] = None
    children: tuple["BodyProperty", ...] = ()

    def find(self, name: str) -> Optional["BodyProperty"]:
        """Depth-first search for a property by name, self included."""
        if self.name == name:
            return self
        for child in self.children:
            hit = child.find(name)
            if hit is not None:
                return hit
        return None


@dataclass(frozen=True)
class RefTarget:
    """A resolved reference chain: final target plus its anchoring context.

    ``anchor`` is the element the penultimate chain segment resolved to;
    it distinguishes the "same" inherited constraint reached through two
    different feature contexts.
    """

    target: int
    anchor: Optional[int]
    chain: tuple[int, ...]
    text: str
    span: Span
    relation: EdgeKind


@dataclass
class Element:
    """One node of the resolved model tree."""

    id: int
    kind: ElementKind
    name: Optional[str]
    qualified_name: Optional[str]
    owner: Optional[int]
    span: Span
    owned: tuple[int, ...] = ()
    annotations: tuple = ()  # tuple[StereotypeApplication], filled at build
    body_properties: tuple[BodyProperty, ...] = ()
    ref_targets: tuple[RefTarget, ...] = ()
    about_target: Optional[int] = None
    is_prelude: bool = False
    ast: Optional[AstNode] = None

    @property
    def is_definition(self) -> bool:
        return self.kind in _DEFINITION_KINDS

    def display_name(self) -> str:
        if self.qualified_name:
            return self.qualified_name
        return f"<anonymous {self.kind.value} at {self.span.location()}>"


@dataclass
class Model:
    files: tuple[SourceFile, ...]
    elements: list[Element]
    edges: tuple[SpecializationEdge, ...]
    diagnostics: list[Diagnostic]
    roots: tuple[int, ...]
    prelude_roots: tuple[int, ...]
    imports: dict[int, tuple[tuple[int, bool], ...]] = field(default_factory=dict)
    _out: dict[int, tuple[SpecializationEdge, ...]] = field(default_factory=dict)
    _in: dict[int, tuple[SpecializationEdge, ...]] = field(default_factory=dict)
    _closure_cache: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def element(self, eid: int) -> Element:
        return self.elements[eid]

    def out_edges(self, eid: int) -> tuple[SpecializationEdge, ...]:
        return self._out.get(eid, ())

    def in_edges(self, eid: int) -> tuple[SpecializationEdge, ...]:
        return self._in.get(eid, ())

    def owned_elements(self, eid: int):
        return [self.elements[i] for i in self.elements[eid].owned]

    def specialization_closure(self, eid: int) -> tuple[int, ...]:
        """Transitive specialization targets, nearest first, self excluded."""
        cached = self._closure_cache.get(eid)
        if cached is not None:
            return cached
        order: list[int] = []
        seen = {eid}
        frontier = [eid]
        while frontier:
            nxt: list[int] = []
            for node in frontier:
                for edge in self.out_edges(node):
                    if edge.kind in INHERITANCE_KINDS and edge.target not in seen:
                        seen.add(edge.target)
                        order.append(edge.target)
                        nxt.append(edge.target)
            frontier = nxt
        result = tuple(order)
        self._closure_cache[eid] = result
        return result

    def metaclass_category(self, eid: int) -> MetaclassCategory:
        return _CATEGORY_BY_KIND[self.elements[eid].kind]

    def members(self, eid: int) -> dict[str, int]:
        """Named members visible on an element: owned plus inherited."""
        result: dict[str, int] = {}
        for scope in (eid, *self.specialization_closure(eid)):
            for child_id in self.elements[scope].owned:
                child = self.elements[child_id]
                if child.name is not None and child.name not in result:
                    result[child.name] = child_id
        return result

    def resolve(self, name: str, context: int) -> Optional[int]:
        """Resolve a qualified name / feature chain from a context element."""
        separators = name.replace("::", ".")
        segments = tuple(s.strip() for s in separators.split(".") if s.strip())
        if not segments:
            return None
        resolver = _PostResolver(self)
        ids = resolver.resolve_segments(segments, context)
        return ids[-1] if ids else None

    def resolve_qualified(self, name: str) -> Optional[int]:
        """Resolve a root-anchored qualified name, e.g. from the CLI."""
        separators = name.replace("::", ".")
        segments = tuple(s.strip() for s in separators.split(".") if s.strip())
        if not segments:
            return None
        first = None
        for rid in (*self.roots, *self.prelude_roots):
            if self.elements[rid].name == segments[0]:
                first = rid
                break
        if first is None:
            return None
        cursor = first
        for segment in segments[1:]:
            hit = self.members(cursor).get(segment)
            if hit is None:
                return None
            cursor = hit
        return cursor

    def find_by_qualified_name(self, qualified: str) -> Optional[int]:
        for element in self.elements:
            if element.qualified_name == qualified:
                return element.id
        return None


def metaclass_category_of_kind(kind: ElementKind) -> MetaclassCategory:
    return _CATEGORY_BY_KIND[kind]


# -- prelude -----------------------------------------------------------------

PRELUDE_SPEC = {
    "ScalarValues": ["Real", "Boolean", "String", "Integer"],
    "ISQ": ["MassValue", "LengthValue"],
    "SI": ["day"],
    "Time": ["DateTime"],
    "RiskMetadata": ["Risk", "LevelEnum"],
}
RISK_LEVELS = ("low", "medium", "high")


# -- builder -----------------------------------------------------------------

class _Builder:
    def __init__(self) -> None:
        self.elements: list[Element] = []
        self.edges: list[SpecializationEdge] = []
        self.diagnostics: list[Diagnostic] = []
        self.roots: list[int] = []
        self.prelude_roots: list[int] = []
        self.imports: dict[int, list[tuple[NamePath, bool]]] = {}
        self.resolved_imports: dict[int, list[tuple[int, bool]]] = {}
        self.owned: dict[int, list[int]] = {}
        self.member_map: dict[int, dict[str, int]] = {}
        self.resolving: set[int] = set()
        self.resolved: set[int] = set()

    # ---- interning ----------------------------------------------------------

    def new_element(self, kind: ElementKind, name: Optional[str], owner: Optional[int],
                    span: Span, ast: Optional[AstNode] = None,
                    is_prelude: bool = False) -> int:
        eid = len(self.elements)
        if owner is not None:
            qualified = None
            owner_qn = self.elements[owner].qualified_name
            if name is not None and owner_qn:
                qualified = f"{owner_qn}::{name}"
        else:
            qualified = name
        element = Element(id=eid, kind=kind, name=name, qualified_name=qualified,
                          owner=owner, span=span, ast=ast, is_prelude=is_prelude)
        self.elements.append(element)
        self.owned[eid] = []
        self.member_map[eid] = {}
        if owner is not None:
            self.owned[owner].append(eid)
            if name is not None:
                siblings = self.member_map[owner]
                if name in siblings and not is_prelude:
                    self.diagnostics.append(diagnostics.make(
                        "R002", span, f"duplicate sibling name {name!r}",
                        related=((self.elements[siblings[name]].span,
                                  "first declared here"),)))
                else:
                    siblings[name] = eid
        return eid

    def build_prelude(self) -> None:
        zero = SourceFile(path="<prelude>", content="")
        span = zero.span(0, 0)
        for pkg_name, member_names in PRELUDE_SPEC.items():
            pkg = self.new_element(ElementKind.PACKAGE, pkg_name, None, span,
                                   is_prelude=True)
            self.prelude_roots.append(pkg)
            for member in member_names:
                if member == "Risk":
                    kind = ElementKind.ITEM_DEF
                elif member == "LevelEnum":
                    kind = ElementKind.ATTRIBUTE_DEF
                else:
                    kind = ElementKind.ATTRIBUTE_DEF
                mid = self.new_element(kind, member, pkg, span, is_prelude=True)
                if member == "LevelEnum":
                    for literal in RISK_LEVELS:
                        self.new_element(ElementKind.ATTRIBUTE_USAGE, literal, mid,
                                         span, is_prelude=True)

    def intern_tree(self, root: AstNode) -> None:
        for child in root.children:
            if child.kind == "Package":
                self.roots.append(self.intern_node(child, owner=None))

    def intern_node(self, node: AstNode, owner: Optional[int]) -> Optional[int]:
        kind = self.element_kind_for(node)
        if kind is None:
            self.intern_non_element(node, owner)
            return None
        eid = self.new_element(kind, node.attr("name"), owner, node.span, ast=node)
        accept = node.attr("accept")
        if accept is not None and accept.param_name:
            self.new_element(ElementKind.ITEM_USAGE, accept.param_name, eid,
                             node.span, ast=_accept_param_node(accept, node.span))
        for child in node.children:
            self.intern_node(child, eid)
        props = _collect_body_properties(node)
        if props:
            element = self.elements[eid]
            element.body_properties = tuple(props)
        return eid

    def element_kind_for(self, node: AstNode) -> Optional[ElementKind]:
        if node.kind == "Package":
            return ElementKind.PACKAGE
        if node.kind == "Definition":
            return _DEF_KIND_BY_KEYWORD.get(node.attr("keyword"))
        if node.kind == "Transition":
            return ElementKind.TRANSITION_USAGE
        if node.kind == "MetadataUsage":
            return ElementKind.METADATA_USAGE
        if node.kind == "Usage":
            keyword = node.attr("keyword")
            if keyword is not None:
                return _USAGE_KIND_BY_KEYWORD.get(keyword)
            modifiers = set(node.attr("modifiers", ()))
            if "objective" in modifiers:
                return ElementKind.REQUIREMENT_USAGE
            if modifiers & {"subject", "return", "require", "ref"}:
                return ElementKind.REF_USAGE
            if node.attr("direction"):
                return ElementKind.ATTRIBUTE_USAGE
            return ElementKind.REF_USAGE
        return None

    def intern_non_element(self, node: AstNode, owner: Optional[int]) -> None:
        if node.kind == "Import" and owner is not None:
            target = node.attr("target")
            if target is not None:
                self.imports.setdefault(owner, []).append(
                    (target, node.attr("wildcard", False)))
            return
        if node.kind in ("EntryAction", "SuccessionThen"):
            for child in node.children:
                self.intern_node(child, owner)
            return
        # DocComment, ConstraintExpr, BodyProperty, MeasurementBlock: no element

    # ---- resolution ----------------------------------------------------------

    def root_scope(self) -> dict[str, int]:
        scope: dict[str, int] = {}
        for rid in (*self.roots, *self.prelude_roots):
            element = self.elements[rid]
            if element.name is not None and element.name not in scope:
                scope[element.name] = rid
        return scope

    def direct_members(self, eid: int) -> dict[str, int]:
        return self.member_map[eid]

    def closure(self, eid: int) -> list[int]:
        """Nearest-first specialization closure, resolving targets on demand."""
        order: list[int] = []
        seen = {eid}
        frontier = [eid]
        while frontier:
            nxt: list[int] = []
            for node in frontier:
                self.ensure_resolved(node)
                for edge in self.edges:
                    if edge.source != node or edge.kind not in INHERITANCE_KINDS:
                        continue
                    if edge.target not in seen:
                        seen.add(edge.target)
                        order.append(edge.target)
                        nxt.append(edge.target)
            frontier = nxt
        return order

    def members(self, eid: int) -> dict[str, int]:
        result = dict(self.direct_members(eid))
        for scope in self.closure(eid):
            for name, member in self.direct_members(scope).items():
                result.setdefault(name, member)
        return result

    def scope_chain(self, eid: int) -> list[int]:
        chain = []
        cursor: Optional[int] = eid
        while cursor is not None:
            chain.append(cursor)
            cursor = self.elements[cursor].owner
        return chain

    def resolve_first_segment(self, name: str, context: int,
                              exclude: Optional[int]) -> Optional[int]:
        chain = self.scope_chain(context)
        for scope in chain:
            members = self.members(scope)
            hit = members.get(name)
            if hit is not None and hit != exclude:
                return hit
        root = self.root_scope()
        if name in root and root[name] != exclude:
            return root[name]
        for scope in chain:
            for target_id, wildcard in self.resolved_imports.get(scope, ()):
                if wildcard:
                    hit = self.direct_members(target_id).get(name)
                    if hit is not None and hit != exclude:
                        return hit
                else:
                    target = self.elements[target_id]
                    if target.name == name and target_id != exclude:
                        return target_id
        for pkg in self.prelude_roots:
            hit = self.direct_members(pkg).get(name)
            if hit is not None:
                return hit
        return None

    def resolve_segments(self, segments: tuple[str, ...], context: int,
                         exclude: Optional[int] = None
                         ) -> tuple[Optional[list[int]], Optional[str]]:
        """Resolve a chain; returns (ids, None) or (None, failing segment)."""
        first = self.resolve_first_segment(segments[0], context, exclude)
        if first is None:
            return None, segments[0]
        ids = [first]
        for segment in segments[1:]:
            hit = self.members(ids[-1]).get(segment)
            if hit is None:
                return None, segment
            ids.append(hit)
        return ids, None

    def resolve_relationship(self, eid: int, path: NamePath, kind: EdgeKind,
                             conjugated: bool = False) -> Optional[list[int]]:
        ids, failing = self.resolve_segments(path.segments, eid, exclude=eid)
        if ids is None:
            self.diagnostics.append(diagnostics.make(
                "R001", path.span,
                f"cannot resolve {failing!r} in {path.text!r}"))
            return None
        self.edges.append(SpecializationEdge(
            source=eid, target=ids[-1], kind=kind, span=path.span,
            conjugated=conjugated))
        return ids

    def ensure_resolved(self, eid: int) -> None:
        if eid in self.resolved or eid in self.resolving:
            return
        self.resolving.add(eid)
        try:
            node = self.elements[eid].ast
            if node is not None:
                self.resolve_node_relationships(eid, node)
        finally:
            self.resolving.discard(eid)
            self.resolved.add(eid)

    def resolve_node_relationships(self, eid: int, node: AstNode) -> None:
        for ref in node.attr("specializes", ()) or ():
            self.resolve_relationship(eid, ref.path, EdgeKind.SUBCLASSIFICATION)
        for ref in node.attr("specializes_list", ()) or ():
            self.resolve_relationship(eid, ref.path, EdgeKind.SUBCLASSIFICATION)
        typing = node.attr("typing")
        if typing is not None:
            self.resolve_relationship(eid, typing.path, EdgeKind.FEATURE_TYPING,
                                      conjugated=typing.conjugated)
        ref_targets: list[RefTarget] = []
        for path in node.attr("subsets", ()) or ():
            self.resolve_relationship(eid, path, EdgeKind.SUBSETTING)
        for path in node.attr("redefines", ()) or ():
            ids = self.resolve_relationship(eid, path, EdgeKind.REDEFINITION)
            if ids:
                ref_targets.append(_make_ref_target(ids, path, EdgeKind.REDEFINITION))
        for path in node.attr("refsubsets", ()) or ():
            ids = self.resolve_relationship(eid, path, EdgeKind.REFERENCE_SUBSETTING)
            if ids:
                ref_targets.append(_make_ref_target(
                    ids, path, EdgeKind.REFERENCE_SUBSETTING))
        if ref_targets:
            self.elements[eid].ref_targets = tuple(ref_targets)
        about = node.attr("about")
        if about is not None:
            ids, _failing = self.resolve_segments(about.segments, eid, exclude=eid)
            if ids:
                self.elements[eid].about_target = ids[-1]

    def resolve_imports(self) -> None:
        for scope, entries in self.imports.items():
            resolved_entries: list[tuple[int, bool]] = []
            for path, wildcard in entries:
                ids, failing = self.resolve_segments_no_imports(path.segments, scope)
                if ids is None:
                    self.diagnostics.append(diagnostics.make(
                        "R001", path.span,
                        f"cannot resolve {failing!r} in import {path.text!r}"))
                    continue
                resolved_entries.append((ids[-1], wildcard))
            self.resolved_imports[scope] = resolved_entries

    def resolve_segments_no_imports(self, segments: tuple[str, ...], context: int
                                    ) -> tuple[Optional[list[int]], Optional[str]]:
        first = None
        for scope in self.scope_chain(context):
            first = self.direct_members(scope).get(segments[0])
            if first is not None:
                break
        if first is None:
            first = self.root_scope().get(segments[0])
        if first is None:
            return None, segments[0]
        ids = [first]
        for segment in segments[1:]:
            hit = self.direct_members(ids[-1]).get(segment)
            if hit is None:
                return None, segment
            ids.append(hit)
        return ids, None

    # ---- acyclicity ----------------------------------------------------------

    def remove_cycles(self) -> None:
        kept: list[SpecializationEdge] = []
        adjacency: dict[int, list[SpecializationEdge]] = {}

        def would_cycle(edge: SpecializationEdge) -> bool:
            # is edge.source reachable from edge.target over kept edges?
            seen = set()
            stack = [edge.target]
            while stack:
                node = stack.pop()
                if node == edge.source:
                    return True
                if node in seen:
                    continue
                seen.add(node)
                for out in adjacency.get(node, ()):
                    stack.append(out.target)
            return False

        for edge in self.edges:
            if edge.kind not in INHERITANCE_KINDS:
                kept.append(edge)
                continue
            if edge.source == edge.target or would_cycle(edge):
                self.diagnostics.append(diagnostics.make(
                    "R003", edge.span,
                    f"specialization cycle through "
                    f"{self.elements[edge.source].display_name()}; edge dropped"))
                continue
            kept.append(edge)
            adjacency.setdefault(edge.source, []).append(edge)
        self.edges = kept

    # ---- finish ---------------------------------------------------------------

    def freeze(self, files: list[SourceFile]) -> Model:
        for eid, owned in self.owned.items():
            self.elements[eid].owned = tuple(owned)
        out: dict[int, list[SpecializationEdge]] = {}
        incoming: dict[int, list[SpecializationEdge]] = {}
        for edge in self.edges:
            out.setdefault(edge.source, []).append(edge)
            incoming.setdefault(edge.target, []).append(edge)
        model = Model(
            files=tuple(files),
            elements=self.elements,
            edges=tuple(self.edges),
            diagnostics=self.diagnostics,
            roots=tuple(self.roots),
            prelude_roots=tuple(self.prelude_roots),
        )
        model._out = {k: tuple(v) for k, v in out.items()}
        model._in = {k: tuple(v) for k, v in incoming.items()}
        model.imports = {k: tuple(v) for k, v in self.resolved_imports.items()}
        return model


class _PostResolver:
    """Name resolution over a finished model (CLI addressing, risk targets)."""

    def __init__(self, model: Model):
        self.model = model

    def resolve_segments(self, segments: tuple[str, ...], context: int
                         ) -> Optional[list[int]]:
        model = self.model
        chain = []
        cursor: Optional[int] = context
        while cursor is not None:
            chain.append(cursor)
            cursor = model.elements[cursor].owner
        first = None
        for scope in chain:
            first = model.members(scope).get(segments[0])
            if first is not None:
                break
        if first is None:
            for rid in (*model.roots, *model.prelude_roots):
                if model.elements[rid].name == segments[0]:
                    first = rid
                    break
        if first is None:
            imports = getattr(model, "imports", {})
            for scope in chain:
                for target_id, wildcard in imports.get(scope, ()):
                    if wildcard:
                        hit = None
                        for child_id in model.elements[target_id].owned:
                            child = model.elements[child_id]
                            if child.name == segments[0]:
                                hit = child_id
                                break
                        if hit is not None:
                            first = hit
                            break
                    elif model.elements[target_id].name == segments[0]:
                        first = target_id
                        break
                if first is not None:
                    break
        if first is None:
            for pkg in model.prelude_roots:
                for child_id in model.elements[pkg].owned:
                    if model.elements[child_id].name == segments[0]:
                        first = child_id
                        break
                if first is not None:
                    break
        if first is None:
            return None
        ids = [first]
        for segment in segments[1:]:
            hit = model.members(ids[-1]).get(segment)
            if hit is None:
                return None
            ids.append(hit)
        return ids


def _make_ref_target(ids: list[int], path: NamePath, relation: EdgeKind) -> RefTarget:
    return RefTarget(
        target=ids[-1],
        anchor=ids[-2] if len(ids) >= 2 else None,
        chain=tuple(ids),
        text=path.text,
        span=path.span,
        relation=relation,
    )


def _accept_param_node(accept, span: Span) -> AstNode:
    node = AstNode(kind="Usage", span=span, attrs={"keyword": "item"})
    node.attrs["typing"] = accept.typing
    return node


def _collect_body_properties(node: AstNode) -> list[BodyProperty]:
    props: list[BodyProperty] = []
    for child in node.children:
        if child.kind == "BodyProperty":
            props.append(_body_property_from(child))
        elif child.kind == "MeasurementBlock":
            entries = tuple(_body_property_from(c) for c in child.children
                            if c.kind == "BodyProperty")
            props.append(BodyProperty(name="measurement", span=child.span,
                                      children=entries))
    return props


def _body_property_from(node: AstNode) -> BodyProperty:
    children = tuple(_body_property_from(c) for c in node.children
                     if c.kind == "BodyProperty")
    return BodyProperty(name=node.attr("name"), span=node.span,
                        value=node.attr("value"), children=children)


def build_model(parsed: list[tuple[SourceFile, AstNode, list[Diagnostic]]],
                catalog=None) -> Model:
    """Assemble a resolved model from parsed files.

    ``parsed`` holds (source, tree, parse diagnostics) triples; parse
    diagnostics are carried into the model's diagnostic list.
    """
    builder = _Builder()
    builder.build_prelude()
    files = []
    for source, tree, parse_diags in parsed:
        files.append(source)
        builder.diagnostics.extend(parse_diags)
        builder.intern_tree(tree)
    builder.resolve_imports()
    for eid in range(len(builder.elements)):
        builder.ensure_resolved(eid)
    builder.remove_cycles()
    model = builder.freeze(files)

    from . import profile  # local import: profile depends on model types
    profile.annotate_model(model, catalog=catalog)
    return model

"""The uncertainty profile: stereotype catalog, codes, and interpretation.

The catalog (stereotype names, argument-code vocabularies, the
applicability matrix, reducibility/pattern literals, measurement feature
keys and risk levels) is plain data. It ships as ``profile-catalog.json``
next to this module and can be overridden from the command line so external
tools can consume or adjust the normative tables.

Annotation clauses attached to ``ref`` usages that carry a reference target
are *reference attachments*: they contribute spec/effect/topic-member
references to the enclosing element's application instead of forming
stereotype applications of their own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from importlib import resources
from typing import Optional

from . import diagnostics
from .diagnostics import Diagnostic
from .model import (BodyProperty, EdgeKind, Element, ElementKind, Model,
                    RefTarget, _PostResolver)
from .source import Span
from .syntax import AnnotationClause, AnnotationEntry, Value

BELIEF_STATEMENT = "BeliefStatement"
INDETERMINACY_SOURCE = "IndeterminacySource"
INDETERMINACY_SPECIFICATION = "IndeterminacySpecification"
UNCERTAINTY = "Uncertainty"
UNCERTAINTY_TOPIC = "UncertaintyTopic"
EFFECT = "Effect"

ALL_CATEGORIES = ("OccurrenceDefinitionLike", "OccurrenceUsageLike",
                  "AttributeDefinition", "AttributeUsage", "ConstraintUsage",
                  "Other")
_OCCURRENCE_AND_ATTRIBUTE = ("OccurrenceDefinitionLike", "OccurrenceUsageLike",
                             "AttributeDefinition", "AttributeUsage")


@dataclass(frozen=True)
class ProfileCatalog:
    """Machine-readable form of the profile's normative tables."""

    stereotypes: dict[str, tuple[str, ...]]
    uncertainty_kinds: dict[str, str]
    uncertainty_natures: dict[str, str]
    perspectives: dict[str, str]
    indeterminacy_natures: dict[str, str]
    reducibility_levels: tuple[str, ...]
    patterns: tuple[str, ...]
    measurement_features: tuple[str, ...]
    risk_levels: tuple[str, ...]

    def to_json(self) -> str:
        payload = {
            "version": 1,
            "stereotypes": {k: list(v) for k, v in self.stereotypes.items()},
            "uncertainty_kinds": self.uncertainty_kinds,
            "uncertainty_natures": self.uncertainty_natures,
            "perspectives": self.perspectives,
            "indeterminacy_natures": self.indeterminacy_natures,
            "reducibility_levels": list(self.reducibility_levels),
            "patterns": list(self.patterns),
            "measurement_features": list(self.measurement_features),
            "risk_levels": list(self.risk_levels),
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ProfileCatalog":
        data = json.loads(text)
        return cls(
            stereotypes={k: tuple(v) for k, v in data["stereotypes"].items()},
            uncertainty_kinds=dict(data["uncertainty_kinds"]),
            uncertainty_natures=dict(data["uncertainty_natures"]),
            perspectives=dict(data["perspectives"]),
            indeterminacy_natures=dict(data["indeterminacy_natures"]),
            reducibility_levels=tuple(data["reducibility_levels"]),
            patterns=tuple(data["patterns"]),
            measurement_features=tuple(data["measurement_features"]),
            risk_levels=tuple(data["risk_levels"]),
        )


DEFAULT_CATALOG = ProfileCatalog(
    stereotypes={
        BELIEF_STATEMENT: ALL_CATEGORIES,
        INDETERMINACY_SOURCE: _OCCURRENCE_AND_ATTRIBUTE,
        INDETERMINACY_SPECIFICATION: ("ConstraintUsage",),
        UNCERTAINTY: _OCCURRENCE_AND_ATTRIBUTE,
        UNCERTAINTY_TOPIC: _OCCURRENCE_AND_ATTRIBUTE,
        EFFECT: _OCCURRENCE_AND_ATTRIBUTE,
    },
    uncertainty_kinds={
        "ocr": "Occurrence", "con": "Content", "env": "Environment",
        "geo": "GeographicalLocation", "time": "Time",
    },
    uncertainty_natures={"ale": "Aleatory", "epi": "Epistemic"},
    perspectives={"subj": "Subjective", "obj": "Objective"},
    indeterminacy_natures={
        "isr": "InsufficientResolution", "mi": "MissingInfo",
        "nd": "NonDeterminism", "uncl": "Unclassified", "cust": "Custom",
    },
    reducibility_levels=("FullyReducible", "PartiallyReducible", "Irreducible"),
    patterns=("Periodic", "Persistent", "Sporadic", "Transient", "Random"),
    measurement_features=("m_accuracy", "m_sensitivity", "m_measurementError",
                          "m_precision", "m_degree"),
    risk_levels=("low", "medium", "high"),
)


def load_catalog(path: Optional[str] = None) -> ProfileCatalog:
    if path is None:
        text = resources.files(__package__).joinpath("profile-catalog.json").read_text()
        return ProfileCatalog.from_json(text)
    with open(path, "r", encoding="utf-8") as fh:
        return ProfileCatalog.from_json(fh.read())


# -- measured expressions -----------------------------------------------------

@dataclass(frozen=True)
class MeasuredExpression:
    magnitude: Decimal
    unit: Optional[str] = None

    @property
    def is_percentage(self) -> bool:
        return self.unit == "%"


@dataclass(frozen=True)
class Interval:
    lo: Decimal
    hi: Decimal
    unit: Optional[str] = None


class MeasurementError(ValueError):
    """Raised for M001: nominal value and absolute error disagree on units."""

    code = "M001"


def apply_measurement_error(nominal: MeasuredExpression,
                            error: MeasuredExpression) -> Interval:
    """Exact interval around a nominal value given a percentage or absolute error."""
    if error.is_percentage:
        factor = error.magnitude / Decimal(100)
        delta = nominal.magnitude * factor
    else:
        if error.unit != nominal.unit:
            raise MeasurementError(
                f"M001: error unit {error.unit!r} does not match "
                f"nominal unit {nominal.unit!r}")
        delta = error.magnitude
    return Interval(lo=nominal.magnitude - delta, hi=nominal.magnitude + delta,
                    unit=nominal.unit)


# -- applications -------------------------------------------------------------

@dataclass(frozen=True)
class UncertaintyCharacterization:
    kind: Optional[str] = None
    nature: Optional[str] = None
    perspective: Optional[str] = None
    reducibility: Optional[str] = None
    pattern: Optional[str] = None
    measurements: tuple[tuple[str, MeasuredExpression], ...] = ()

    def merged_under(self, nearer: "UncertaintyCharacterization"
                     ) -> "UncertaintyCharacterization":
        """Field-wise merge where the nearer characterization wins."""
        return UncertaintyCharacterization(
            kind=nearer.kind or self.kind,
            nature=nearer.nature or self.nature,
            perspective=nearer.perspective or self.perspective,
            reducibility=nearer.reducibility or self.reducibility,
            pattern=nearer.pattern or self.pattern,
            measurements=nearer.measurements or self.measurements,
        )


@dataclass(frozen=True)
class Provenance:
    origin: int
    span: Optional[Span] = None
    path: tuple[tuple[EdgeKind, int], ...] = ()

    @property
    def is_direct(self) -> bool:
        return not self.path


@dataclass
class StereotypeApplication:
    stereotype: str
    element: int
    provenance: Provenance
    span: Span
    characterization: Optional[UncertaintyCharacterization] = None
    nature: Optional[str] = None
    duration: Optional[MeasuredExpression] = None
    spec_refs: tuple[RefTarget, ...] = ()
    effect_refs: tuple[RefTarget, ...] = ()
    uncertainty_refs: tuple[RefTarget, ...] = ()

    @property
    def is_direct(self) -> bool:
        return self.provenance.is_direct


@dataclass(frozen=True)
class RiskAnnotation:
    name: Optional[str]
    element: int
    target: int
    impact: Optional[str]
    span: Span


# -- interpretation -----------------------------------------------------------

def _decode_codes(entry: AnnotationEntry, stereotype: str,
                  catalog: ProfileCatalog) -> tuple[dict, list[Diagnostic]]:
    """Decode argument codes by vocabulary, flagging unknown/misplaced ones."""
    diags: list[Diagnostic] = []
    result: dict[str, Optional[str]] = {}
    if stereotype in (UNCERTAINTY, EFFECT):
        vocab_order = [("kind", catalog.uncertainty_kinds),
                       ("nature", catalog.uncertainty_natures),
                       ("perspective", catalog.perspectives)]
        last_slot = -1
        order_reported = False
        for code in entry.codes:
            slot = None
            for index, (label, vocab) in enumerate(vocab_order):
                if code in vocab:
                    slot = index
                    break
            if slot is None:
                diags.append(diagnostics.make(
                    "V003", entry.span,
                    f"unknown argument code {code!r} on {stereotype}"))
                continue
            label, vocab = vocab_order[slot]
            if label in result or slot < last_slot:
                if not order_reported:
                    diags.append(diagnostics.make(
                        "V004", entry.span,
                        f"argument code {code!r} is out of position in "
                        f"(kind, nature, perspective)"))
                    order_reported = True
                if label in result:
                    continue
            result[label] = vocab[code]
            last_slot = max(last_slot, slot)
        return result, diags
    if stereotype == INDETERMINACY_SOURCE:
        for position, code in enumerate(entry.codes):
            if code in catalog.indeterminacy_natures:
                if position == 0:
                    result["nature"] = catalog.indeterminacy_natures[code]
                else:
                    diags.append(diagnostics.make(
                        "V004", entry.span,
                        f"extra argument code {code!r} on {stereotype}"))
            elif _known_anywhere(code, catalog):
                diags.append(diagnostics.make(
                    "V004", entry.span,
                    f"argument code {code!r} is not an indeterminacy nature"))
            else:
                diags.append(diagnostics.make(
                    "V003", entry.span,
                    f"unknown argument code {code!r} on {stereotype}"))
        return result, diags
    for code in entry.codes:
        if _known_anywhere(code, catalog):
            diags.append(diagnostics.make(
                "V004", entry.span,
                f"{stereotype} takes no argument codes, found {code!r}"))
        else:
            diags.append(diagnostics.make(
                "V003", entry.span,
                f"unknown argument code {code!r} on {stereotype}"))
    return result, diags


def _known_anywhere(code: str, catalog: ProfileCatalog) -> bool:
    return (code in catalog.uncertainty_kinds
            or code in catalog.uncertainty_natures
            or code in catalog.perspectives
            or code in catalog.indeterminacy_natures)


def _measured_expression(value: Value) -> Optional[MeasuredExpression]:
    if value is None or value.kind != "number" or value.magnitude is None:
        return None
    return MeasuredExpression(magnitude=value.magnitude, unit=value.unit)


def interpret_annotation(clause: AnnotationClause, element: Element,
                         model: Model, catalog: ProfileCatalog
                         ) -> tuple[list[StereotypeApplication], list[Diagnostic]]:
    """One application per stereotype name; body properties attach to it."""
    apps: list[StereotypeApplication] = []
    diags: list[Diagnostic] = []
    for entry in clause.entries:
        if entry.name not in catalog.stereotypes:
            diags.append(diagnostics.make(
                "V002", entry.span, f"unknown stereotype name {entry.name!r}"))
            continue
        decoded, code_diags = _decode_codes(entry, entry.name, catalog)
        diags.extend(code_diags)
        app = StereotypeApplication(
            stereotype=entry.name, element=element.id,
            provenance=Provenance(origin=element.id, span=entry.span),
            span=entry.span)
        if entry.name in (UNCERTAINTY, EFFECT) and decoded:
            app.characterization = UncertaintyCharacterization(
                kind=decoded.get("kind"), nature=decoded.get("nature"),
                perspective=decoded.get("perspective"))
        if entry.name == INDETERMINACY_SOURCE:
            app.nature = decoded.get("nature")
        apps.append(app)
    diags.extend(_attach_body_properties(element, apps, catalog))
    return apps, diags


def _characterized_app(apps: list[StereotypeApplication]
                       ) -> Optional[StereotypeApplication]:
    for name in (UNCERTAINTY, EFFECT):
        for app in apps:
            if app.stereotype == name:
                return app
    return None


def _attach_body_properties(element: Element, apps: list[StereotypeApplication],
                            catalog: ProfileCatalog) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    target = _characterized_app(apps)
    for prop in element.body_properties:
        if prop.name in ("u_reducibility", "u_pattern"):
            literal = prop.value.path.text if (prop.value and prop.value.path) else None
            allowed = (catalog.reducibility_levels if prop.name == "u_reducibility"
                       else catalog.patterns)
            if literal not in allowed:
                diags.append(diagnostics.make(
                    "V003", prop.span,
                    f"unknown {prop.name} literal {literal!r}"))
                continue
            if target is not None:
                base = target.characterization or UncertaintyCharacterization()
                if prop.name == "u_reducibility":
                    target.characterization = UncertaintyCharacterization(
                        kind=base.kind, nature=base.nature,
                        perspective=base.perspective, reducibility=literal,
                        pattern=base.pattern, measurements=base.measurements)
                else:
                    target.characterization = UncertaintyCharacterization(
                        kind=base.kind, nature=base.nature,
                        perspective=base.perspective, reducibility=base.reducibility,
                        pattern=literal, measurements=base.measurements)
        elif prop.name == "b_duration":
            expr = _measured_expression(prop.value)
            for app in apps:
                if app.stereotype == BELIEF_STATEMENT:
                    app.duration = expr
                    break
        elif prop.name == "measurement":
            entries: list[tuple[str, MeasuredExpression]] = []
            for feature in prop.children:
                if feature.name not in catalog.measurement_features:
                    diags.append(diagnostics.make(
                        "V003", feature.span,
                        f"unknown measurement feature {feature.name!r}"))
                    continue
                expr = _measured_expression(feature.value)
                if expr is not None:
                    entries.append((feature.name, expr))
            holder = None
            for name in (UNCERTAINTY, EFFECT, INDETERMINACY_SOURCE, BELIEF_STATEMENT):
                for app in apps:
                    if app.stereotype == name:
                        holder = app
                        break
                if holder:
                    break
            if holder is not None and entries:
                base = holder.characterization or UncertaintyCharacterization()
                holder.characterization = UncertaintyCharacterization(
                    kind=base.kind, nature=base.nature, perspective=base.perspective,
                    reducibility=base.reducibility, pattern=base.pattern,
                    measurements=tuple(entries))
    return diags


def check_applicability(app: StereotypeApplication, element: Element,
                        model: Model, catalog: ProfileCatalog
                        ) -> Optional[Diagnostic]:
    """V001 when the stereotype does not extend the element's metaclass."""
    category = model.metaclass_category(element.id).value
    allowed = catalog.stereotypes.get(app.stereotype, ())
    if category not in allowed:
        return diagnostics.make(
            "V001", app.span,
            f"{app.stereotype} cannot be applied to a {element.kind.value} "
            f"(category {category})")
    return None


def is_reference_carrier(element: Element) -> bool:
    """True for annotated ``ref`` usages whose annotation names references."""
    if element.ast is None:
        return False
    modifiers = set(element.ast.attr("modifiers", ()) or ())
    if "ref" not in modifiers:
        return False
    return bool(element.ast.attr("refsubsets") or element.ast.attr("redefines"))


def annotate_model(model: Model, catalog: Optional[ProfileCatalog] = None) -> None:
    """Interpret every annotation clause in the model (called at build time)."""
    catalog = catalog or DEFAULT_CATALOG
    attachments: list[tuple[Element, AnnotationClause]] = []
    for element in model.elements:
        if element.is_prelude or element.ast is None:
            continue
        clause = element.ast.attr("annotation")
        if clause is None:
            continue
        if is_reference_carrier(element):
            attachments.append((element, clause))
            continue
        apps, diags = interpret_annotation(clause, element, model, catalog)
        element.annotations = tuple(apps)
        model.diagnostics.extend(diags)
    for carrier, clause in attachments:
        _attach_reference(model, carrier, clause, catalog)


def _attach_reference(model: Model, carrier: Element, clause: AnnotationClause,
                      catalog: ProfileCatalog) -> None:
    owner = model.elements[carrier.owner] if carrier.owner is not None else None
    targets = carrier.ref_targets
    for entry in clause.entries:
        if entry.name not in catalog.stereotypes:
            model.diagnostics.append(diagnostics.make(
                "V002", entry.span, f"unknown stereotype name {entry.name!r}"))
            continue
        if owner is None or not targets:
            continue
        if entry.name == INDETERMINACY_SPECIFICATION:
            app = _owner_app(owner, (UNCERTAINTY, EFFECT))
            if app is not None:
                app.spec_refs = app.spec_refs + targets
        elif entry.name == EFFECT:
            app = _owner_app(owner, (UNCERTAINTY, EFFECT))
            if app is not None:
                app.effect_refs = app.effect_refs + targets
        elif entry.name == UNCERTAINTY:
            app = _owner_app(owner, (UNCERTAINTY_TOPIC,))
            if app is not None:
                app.uncertainty_refs = app.uncertainty_refs + targets


def _owner_app(owner: Element, stereotypes: tuple[str, ...]
               ) -> Optional[StereotypeApplication]:
    for name in stereotypes:
        for app in owner.annotations:
            if app.stereotype == name:
                return app
    return None


# -- risks ---------------------------------------------------------------------

def collect_risks(model: Model) -> tuple[list[RiskAnnotation], list[Diagnostic]]:
    """Risk annotations from metadata usages typed by the library Risk."""
    risks: list[RiskAnnotation] = []
    diags: list[Diagnostic] = []
    for element in model.elements:
        if element.kind is not ElementKind.METADATA_USAGE or element.is_prelude:
            continue
        if not _is_risk_typed(model, element):
            continue
        target = element.about_target if element.about_target is not None \
            else element.owner
        if target is None:
            continue
        impact = None
        impact_prop = None
        for prop in element.body_properties:
            impact_prop = prop.find("impact")
            if impact_prop is not None:
                break
        if impact_prop is not None:
            impact = _impact_literal(model, element, impact_prop)
            if impact is None:
                diags.append(diagnostics.make(
                    "V012", impact_prop.span,
                    "risk impact is not a risk-level literal"))
        risks.append(RiskAnnotation(name=element.name, element=element.id,
                                    target=target, impact=impact,
                                    span=element.span))
    return risks, diags


def _is_risk_typed(model: Model, element: Element) -> bool:
    for edge in model.out_edges(element.id):
        if edge.kind is EdgeKind.FEATURE_TYPING:
            target = model.elements[edge.target]
            if target.is_prelude and target.qualified_name == "RiskMetadata::Risk":
                return True
    return False


def _impact_literal(model: Model, element: Element,
                    prop: BodyProperty) -> Optional[str]:
    value = prop.value
    if value is None or value.kind != "name" or value.path is None:
        return None
    resolver = _PostResolver(model)
    ids = resolver.resolve_segments(value.path.segments, element.id)
    if not ids:
        return None
    literal = model.elements[ids[-1]]
    if literal.is_prelude and literal.owner is not None:
        owner = model.elements[literal.owner]
        if owner.qualified_name == "RiskMetadata::LevelEnum":
            return literal.name
    return None

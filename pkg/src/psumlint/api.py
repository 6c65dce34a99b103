"""High-level pipeline: parse files, build the model, run every analysis.

The Analysis object memoizes each stage so the CLI and tests can share one
pass over the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic
from .inheritance import (DerivedReport, EffectiveMap, derived_report,
                          effective_stereotypes)
from .model import Model, build_model
from .profile import DEFAULT_CATALOG, ProfileCatalog, RiskAnnotation, collect_risks
from .propagation import (PropagationGraph, SpecSuggestion, TopicRecord,
                          build_propagation_graph, derive_effect_specifications,
                          topic_report)
from .reporting import StatsReport, model_stats
from .source import SourceFile
from .syntax import parse_file
from .validator import validate


@dataclass
class Analysis:
    model: Model
    catalog: ProfileCatalog
    _effective: Optional[EffectiveMap] = field(default=None, repr=False)
    _graph: Optional[PropagationGraph] = field(default=None, repr=False)
    _findings: Optional[list[Diagnostic]] = field(default=None, repr=False)

    @property
    def effective(self) -> EffectiveMap:
        if self._effective is None:
            self._effective = effective_stereotypes(self.model)
        return self._effective

    @property
    def graph(self) -> PropagationGraph:
        if self._graph is None:
            self._graph = build_propagation_graph(self.model, self.effective)
        return self._graph

    @property
    def findings(self) -> list[Diagnostic]:
        if self._findings is None:
            self._findings = validate(self.model, self.catalog, self.effective)
        return self._findings

    def stats(self) -> StatsReport:
        return model_stats(self.model, self.effective, self.graph)

    def derived(self) -> DerivedReport:
        return derived_report(self.model, self.effective)

    def topics(self) -> list[TopicRecord]:
        return topic_report(self.model, self.graph)

    def risks(self) -> list[RiskAnnotation]:
        risks, _diags = collect_risks(self.model)
        return risks

    def suggestions(self) -> list[SpecSuggestion]:
        return derive_effect_specifications(self.model, self.effective, self.graph)


def analyze_sources(sources: list[SourceFile],
                    catalog: Optional[ProfileCatalog] = None) -> Analysis:
    catalog = catalog or DEFAULT_CATALOG
    parsed = []
    for source in sources:
        tree, diags = parse_file(source)
        parsed.append((source, tree, diags))
    model = build_model(parsed, catalog=catalog)
    return Analysis(model=model, catalog=catalog)


def analyze_files(paths: list[str],
                  catalog: Optional[ProfileCatalog] = None) -> Analysis:
    return analyze_sources([SourceFile.read(path) for path in paths], catalog)


def analyze_text(content: str, path: str = "<memory>",
                 catalog: Optional[ProfileCatalog] = None) -> Analysis:
    return analyze_sources([SourceFile(path=path, content=content)], catalog)

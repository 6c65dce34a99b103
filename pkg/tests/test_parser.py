from psumlint.lexer import TokenKind, tokenize
from psumlint.source import SourceFile
from psumlint.syntax import Parser, parse_file

from conftest import ALL_FIXTURES, fixture_text


def parse(text: str, path: str = "<test>"):
    return parse_file(SourceFile(path=path, content=text))


def find(node, kind):
    hits = []
    if node.kind == kind:
        hits.append(node)
    for child in node.children:
        hits += find(child, kind)
    return hits


def test_part_def_with_specialization_and_attribute():
    root, diags = parse(
        "package P { part def Radar specializes Sensor { "
        "attribute isBlocked defined by ScalarValues::Boolean; } "
        "part def Sensor; }")
    assert diags == []
    defs = find(root, "Definition")
    radar = next(d for d in defs if d.attr("name") == "Radar")
    assert [ref.path.text for ref in radar.attr("specializes")] == ["Sensor"]
    usages = find(radar, "Usage")
    assert usages[0].attr("name") == "isBlocked"
    assert usages[0].attr("typing").path.segments == ("ScalarValues", "Boolean")


def test_empty_package():
    root, diags = parse("package P { }")
    assert diags == []
    assert len(root.children) == 1
    assert root.children[0].kind == "Package"
    assert root.children[0].children == []


def test_vfea_transcription_two_packages_no_diagnostics():
    root, diags = parse(fixture_text("vfea.sysml"), path="vfea.sysml")
    assert diags == []
    assert len([c for c in root.children if c.kind == "Package"]) == 2


def test_all_fixtures_parse_without_syntax_errors():
    for name in ALL_FIXTURES:
        _root, diags = parse(fixture_text(name), path=name)
        assert diags == [], f"{name}: {[d.render_text() for d in diags]}"


def test_annotation_single_entry_with_code():
    source = SourceFile(path="<t>", content="«IndeterminacySource<nd>»")
    parser = Parser(source)
    clause = parser.parse_annotation()
    assert [(e.name, list(e.codes)) for e in clause.entries] == \
        [("IndeterminacySource", ["nd"])]


def test_annotation_multi_stereotype_clause():
    source = SourceFile(path="<t>", content="«Uncertainty<ocr, epi, subj>, Effect»")
    parser = Parser(source)
    clause = parser.parse_annotation()
    assert [(e.name, list(e.codes)) for e in clause.entries] == \
        [("Uncertainty", ["ocr", "epi", "subj"]), ("Effect", [])]


def test_annotation_without_arguments():
    source = SourceFile(path="<t>", content="«BeliefStatement»")
    parser = Parser(source)
    clause = parser.parse_annotation()
    assert [(e.name, list(e.codes)) for e in clause.entries] == \
        [("BeliefStatement", [])]


def test_annotation_with_bad_punctuation_sets_raw():
    source = SourceFile(path="<t>", content="«Uncertainty{}»")
    parser = Parser(source)
    clause = parser.parse_annotation()
    assert clause.raw
    assert parser.diagnostics


def test_transition_with_source_shorthand():
    root, diags = parse("package P { state def S { entry action initial; "
                        "transition initial then normal; state normal; } }")
    assert diags == []
    transition = find(root, "Transition")[0]
    assert transition.attr("name") is None
    assert transition.attr("first").text == "initial"


def test_transition_full_clause_row():
    text = ("package P { state def S { state a; state b; "
            "transition t first a accept sig defined by Sig via p.q "
            "if x >= 1 do send Out(v) to r then b { u_pattern = Random; } } }")
    root, diags = parse(text)
    assert diags == []
    transition = find(root, "Transition")[0]
    assert transition.attr("first").text == "a"
    assert transition.attr("accept").param_name == "sig"
    assert transition.attr("guard") is not None
    assert transition.attr("do_send").signal.text == "Out"
    assert transition.attr("then").text == "b"


def test_metadata_both_forms():
    text = ("package P { part p { "
            "metadata m1 defined by RiskMetadata::Risk about p { "
            "totalRisk { impact = RiskMetadata::LevelEnum::high; } } "
            "metadata m2 : RiskMetadata::Risk { impact = RiskMetadata::LevelEnum::low; } "
            "} }")
    root, diags = parse(text)
    assert diags == []
    metas = find(root, "MetadataUsage")
    assert [m.attr("name") for m in metas] == ["m1", "m2"]
    assert metas[0].attr("about").text == "p"
    group = metas[0].children[0]
    assert group.attr("name") == "totalRisk"
    assert group.children[0].attr("name") == "impact"


def test_syntax_error_recovers_at_semicolon():
    root, diags = parse("package P { part def + Broken; part def Fine; }")
    assert any(d.code.startswith("P") for d in diags)
    names = [d.attr("name") for d in find(root, "Definition")]
    assert "Fine" in names


def test_unsupported_construct_reports_p001():
    _root, diags = parse("package P { flobnicate x; }")
    assert any(d.code == "P001" for d in diags)


def test_parse_never_raises_and_returns_tree_on_token_deletion():
    # deleting any single token still yields a tree; deleting a structural
    # delimiter always yields at least one diagnostic
    delimiters = {";", "{", "}", "(", ")", "«", "»"}
    for name in ALL_FIXTURES:
        text = fixture_text(name)
        source = SourceFile(path=name, content=text)
        tokens, _ = tokenize(source)
        stride = 1 if len(tokens) < 300 else 3
        for index, token in enumerate(tokens):
            if token.kind is TokenKind.EOF:
                continue
            if index % stride and token.text not in delimiters:
                continue
            mutated = text[:token.span.start] + text[token.span.end:]
            root, diags = parse(mutated, path="mutant")
            assert root is not None
            if token.text == ";" and \
                    mutated[token.span.start:].lstrip()[:1] == "}":
                continue  # a ';' directly before '}' is legitimately optional
            if token.text in delimiters:
                assert diags, (f"{name}: deleting {token.text!r} at "
                               f"{index} gave no diagnostic")


def test_parse_determinism():
    for name in ALL_FIXTURES:
        text = fixture_text(name)
        first, diags1 = parse(text, path=name)
        second, diags2 = parse(text, path=name)
        assert first.structure() == second.structure()
        assert [d.to_dict() for d in diags1] == [d.to_dict() for d in diags2]


def test_comment_trivia_is_attached():
    root, diags = parse("package P { // about the next part\n part p; }")
    assert diags == []
    usage = find(root, "Usage")[0]
    assert any("about the next part" in t for t in usage.attr("trivia", ()))


def test_message_and_occurrence_usages():
    root, diags = parse("package P { item def Sig; occurrence def O; "
                        "message m : Sig; occurrence happening : O; }")
    assert diags == []
    usages = find(root, "Usage")
    assert [(u.attr("keyword"), u.attr("name")) for u in usages] == \
        [("message", "m"), ("occurrence", "happening")]


def test_pathological_nesting_is_reported_not_fatal():
    deep_bodies = "package P " + "{ part q " * 5000 + "{ }" + " }" * 5001
    root, diags = parse(deep_bodies)
    assert root is not None
    assert any(d.code == "P001" for d in diags)

    deep_exprs = "package P { constraint c { " + "not " * 5000 + "x } }"
    root, diags = parse(deep_exprs)
    assert root is not None
    assert any(d.code == "P001" for d in diags)


def test_redefines_keyword_equals_symbolic_form():
    symbolic, d1 = parse("package P { part a; part b :>> a; }")
    keyword, d2 = parse("package P { part a; part b redefines a; }")
    assert d1 == [] and d2 == []
    b_sym = [u for u in find(symbolic, "Usage") if u.attr("name") == "b"][0]
    b_kw = [u for u in find(keyword, "Usage") if u.attr("name") == "b"][0]
    assert [p.text for p in b_sym.attr("redefines")] == \
        [p.text for p in b_kw.attr("redefines")] == ["a"]

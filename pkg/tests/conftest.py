import os

import pytest

from psumlint.api import Analysis, analyze_files

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

#: fixtures expected to validate without any error-severity findings
CLEAN_FIXTURES = ("acc.sysml", "interaction.sysml", "vfea.sysml",
                  "arrowhead.sysml", "frigate.sysml", "vehicle_health.sysml")
ALL_FIXTURES = CLEAN_FIXTURES + ("acc_verbatim.sysml",)


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_DIR, name)


def fixture_text(name: str) -> str:
    with open(fixture_path(name), "r", encoding="utf-8") as fh:
        return fh.read()


_cache: dict[str, Analysis] = {}


def analyze_fixture(name: str) -> Analysis:
    if name not in _cache:
        _cache[name] = analyze_files([fixture_path(name)])
    return _cache[name]


@pytest.fixture
def acc() -> Analysis:
    return analyze_fixture("acc.sysml")


@pytest.fixture
def interaction() -> Analysis:
    return analyze_fixture("interaction.sysml")


@pytest.fixture
def vfea() -> Analysis:
    return analyze_fixture("vfea.sysml")


@pytest.fixture
def arrowhead() -> Analysis:
    return analyze_fixture("arrowhead.sysml")


@pytest.fixture
def frigate() -> Analysis:
    return analyze_fixture("frigate.sysml")

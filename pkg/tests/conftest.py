import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def ontology():
    return synth.ontology()


@pytest.fixture
def database():
    return synth.database()


@pytest.fixture(scope="session")
def rules():
    from dstdoctor.consistency import load_rules

    return load_rules()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

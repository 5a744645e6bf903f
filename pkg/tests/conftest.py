from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from aiql.metamodel import default_schema
from aiql.modelstore import load_model

EXAMPLES = Path(str(resources.files("aiql.data").joinpath("examples")))
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def schema():
    return default_schema()


@pytest.fixture(scope="session")
def example_text():
    return (EXAMPLES / "server_query.aiql").read_text("utf-8")


@pytest.fixture(scope="session")
def system_model(schema):
    return load_model((EXAMPLES / "system.model").read_text("utf-8"), schema)


def header(version: str = "LAST") -> str:
    return f'MODEL "m";\nVERSION {version};\n'


# one "PASS/FAIL criterion N" line per acceptance criterion, shown after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

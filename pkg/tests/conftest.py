from pathlib import Path

import pytest

from picon.calculus import parse_protocol
from picon.pal import parse_architecture

MODELS = Path(__file__).resolve().parent.parent / "models"


def model_path(name: str) -> Path:
    return MODELS / name


@pytest.fixture
def metering():
    return parse_protocol(model_path("metering.pi").read_text())


@pytest.fixture
def metering_conformant():
    return parse_protocol(model_path("metering_conformant.pi").read_text())


@pytest.fixture
def a1():
    return parse_architecture(model_path("a1.pal").read_text(), {"r": 1})


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

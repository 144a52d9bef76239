from pathlib import Path

import pytest

from tracedp.event_log import EventLog, Variant, load_log, load_variants
from tracedp.rules import derive_rules

DATA = Path(__file__).parent / "data"
TABLE1A = DATA / "table1a.variants"
TABLE1B = DATA / "table1b.variants"

TABLE1A_COUNTS = {
    ("Register", "Triage", "Surg.", "Release"): 20,
    ("Register", "Triage", "Surg.", "Antibio.", "Release"): 12,
    ("Register", "Triage", "Antibio.", "Antibio.", "Release"): 6,
    ("Register", "Triage", "Antibio.", "Surg.", "Release"): 5,
    ("Register", "Triage", "Consul.", "Release"): 2,
    ("Register", "Triage", "Consul.", "Surg.", "Release"): 4,
}


def V(*acts, terminated=True):
    return Variant(tuple(acts), terminated)


@pytest.fixture(scope="session")
def table1a_log() -> EventLog:
    return load_log(TABLE1A)


@pytest.fixture(scope="session")
def table1a_rules(table1a_log):
    return derive_rules(table1a_log)


@pytest.fixture(scope="session")
def table1b_dist():
    return load_variants(TABLE1B)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

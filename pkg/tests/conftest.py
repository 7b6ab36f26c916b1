import pytest

from latticefold.model import load_contact_table, parse_sequence

ZIKA_PLOOP = "LHPGAGK"

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def table():
    return load_contact_table()


@pytest.fixture(scope="session")
def zika():
    return parse_sequence(ZIKA_PLOOP)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def report(label: str, ok: bool, detail: str = ""):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return report


@pytest.fixture
def note():
    """Record an informational (non-gating) acceptance line."""

    def report(label: str, detail: str):
        _acceptance_lines.append(f"[INFO] {label}: {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)

import pytest

from balspan.files import load_paper_fixture
from balspan.spanning import spanning_tree

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def example():
    return load_paper_fixture()


@pytest.fixture(scope="session")
def example_tree(example):
    return spanning_tree(example)


@pytest.fixture
def record_criterion():
    def record(number: int, name: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

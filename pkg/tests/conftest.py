import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# one (label, passed) entry per acceptance criterion, in execution order
CRITERIA: list = []


def record_criterion(label: str, passed: bool) -> None:
    CRITERIA.append((label, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in CRITERIA:
        terminalreporter.write_line(("[PASS] " if ok else "[FAIL] ") + label)


@pytest.fixture(scope="session")
def maze_dir() -> str:
    return os.path.join(FIXTURES, "maze")


@pytest.fixture(scope="session")
def distributions_dir() -> str:
    return os.path.join(FIXTURES, "distributions")


@pytest.fixture(scope="session")
def maze_program(maze_dir):
    from fuzzdist import graphs

    return graphs.load_program(os.path.join(maze_dir, "callgraph.json"),
                               os.path.join(maze_dir, "cfgs"))


@pytest.fixture(scope="session")
def maze_targets(maze_dir, maze_program):
    from fuzzdist import graphs

    locations = graphs.load_targets_file(os.path.join(maze_dir, "targets.txt"))
    return graphs.resolve_targets(maze_program, locations)

import pytest

from convexwalk.seeding import stream

TEST_MASTER_SEED = 0x5EED2025

_acceptance_lines = []


def rng_for(*labels):
    """A fresh deterministic stream for one test (or one stage of it)."""
    return stream(TEST_MASTER_SEED, *labels)


def record_acceptance(name, passed, detail):
    status = "PASS" if passed else "FAIL"
    _acceptance_lines.append(f"[{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng(request):
    return rng_for(request.node.nodeid)

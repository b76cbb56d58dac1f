import pytest

from twophase import FourierBoundary, TwoPhaseConfig


@pytest.fixture
def cfg_m2():
    return TwoPhaseConfig(R=0.9, m=2, K=32)


@pytest.fixture
def zero32():
    return FourierBoundary.zero(32)


_acceptance_key = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(_acceptance_key, [])

    def record(number, title, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

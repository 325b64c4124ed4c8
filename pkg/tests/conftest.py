import pytest

from ftalloc import CircuitProfile, SyntheticOracle, corpus_dir, load_profile

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def acceptance(request):
    """Record one acceptance criterion outcome for the end-of-run table."""
    lines = request.config.stash[_RESULTS]

    def record(number, passed, detail=""):
        lines.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(lines, key=lambda item: item[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}")


@pytest.fixture(scope="session")
def oracle():
    return SyntheticOracle()


@pytest.fixture(scope="session")
def reference_profile():
    return CircuitProfile("reference", n_qubits=10, depth=100, t_count=50, rotation_count=20)


@pytest.fixture(scope="session")
def corpus():
    return [load_profile(p) for p in sorted(corpus_dir().glob("*.json"))]

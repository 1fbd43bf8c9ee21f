import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


@pytest.fixture
def acceptance_report(request):
    results = request.config.stash[_RESULTS]

    def record(number, title, passed, detail):
        results.append((number, title, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = sorted(config.stash.get(_RESULTS, []))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in results:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")

import pytest

from batcherkit.substrate import Pool

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def pool():
    with Pool(4, name="tests") as p:
        yield p


@pytest.fixture(scope="session", params=[1, 8], ids=lambda w: f"w{w}")
def sized_pool(request):
    with Pool(request.param, name=f"tests-{request.param}") as p:
        yield p


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        help='Also run the desk-scale trend reproduction checks marked slow.',
        action='store_true', default=False
)


def pytest_collection_modifyitems(config, items):
    if config.getoption("run_slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def run_slow(request) -> bool:
    return request.config.getoption("run_slow")

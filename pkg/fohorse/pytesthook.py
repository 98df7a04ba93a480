import pytest


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
        help="Also run the long acceptance sweeps marked 'slow'")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long running acceptance sweep, needs --run-slow")


def pytest_runtest_setup(item):
    if item.get_closest_marker("slow"):
        if not item.config.getoption("--run-slow", default=False):
            pytest.skip("Slow test, use --run-slow to run it")

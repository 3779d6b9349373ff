import os
import platform
import sys
import traceback

import allure
import numpy as np
import pytest
from allure_commons.types import AttachmentType

from hardytree import __version__
from hardytree.config_manager import ConfigManager
from hardytree.log.logging import Logger

LOGGER = Logger.get_logger("hardytree")


def pytest_addoption(parser):
    """
    Adds custom command-line options to the pytest parser.

        :params parser: The argument parser instance.
    """
    LOGGER.info("Initializing pytest options.")
    parser.addoption(
        "--grid",
        action="store",
        default=64,
        type=int,
        help="Quadrature cells per edge for grid-based tests",
    )
    parser.addoption(
        "--seed",
        action="store",
        default=20240101,
        type=int,
        help="Seed of the random generator handed to tests",
    )
    parser.addoption(
        "--scope",
        action="store",
        help="Scope of the tree fixtures (eg. function, session)",
        default="function",
    )
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run tests marked with 'slow'",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks, run with --run-slow")


def pytest_collection_modifyitems(config, items):
    """
    Filters test items based on the --run-slow option.
    If the --run-slow option is provided, tests marked with 'slow' will be included else skipped.
        :params config: Pytest configuration object used to access command-line options.
        :params items: List of collected test items to be filtered.
    """
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="Skipping slow tests (use --run-slow to include them)")
    for item in items:
        if "slow" in item.keywords:
            LOGGER.debug("Skipping test: {}".format(item.nodeid))
            item.add_marker(skip_slow)


class Config:
    """
    Settings shared by the tests of one session.

    Attributes:
        grid (int): Quadrature cells per edge.
        seed (int): Seed of the random generator.
        run_slow (bool): Whether slow tests run.
    """

    def __init__(self, grid, seed, run_slow) -> None:
        LOGGER.info("Initializing Config.")
        self.grid = grid
        self.seed = seed
        self.run_slow = run_slow


@pytest.fixture(scope="session")
def config(request):
    """
    Pytest fixture to create a Config object from command-line options.

        :param request (SubRequest): The request object for accessing command-line options.
        :returns Config: The configuration of the session, else raises ValueError for an invalid grid.
    """
    try:
        grid = int(request.config.getoption("--grid"))
        if grid < 64:
            raise ValueError("grid must be at least 64, got {}".format(grid))
        return Config(
            grid=grid,
            seed=int(request.config.getoption("--seed")),
            run_slow=request.config.getoption("--run-slow"),
        )
    except Exception as e:
        LOGGER.error(
            "Error in config fixture: {}"
            "\nTraceback: {}".format(e, traceback.format_exc())
        )
        raise


def get_scope(fixture_name, config):
    if config.getoption("--scope") is None:
        return "function"
    elif config.getoption("--scope") == "module":
        return "module"
    elif config.getoption("--scope") == "class":
        return "class"
    elif config.getoption("--scope") == "function":
        return "function"
    return "session"


@pytest.fixture
def rng(config):
    """A freshly seeded numpy Generator per test."""
    return np.random.default_rng(config.seed)


@pytest.fixture(scope=get_scope)
def fixture_tree():
    """
    Factory loading a bundled tree document by name.

        :Yields callable: name -> TreeInput, memoised for the fixture's scope.
    """
    manager = ConfigManager()
    loaded = {}

    def load(name, root=None):
        key = (name, root)
        if key not in loaded:
            loaded[key] = manager.load("fixture:" + name, root=root)
        return loaded[key]

    yield load
    LOGGER.debug("Releasing {} loaded tree(s).".format(len(loaded)))


@pytest.fixture
def artifacts():
    """Text blocks (CSV, JSON, SVG) a test produced; attached to the report when it fails."""
    return []


@pytest.fixture(autouse=True)
def log_on_failure(request, artifacts):
    yield
    try:
        item = request.node
        failed = getattr(item, "rep_call", None) is not None and item.rep_call.failed
        if failed:
            name = item.nodeid.split("::")[-1]
            for index, text in enumerate(artifacts):
                allure.attach(text, name="{}-{}".format(name, index), attachment_type=AttachmentType.TEXT)
    except Exception as e:
        LOGGER.warning(
            "Got exception while making test report: {}\n Traceback: {}".format(
                e, traceback.format_exc()
            )
        )


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    """Generate the test case report.

    :param item (Object): The test item object, representing the test function or method.
    :param call (Object): The CallInfo object of the setup, call or teardown phase.
    """
    LOGGER.debug("pytest_runtest_makereport: Start generating allure report")
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)
    return rep


@pytest.fixture(scope="session", autouse=True)
def generate_environment_properties(request, config):
    alluredir = request.config.getoption("--alluredir", default=None)
    if not alluredir:
        return
    try:
        env_details = {
            "hardytree_version": __version__,
            "grid": config.grid,
            "seed": config.seed,
            "numpy_version": np.__version__,
            "os_platform": platform.system(),
            "os_release": platform.release(),
            "python_version": sys.version.replace("\n", ""),
        }
        os.makedirs(alluredir, exist_ok=True)
        with open(os.path.join(alluredir, "environment.properties"), "w") as f:
            for key, value in env_details.items():
                f.write(f"{key} = {value}\n")
    except Exception as e:
        LOGGER.error(
            "Got exception while creating environment properties for allure reports: {}".format(
                e
            )
        )

import os
import random

import pytest

from cpsplit.context import PrecisionContext

RESULTS_DIR = os.path.join(os.path.dirname(__file__), "..", "results")


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(digits=40)


@pytest.fixture(scope="session")
def ctx60():
    return PrecisionContext(digits=60)


@pytest.fixture
def rng():
    return random.Random(20260825)


@pytest.fixture(scope="session")
def results_dir():
    """Bundled scan outputs; regenerable with the cpsplit CLI (see README)."""
    path = os.path.abspath(RESULTS_DIR)
    if not os.path.isdir(path):
        pytest.skip("bundled results/ directory not present")
    return path

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import chain_network, gate_network  # noqa: E402


@pytest.fixture
def gate():
    return gate_network()


@pytest.fixture
def chain():
    return chain_network()

from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("topokit", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("topokit")

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fixtures():
    return FIXTURES

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from designloop.catalog import generate_catalog
from designloop.imaging import EmbeddingStore


@pytest.fixture(scope="session")
def small_catalog():
    """400 designs at 128px; big enough for sessions and calibration-free tests."""
    return generate_catalog(400, (128, 128), seed=17)


@pytest.fixture(scope="session")
def small_store(small_catalog):
    return EmbeddingStore.build(small_catalog)

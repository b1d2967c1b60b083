from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evoclust import Dataset, ScalerKind, dev_suite, scale


@pytest.fixture(scope="session")
def dev_datasets() -> list[Dataset]:
    """The full generated development suite, minmax scaled."""
    return [scale(ds, ScalerKind.MINMAX) for ds in dev_suite(seed=0)]

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `import oracles` work

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compile once up front so per-test timing assertions stay honest
    from cleanselect import _kernels

    _kernels.warmup()

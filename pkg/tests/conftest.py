import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from exes.corpus import Query, load_network_dir

T4_DIR = Path(__file__).resolve().parents[1] / "t4"


@pytest.fixture(scope="session")
def t4():
    return load_network_dir(T4_DIR)


@pytest.fixture
def q_ml_db():
    return Query(keywords=("ml", "db"), k=2)

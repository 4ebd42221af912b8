import sys
from pathlib import Path

import pytest

# make tests/oracles.py importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).resolve().parent))

from camm.model import builtin_model


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return Path(__file__).resolve().parent / "fixtures" / "corpus"


@pytest.fixture(scope="session")
def model():
    return builtin_model()

from pathlib import Path

import pytest

from illuminate.datagen import make_fixture_embeddings, make_two_class_corpus
from illuminate.textprep import load_embeddings

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def embed5():
    return load_embeddings(DATA_DIR / "embed5.txt")


@pytest.fixture(scope="session")
def synth_corpus():
    return make_two_class_corpus(n=200, seed=7)


@pytest.fixture(scope="session")
def synth_embeddings():
    return make_fixture_embeddings(dim=8, seed=7)

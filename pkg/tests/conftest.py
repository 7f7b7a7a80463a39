import pytest

from todkit import DATA_DIR, DEFAULT_DB_DIR
from todkit.kb import Database


@pytest.fixture(scope="session")
def db() -> Database:
    return Database.load(DEFAULT_DB_DIR)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR

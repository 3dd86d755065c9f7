import pytest

from lectio.taxonomy import default_taxonomy


@pytest.fixture(scope="session")
def taxonomy():
    return default_taxonomy()


@pytest.fixture()
def store(tmp_path):
    from lectio.store import Store

    s = Store(str(tmp_path / "test.sqlite3"))
    yield s
    s.close()

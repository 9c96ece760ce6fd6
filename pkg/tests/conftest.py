import pytest

from helpers import example_database, write_example_corpus


@pytest.fixture()
def example_db():
    return example_database()


@pytest.fixture()
def example_dirs(tmp_path):
    component_dirs, query_dir = write_example_corpus(tmp_path)
    return component_dirs, query_dir

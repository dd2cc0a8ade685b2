import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]
FUSE_PATH = ROOT / "models" / "fuse.rdm"


@pytest.fixture(scope="session")
def fuse_source() -> str:
    return FUSE_PATH.read_text()


@pytest.fixture(scope="session")
def fuse_model(fuse_source):
    from roadmapdsl.model import parse_model
    return parse_model(fuse_source)

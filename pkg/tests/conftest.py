from pathlib import Path

import numpy as np
import pytest

import config
from multires.scene import fixtures

SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"


@pytest.fixture(autouse=True)
def error_log(tmp_path, monkeypatch):
    # Файл ошибок каждого теста во временной папке
    monkeypatch.setattr(config, "ERROR_LOG_PATH", str(tmp_path / "errors.log"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def scenes_dir() -> Path:
    return SCENES_DIR


@pytest.fixture
def crease():
    return fixtures.crease()


@pytest.fixture
def fronto():
    return fixtures.fronto_quad()

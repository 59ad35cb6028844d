import numpy as np
import pytest

from qgband.graph_model import build_gamma1, build_gamma2, dirichlet_perturbation


@pytest.fixture
def gamma1():
    return build_gamma1([1, 1, 1, 1], 0.0, 1.0)


@pytest.fixture
def gamma2():
    return build_gamma2([1, 1, 1, 1, 1])


@pytest.fixture
def gamma1_b(gamma1):
    return dirichlet_perturbation(gamma1, "B")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("QGBAND_CACHE_DIR", str(tmp_path / "cache"))

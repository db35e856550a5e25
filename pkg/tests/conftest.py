"""
Fixtures compartilhadas da suíte de testes
"""

import numpy as np
import pytest

from src.capra import PhiFunction
from src.knorms import KNormFamily
from src.normcore import parse_source


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    """Sem arquivo de log e resultados em diretório temporário"""
    monkeypatch.setenv("LOG_DIR", "")
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.delenv("CAPRA_SEED", raising=False)
    monkeypatch.delenv("CAPRA_GAP_TOL", raising=False)


@pytest.fixture
def family():
    def build(source: str, d: int) -> KNormFamily:
        return KNormFamily(parse_source(source), d)
    return build


@pytest.fixture
def identity():
    return PhiFunction.identity


@pytest.fixture
def rng():
    return np.random.default_rng(7)

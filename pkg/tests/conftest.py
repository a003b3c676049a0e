import json
from pathlib import Path

import numpy as np
import pytest

from src.boson_entanglement.classes.density_matrix import SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import Bipartition
from src.boson_entanglement.fock_core import sector_index

EXPERIMENTS_DIR = Path(__file__).resolve().parent.parent / "config" / "experiments"
EXAMPLE_ENERGIES = (1.0, 0.7, 1.3, 0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def example_bip():
    return Bipartition(2, 4)


@pytest.fixture
def two_mode_bip():
    return Bipartition(1, 2)


@pytest.fixture
def experiments_dir():
    return EXPERIMENTS_DIR


@pytest.fixture
def write_experiment(tmp_path):
    """Write an experiment dictionary to a JSON file and return its path."""

    def _write(data: dict, name: str = "experiment.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write


def superposition(N: int, M: int, *occupations) -> SectorDensityMatrix:
    """Equal-weight pure superposition of the given Fock states."""
    index = sector_index(N, M)
    psi = np.zeros(len(index), dtype=complex)
    for state in occupations:
        psi[index[state]] = 1.0
    return SectorDensityMatrix.from_pure(N, M, psi)

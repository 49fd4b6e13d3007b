import os

import numpy as np
import pytest

from tmsdetect.bloch import SpinSize, tensor_from_density
from tmsdetect.sampling import SeededEnsemble, sample_state


def pytest_addoption(parser):
    parser.addoption("--accept-full", action="store_true", default=False,
                     help="run acceptance criteria at their full stated scale")


@pytest.fixture(scope="session")
def workers():
    return int(os.environ.get("TMSDETECT_TEST_WORKERS", max(os.cpu_count() or 1, 1)))


@pytest.fixture
def bell_tensor():
    rho = np.zeros((3, 3))
    rho[1, 1] = 1.0
    return tensor_from_density(rho, SpinSize(2))


@pytest.fixture
def ps3_tensor():
    return tensor_from_density(np.eye(3) / 3, SpinSize(2))


@pytest.fixture
def sym_ensemble():
    return SeededEnsemble(11, "sym", SpinSize(2))


def random_sym_states(seed, count, n_qubits=2):
    ens = SeededEnsemble(seed, "sym", SpinSize(n_qubits))
    return [sample_state(ens, i) for i in range(count)]

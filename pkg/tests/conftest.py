import numpy as np
import pytest

from lgsqueeze.scenarios import default_config, run_scenario


@pytest.fixture(scope="session")
def psr_results():
    return {
        name: run_scenario(default_config(name))
        for name in ("PsrSinglePhoton", "PsrPCrosstalk", "FwmTwoPhoton")
    }


@pytest.fixture(scope="session")
def pdc_benchmark():
    return run_scenario(default_config("PdcBenchmark"))


@pytest.fixture(scope="session")
def pdc_eigen_pump():
    return run_scenario(default_config("PdcEigenPump"))


@pytest.fixture(scope="session")
def pdc_heralding():
    return run_scenario(default_config("PdcHeralding"))


@pytest.fixture(scope="session")
def waist_scan():
    return run_scenario(default_config("WaistScan"))


def random_symmetric(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    xi = 0.5 * (a + a.T)
    return scale * xi / np.linalg.norm(xi, 2)


def random_normal_symmetric(rng, n, scale=1.0):
    """Normal and symmetric: real orthogonal eigenvectors, complex spectrum."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    d = rng.uniform(0.2, 1.0, size=n) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=n))
    xi = (q * d) @ q.T
    return scale * xi / np.linalg.norm(xi, 2)

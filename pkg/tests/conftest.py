import numpy as np
import pytest

from ltmor import fem, linalg
from ltmor.mesh import build_unit_square_mesh

ACCEPTANCE_LINES: list[str] = []


class SmallModel:
    """High-fidelity operators on a coarse mesh with the standard Gaussian source."""

    def __init__(self, n):
        self.mesh = build_unit_square_mesh(n)
        self.K = fem.assemble_stiffness(self.mesh)
        self.M = fem.assemble_mass(self.mesh)
        self.source = fem.gaussian_source(self.mesh)
        self.b = fem.build_source_vector(self.mesh, self.source, self.M)
        self.factor = linalg.cholesky(self.K)


_MODELS: dict[int, SmallModel] = {}


@pytest.fixture(scope="session")
def small_model():
    def get(n):
        if n not in _MODELS:
            _MODELS[n] = SmallModel(n)
        return _MODELS[n]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

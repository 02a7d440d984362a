import numpy as np
import pytest

from nsfd.bench import reference_solution, run_table
from nsfd.models import BirthFunction, predator_prey, single_species, sis_dcl, vaccination

# Filled by tests/test_acceptance.py, printed at the end of the session.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


def builtin_models():
    return [
        single_species(),
        single_species(BirthFunction.rational(p=2.0, q=1.0, n=1.0), d=1.0),
        single_species(BirthFunction.hyperbolic(A=2.0, c=0.5), d=1.0),
        predator_prey(),
        vaccination(),
        sis_dcl(),
    ]


def random_initial_states(model, count, rng):
    """Nonnegative states inside the model's operating region.

    Drawn from the lower half of the operating box, so sis-dcl states keep
    S + I within the bound where its alpha is valid.
    """
    lo, hi = (np.asarray(b) for b in model.box)
    pts = lo + rng.random((count, model.dim)) * (0.5 * hi - lo)
    return np.maximum(pts, lo)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def b1_model():
    return single_species()


@pytest.fixture(scope="session")
def b1_reference(b1_model):
    return reference_solution(b1_model, [2.0], 10.0, 1e-5)


@pytest.fixture(scope="session")
def b1_table(b1_model, b1_reference):
    rows = run_table(b1_model, y0=[2.0], horizon=10.0, reference=b1_reference)
    table = {}
    for row in rows:
        table.setdefault(row.dt, {})[row.scheme.split("(")[0]] = row
    return table

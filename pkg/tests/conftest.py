import importlib.resources

import pytest

from qaoalab import build_chemistry_problem, instance_ground_manifold, parse_fcidump


def h2_fcidump_text() -> str:
    return (
        importlib.resources.files("qaoalab") / "data" / "h2_sto3g.fcidump"
    ).read_text()


@pytest.fixture(scope="session")
def h2_integrals():
    return parse_fcidump(h2_fcidump_text())


@pytest.fixture(scope="session")
def h2_instance(h2_integrals):
    return build_chemistry_problem(h2_integrals, label="h2_sto3g")


@pytest.fixture(scope="session")
def h2_manifold(h2_instance):
    return instance_ground_manifold(h2_instance)

import numpy as np
import pytest

from cpeddy import (ALPHA_FS, AtomParams, DissipationModel, MaterialParams,
                    QuadSettings)


@pytest.fixture(scope="session")
def atom():
    return AtomParams(omega_a=2e-6)


@pytest.fixture(scope="session")
def gold_drude():
    return MaterialParams(9.0, DissipationModel("constant", 0.03),
                          ALPHA_FS, "local_drude")


@pytest.fixture(scope="session")
def gold_plasma():
    return MaterialParams(9.0, DissipationModel("constant", 0.0),
                          ALPHA_FS, "local_plasma")


@pytest.fixture(scope="session")
def gold_scib():
    return MaterialParams(9.0, DissipationModel("constant", 0.03),
                          ALPHA_FS, "scib")


@pytest.fixture(scope="session")
def qs():
    return QuadSettings(rel_tol=1e-9)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def gold_gamma(gamma_ev, response="local_drude"):
    return MaterialParams(9.0, DissipationModel("constant", gamma_ev),
                          ALPHA_FS, response)


def gold_crystal(t_ref, response="local_drude", exponent=5.0):
    return MaterialParams(9.0, DissipationModel("power_law", 0.03, exponent,
                                                t_ref), ALPHA_FS, response)

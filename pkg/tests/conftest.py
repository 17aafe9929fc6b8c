import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cyclosigma.curves import (
    burnside,
    equianharmonic,
    equipentamic,
    general_cubic,
    lemniscatic,
)
from cyclosigma.sigma import build_context


@pytest.fixture(scope="session")
def ctx_equi():
    # mu3 nonzero on purpose: exercises the completed-square invariant
    return build_context(equianharmonic(0.3 + 0.2j, 1.0 + 0.1j))


@pytest.fixture(scope="session")
def ctx_equi_pure():
    return build_context(equianharmonic(0.0, 1.0))


@pytest.fixture(scope="session")
def ctx_lem():
    return build_context(lemniscatic(-1.0 + 0.4j))


@pytest.fixture(scope="session")
def ctx_lem_real():
    return build_context(lemniscatic(-1.0))


@pytest.fixture(scope="session")
def ctx_cubic():
    return build_context(general_cubic(0.2, -1.1 + 0.3j, 0.8))


@pytest.fixture(scope="session")
def ctx_equipentamic():
    return build_context(equipentamic(0.0, 1.0 + 0.3j))


@pytest.fixture(scope="session")
def ctx_burnside():
    return build_context(burnside(0.3 + 0.1j, -1.0 + 0.2j))

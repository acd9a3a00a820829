from pathlib import Path

import pytest
from hypothesis import settings

from orientforge.gadgets import GadgetStore
from orientforge.graph import DegreeSpec, MedepInstance, Multigraph, PartialOrientationInstance

settings.register_profile("suite", max_examples=60, deadline=None)
settings.load_profile("suite")

REPO = Path(__file__).resolve().parent.parent
STORE_DIR = REPO / "gadgets"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def f1():
    """u-v with delta(u)=1, rho(v)=1."""
    return PartialOrientationInstance(Multigraph(2, [(0, 1)]), [DegreeSpec(0, 1, 0), DegreeSpec(1, 0, 0)])


@pytest.fixture
def f2():
    """u-v with delta(u)=1, theta(v)=1: unsolvable."""
    return PartialOrientationInstance(Multigraph(2, [(0, 1)]), [DegreeSpec(0, 1, 0), DegreeSpec(0, 0, 1)])


@pytest.fixture
def f3():
    """s-u-v-t with k=1."""
    return MedepInstance(Multigraph(4, [(0, 1), (1, 2), (2, 3)]), 0, 3, 1)


@pytest.fixture(scope="session")
def store():
    return GadgetStore.load(STORE_DIR)

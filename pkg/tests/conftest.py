import hypothesis
import numpy as np
import pytest

from macrb.model import ScenarioConfig
from macrb.scc import UncertaintyRegion

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("thorough", max_examples=500)


@pytest.fixture
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def region_p1():
    return UncertaintyRegion.from_bounds(0, 20, 10)


@pytest.fixture(scope="session")
def region_p2():
    return UncertaintyRegion.from_bounds(-10, 30, 10)

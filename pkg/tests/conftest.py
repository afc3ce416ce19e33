import math

import numpy as np
import pytest

from qcs.channel import ChannelParams
from qcs.states import build_state

# cosh 2r = 19.8 with beta = 1.8 gives C^2 = 11, like the other reference states
SQUEEZED_R = 0.5 * math.acosh(19.8)


@pytest.fixture(scope="session")
def fock5():
    return build_state({"family": "fock", "n": 5})


@pytest.fixture(scope="session")
def cat11():
    return build_state("cat:qcs2=11")


@pytest.fixture(scope="session")
def even4():
    return build_state("even:4")


@pytest.fixture(scope="session")
def squeezed11():
    return build_state({"family": "squeezed_thermal", "beta": 1.8, "r": SQUEEZED_R})


@pytest.fixture(scope="session")
def warm_channel():
    return ChannelParams(t_R=1.0, nbar_inf=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def random_gaussian_spec(rng, max_squeeze=0.6, max_beta=2.0, max_shift=1.0):
    """Physical covariance beta R S S R^T with a random displacement."""
    beta = rng.uniform(1.0, max_beta)
    r = rng.uniform(0.0, max_squeeze)
    phi = rng.uniform(0.0, 2 * math.pi)
    c, s = math.cos(phi), math.sin(phi)
    rotation = np.array([[c, -s], [s, c]])
    V = beta * rotation @ np.diag([math.exp(-2 * r), math.exp(2 * r)]) @ rotation.T
    V = 0.5 * (V + V.T)
    mean = rng.uniform(-max_shift, max_shift, size=2)
    return {"family": "gaussian", "V": V.tolist(), "mean": mean.tolist()}


@pytest.fixture
def gaussian_specs(rng):
    return [random_gaussian_spec(rng) for _ in range(20)]

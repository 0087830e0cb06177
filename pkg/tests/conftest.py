import math

import numpy as np
import pytest
from hypothesis import strategies as st

from ckpt_planner.model import CheckpointParams, Platform, PowerProfile, Workload

S1_CKPT = CheckpointParams(c=10.0, r=10.0, d=1.0, omega=0.5)
S1_PLATFORM = Platform.from_mtbf(300.0)
S1_POWER = PowerProfile(p_static=10.0, p_cal=10.0, p_io=100.0, p_down=0.0)
S2_POWER = PowerProfile(p_static=5.0, p_cal=10.0, p_io=100.0, p_down=0.0)
WEAK_CKPT = CheckpointParams(c=1.0, r=1.0, d=0.1, omega=0.5)


@pytest.fixture
def s1():
    return Workload(1.0), S1_CKPT, S1_PLATFORM, S1_POWER


def random_scenario(rng):
    """Valid scenario with a comfortably non-empty period domain."""
    c = rng.uniform(0.1, 20)
    r = rng.uniform(0, 20)
    d = rng.uniform(0, 20)
    omega = rng.uniform(0, 1)
    mu = (d + r + omega * c + c) * math.exp(rng.uniform(math.log(1.5), math.log(1000)))
    power = PowerProfile(rng.uniform(0.1, 100), rng.uniform(0, 1000),
                         rng.uniform(0, 1000), rng.uniform(0, 1000))
    return CheckpointParams(c, r, d, omega), Platform.from_mtbf(mu), power


@st.composite
def scenarios(draw, omega=None):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    ckpt, platform, power = random_scenario(np.random.default_rng(seed))
    if omega is not None:
        ckpt = CheckpointParams(ckpt.c, ckpt.r, ckpt.d, omega)
    return ckpt, platform, power

import math

import numpy as np
import pytest

from ratchet.models import MomentumState, RatchetParams
from ratchet.services import core


@pytest.fixture
def resonance_params():
    """kappa = pi with the kicks half a period apart, P = 0.5"""
    return RatchetParams(kappa=math.pi, strength_P=0.5, eta=0.5)


@pytest.fixture
def uniform_state():
    return core.uniform_initial_state()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng):
    """Factory for normalized random states on a window of `size` sites"""
    def make(k_min: int = -20, size: int = 41) -> MomentumState:
        amps = rng.normal(size=size) + 1j * rng.normal(size=size)
        return MomentumState(k_min=k_min, amps=amps / np.linalg.norm(amps))
    return make


def on_common_window(a: MomentumState, b: MomentumState):
    """Amplitudes of both states on the union of their windows"""
    k_lo = min(a.k_min, b.k_min)
    k_hi = max(a.k_max, b.k_max)
    return a.on_window(k_lo, k_hi), b.on_window(k_lo, k_hi)

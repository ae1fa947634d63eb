import math

import numpy as np
import pytest
from pydantic import ValidationError

from ratchet.exceptions import GridUnderflowError, WindowOverflowError
from ratchet.models import MomentumState, PhysicalUnits
from ratchet.services import core


def test_uniform_state_is_a_single_zero_momentum_site(uniform_state):
    assert uniform_state.k_min == 0
    assert uniform_state.size == 1
    assert uniform_state.norm == pytest.approx(1.0)


@pytest.mark.parametrize("sites,expected", [(1, 2), (2, 2), (3, 4), (4, 4), (5, 8), (1000, 1024)])
def test_fft_grid_size(sites, expected):
    assert core.fft_grid_size(sites) == expected


def test_position_samples_are_unitary_and_invertible(random_state):
    state = random_state(k_min=-7, size=30)
    N = core.fft_grid_size(2 * state.size)
    samples = core.position_samples(state, N)
    assert np.sum(np.abs(samples) ** 2) == pytest.approx(state.norm, abs=1e-13)

    back = core.from_position_samples(samples, state.k_min, N, state.size)
    np.testing.assert_allclose(back.amps, state.amps, atol=1e-13)


def test_uniform_state_samples_are_flat(uniform_state):
    samples = core.position_samples(uniform_state, 16)
    np.testing.assert_allclose(samples, np.full(16, 1 / 4), atol=1e-15)


def test_grid_underflow(random_state):
    state = random_state(size=10)
    with pytest.raises(GridUnderflowError, match="grid underflow"):
        core.position_samples(state, 8)


def test_window_overflow_when_probability_leaks():
    state = MomentumState.from_mapping({0: 1 / math.sqrt(2), 5: 1 / math.sqrt(2)})
    samples = core.position_samples(state, 16)
    with pytest.raises(WindowOverflowError, match="momentum window overflow"):
        core.from_position_samples(samples, 0, 16, size=3)


def test_ensure_headroom_grows_window_symmetrically(uniform_state):
    grown = core.ensure_headroom(uniform_state)
    assert (grown.k_min, grown.k_max) == (-64, 64)
    assert grown.edge_band_probability() == 0.0
    np.testing.assert_allclose(grown.on_window(0, 0), [1.0])


def test_ensure_headroom_respects_k_cap(uniform_state):
    with pytest.raises(WindowOverflowError):
        core.ensure_headroom(uniform_state, k_cap=10)


def test_compact_keeps_margin(uniform_state):
    compacted = core.compact(uniform_state.padded(500))
    assert (compacted.k_min, compacted.k_max) == (-64, 64)
    assert compacted.norm == pytest.approx(1.0)


def test_compact_leaves_tight_windows_alone(random_state):
    state = random_state()
    assert core.compact(state) is state


def test_derive_params():
    units = PhysicalUnits(omega_R=1.0, T=0.5, V0=2.0, hbar=1.0, k_L=2.0, m=1.0)
    kappa, strength_P = core.derive_params(units)
    assert kappa == pytest.approx(4.0)
    assert strength_P == pytest.approx(1.0)


def test_physical_units_reject_inconsistent_wavelength():
    with pytest.raises(ValidationError):
        PhysicalUnits(omega_R=1.0, T=0.5, V0=2.0, hbar=1.0, k_L=2.0, m=1.0, wavelength=1.0)
    units = PhysicalUnits(omega_R=1.0, T=0.5, V0=2.0, hbar=1.0, k_L=2.0, m=1.0, **{"lambda": math.pi})
    assert units.resolved_wavelength == pytest.approx(math.pi)


@pytest.mark.parametrize("eta,expected", [(0.0, 0.0), (0.5, 1.0), (0.25, 1 / 3), (0.75, 1 / 3)])
def test_asynchronization_degree(eta, expected):
    assert core.asynchronization_degree(eta) == pytest.approx(expected)


def test_asynchronization_degree_domain():
    with pytest.raises(ValueError):
        core.asynchronization_degree(1.0)


def test_momentum_state_rejects_non_finite_amplitudes():
    with pytest.raises(ValidationError):
        MomentumState(k_min=0, amps=[1.0, np.nan])


def test_derived_kappa_scales_with_period():
    units = PhysicalUnits(omega_R=1.3, T=0.2, V0=2.0, hbar=1.0, k_L=2.0, m=1.0)
    doubled = units.model_copy(update={"T": 0.4})
    kappa, strength_P = core.derive_params(units)
    kappa_doubled, strength_doubled = core.derive_params(doubled)
    assert kappa_doubled == pytest.approx(2 * kappa)
    assert strength_doubled == pytest.approx(2 * strength_P)

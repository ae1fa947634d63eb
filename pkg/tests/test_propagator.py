import math

import numpy as np
import pytest
from scipy.special import jv

from ratchet.exceptions import UnitarityError, WindowOverflowError
from ratchet.models import KickOrder, Potential, RatchetParams
from ratchet.services import core, observables, propagator

from .conftest import on_common_window


@pytest.mark.parametrize("z", [0.15, 0.5, 1.5, 3.0, 9.0])
def test_kick_bandwidth_covers_bessel_weight(z):
    tail_tol = 1e-14
    b = propagator.kick_bandwidth(z, tail_tol)
    orders = np.arange(-b, b + 1)
    inside = np.sum(jv(orders, z) ** 2)
    assert 1.0 - inside < tail_tol
    assert b >= math.ceil(z)


def test_kick_bandwidth_of_zero_strength():
    assert propagator.kick_bandwidth(0.0, 1e-14) == 0


def test_sin_kick_from_rest_follows_bessel_signs(uniform_state):
    P = 0.5
    kicked = propagator.kick(uniform_state, Potential.V2, P, 0.3)
    np.testing.assert_allclose(
        kicked.on_window(-2, 2), [jv(2, P), jv(1, P), jv(0, P), -jv(1, P), jv(2, P)], atol=1e-13
    )


def test_sin2x_kick_moves_in_steps_of_two(uniform_state):
    P, alpha = 1.0, 0.3
    kicked = propagator.kick(uniform_state, Potential.V1, P, alpha)
    np.testing.assert_allclose(
        kicked.on_window(-2, 2), [jv(1, P * alpha), 0.0, jv(0, P * alpha), 0.0, -jv(1, P * alpha)], atol=1e-13
    )


def test_zero_strength_kick_is_identity(random_state):
    state = random_state()
    assert propagator.kick(state, Potential.COMBINED, 0.0, 0.3) is state
    assert propagator.kick(state, Potential.V1, 1.0, 0.0) is state


def test_negative_strength_undoes_kick(random_state):
    state = random_state()
    there = propagator.kick(state, Potential.COMBINED, 1.3, 0.3)
    back = propagator.kick(there, Potential.COMBINED, -1.3, 0.3)
    a, b = on_common_window(back, state)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_free_evolution_is_a_phase(random_state):
    state = random_state()
    evolved = propagator.free_evolve(state, 0.5, math.pi)
    np.testing.assert_allclose(np.abs(evolved.amps), np.abs(state.amps))
    np.testing.assert_allclose(
        propagator.inverse_free_evolve(evolved, 0.5, math.pi).amps, state.amps, atol=1e-14
    )
    with pytest.raises(ValueError):
        propagator.free_evolve(state, 1.5, math.pi)


def test_kick_respects_k_cap(uniform_state):
    with pytest.raises(WindowOverflowError):
        propagator.kick(uniform_state, Potential.V2, 0.5, 0.3, k_cap=32)


def test_norm_is_conserved_over_200_periods():
    params = RatchetParams(kappa=math.pi, strength_P=1.5, eta=0.5)
    trajectory = propagator.evolve(core.uniform_initial_state(), params, 200)
    assert len(trajectory.records) == 200
    assert max(record.norm_error for record in trajectory.records) < 1e-10


def test_split_step_matches_dense_bessel_propagation(resonance_params):
    k_range = (-128, 128)
    split = propagator.evolve(core.uniform_initial_state(), resonance_params, 50).final_state
    dense = propagator.dense_propagate(resonance_params, k_range, 50)
    np.testing.assert_allclose(split.on_window(*k_range), dense.amps, atol=1e-9)


@pytest.mark.parametrize(
    "params",
    [
        RatchetParams(kappa=0.7 * math.pi, strength_P=1.0, eta=0.3, kick_order=KickOrder.V2_FIRST),
        RatchetParams(kappa=math.pi, strength_P=0.5, eta=0.0),
    ],
)
def test_dense_oracle_for_generic_parameters(params):
    k_range = (-100, 100)
    split = propagator.evolve(core.uniform_initial_state(), params, 10).final_state
    dense = propagator.dense_propagate(params, k_range, 10)
    np.testing.assert_allclose(split.on_window(*k_range), dense.amps, atol=1e-9)


def test_dense_matrix_needs_room_for_the_kick(resonance_params):
    with pytest.raises(UnitarityError, match="too small"):
        propagator.dense_period_matrix(resonance_params, (-5, 5))


def test_ehrenfest_identity_per_kick(rng, random_state):
    potentials = [Potential.V1, Potential.V2, Potential.COMBINED]
    for _ in range(100):
        state = random_state()
        potential = potentials[rng.integers(3)]
        P = rng.uniform(0.1, 3.0)
        kicked = propagator.kick(state, potential, P, 0.3)
        change = observables.mean_momentum(kicked) - observables.mean_momentum(state)
        expected = -observables.potential_gradient_expectation(state, potential, P, 0.3)
        assert change == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize(
    "params",
    [
        RatchetParams(kappa=math.pi, strength_P=0.5, eta=0.5),
        RatchetParams(kappa=0.7 * math.pi, strength_P=1.2, eta=0.3, kick_order=KickOrder.V2_FIRST),
        RatchetParams(kappa=0.5 * math.pi, strength_P=0.8, eta=0.0),
    ],
)
def test_period_force_is_the_momentum_change(params):
    records = propagator.evolve(core.uniform_initial_state(), params, 40).records
    previous = 0.0
    for record in records:
        assert record.mean_k - previous == pytest.approx(-record.period_force, abs=1e-9)
        previous = record.mean_k


@pytest.mark.parametrize("kappa_pi", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("eta", [0.0, 0.3, 0.5])
def test_no_current_without_the_second_harmonic(kappa_pi, eta):
    params = RatchetParams.from_kappa_pi(kappa_pi, strength_P=0.5, alpha=0.0, eta=eta)
    records = propagator.evolve(core.uniform_initial_state(), params, 200).records
    assert max(abs(record.mean_k) for record in records) < 1e-10


def test_record_half_steps_keeps_pre_kick_states(resonance_params):
    trajectory = propagator.evolve(core.uniform_initial_state(), resonance_params, 3, record_half_steps=True)
    assert len(trajectory.pre_kick_states) == 3
    first, second = trajectory.pre_kick_states[0]
    force = observables.period_force(first, second, resonance_params)
    assert force == pytest.approx(trajectory.records[0].period_force)


def test_evolve_needs_a_period(resonance_params, uniform_state):
    with pytest.raises(ValueError):
        propagator.evolve(uniform_state, resonance_params, 0)


def test_coincident_kicks_combine(random_state):
    params = RatchetParams(kappa=0.8 * math.pi, strength_P=0.9, eta=0.0)
    state = random_state()
    stepped = propagator.period_step(state, params)
    by_hand = propagator.kick(
        propagator.free_evolve(state, 1.0, params.kappa), Potential.COMBINED, 0.9, params.alpha
    )
    a, b = on_common_window(stepped, by_hand)
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_bessel_values_at_zero():
    assert propagator.bessel_J(0, 0.0) == 1.0
    for m in (-3, -1, 1, 2, 5):
        assert propagator.bessel_J(m, 0.0) == 0.0


@pytest.mark.parametrize("z", [0.5, 1.5, 3.0])
def test_bessel_completeness(z):
    total = sum(propagator.bessel_J(m, z) ** 2 for m in range(-60, 61))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_evolve_stops_on_norm_drift(monkeypatch, resonance_params, uniform_state):
    def leaky_kick(state, *args, **kwargs):
        return state.with_amps(state.amps * 1.001)

    monkeypatch.setattr(propagator, "kick", leaky_kick)
    with pytest.raises(UnitarityError, match="unitarity breach"):
        propagator.evolve(uniform_state, resonance_params, 5)

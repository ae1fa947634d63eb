"""
One-period evolution of the desynchronized flashing ratchet.

A period is free evolution for eta, the first kick, free evolution for
1 - eta and the second kick. Kicks are applied by multiplication on a
position grid (split-step); dense_period_matrix builds the same operator
from Bessel-coefficient convolutions as an independent oracle.

Sign convention: exp(-i z sin x) = sum_m J_m(z) exp(-i m x), so a kick
moves amplitude from k to k - m with weight J_m(P) for sin x and from k to
k - 2m with weight J_m(P*alpha) for alpha*sin 2x. Starting from k = 0 the
first-order amplitude appears at k = -1 with the positive value J_1(P).
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import jv

from ..exceptions import UnitarityError, WindowOverflowError
from ..models import (
    DEFAULT_K_CAP,
    MomentumState,
    Potential,
    RatchetParams,
    Trajectory,
    TrajectoryRecord,
)
from . import core, observables

logger = logging.getLogger(__name__)

# Largest norm change over a run before evolve() gives up.
NORM_DRIFT_LIMIT = 1e-8


def bessel_J(m: int, z: float) -> float:
    """Bessel function of the first kind J_m(z) for integer order"""
    return float(jv(m, z))


def kick_bandwidth(z: float, tail_tol: float) -> int:
    """
    Smallest b with sum_{|m|>b} J_m(z)^2 < tail_tol/4.

    The tail is summed from the top so no cancellation against 1 occurs.
    """
    z = abs(z)
    if z == 0:
        return 0
    top = int(math.ceil(z)) + 64
    orders = np.arange(0, top + 1)
    weights = jv(orders, z) ** 2
    # tail[b] = sum over |m| > b, using J_{-m}^2 = J_m^2
    tail = 2.0 * np.concatenate((np.cumsum(weights[::-1])[::-1][1:], [0.0]))
    return int(np.argmax(tail < tail_tol / 4))


def potential_values(potential: Potential, x: np.ndarray, alpha: float) -> np.ndarray:
    if potential == Potential.V1:
        return alpha * np.sin(2 * x)
    if potential == Potential.V2:
        return np.sin(x)
    return alpha * np.sin(2 * x) + np.sin(x)


def potential_bandwidth(potential: Potential, strength_P: float, alpha: float, tail_tol: float) -> int:
    """Momentum reach of one kick, in lattice sites"""
    reach = 0
    if potential in (Potential.V1, Potential.COMBINED):
        reach += 2 * kick_bandwidth(strength_P * alpha, tail_tol)
    if potential in (Potential.V2, Potential.COMBINED):
        reach += kick_bandwidth(strength_P, tail_tol)
    return reach


def _free_phases(momenta: np.ndarray, tau: float, kappa: float) -> np.ndarray:
    return np.exp(-0.5j * (tau * kappa) * (momenta.astype(float) ** 2))


def free_evolve(state: MomentumState, tau: float, kappa: float) -> MomentumState:
    """Apply exp(-i tau kappa k^2 / 2) for a fraction tau of a period"""
    if not 0 <= tau <= 1:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if tau == 0:
        return state
    return state.with_amps(state.amps * _free_phases(state.momenta, tau, kappa))


def inverse_free_evolve(state: MomentumState, tau: float, kappa: float) -> MomentumState:
    """Undo free_evolve(state, tau, kappa)"""
    if tau == 0:
        return state
    return state.with_amps(state.amps * np.conj(_free_phases(state.momenta, tau, kappa)))


def kick(
    state: MomentumState,
    potential: Potential,
    strength_P: float,
    alpha: float,
    k_cap: Optional[int] = None,
) -> MomentumState:
    """
    Multiply by exp(-i P v(x)) on a position grid.

    The window is grown until its edge bands are empty, padded by the kick
    bandwidth, transformed on a power-of-two grid of at least twice that
    span, and compacted afterwards. A negative strength applies the
    inverse kick.
    """
    if strength_P == 0 or (potential == Potential.V1 and alpha == 0):
        return state
    k_cap = k_cap if k_cap is not None else DEFAULT_K_CAP

    state = core.ensure_headroom(state, k_cap)
    reach = potential_bandwidth(potential, strength_P, alpha, state.tail_tol)
    padded = state.padded(reach)
    core.check_cap(padded, k_cap)

    N = core.fft_grid_size(2 * padded.size)
    x = 2 * np.pi * np.arange(N) / N
    samples = core.position_samples(padded, N)
    samples = samples * np.exp(-1j * strength_P * potential_values(potential, x, alpha))
    logger.debug(
        f"Kick {potential.value} P={strength_P:.6g} on [{padded.k_min}, {padded.k_max}] with N={N}"
    )
    try:
        kicked = core.from_position_samples(samples, padded.k_min, N, padded.size, state.tail_tol)
    except WindowOverflowError:
        logger.error(f"Kick {potential.value} leaked outside window [{padded.k_min}, {padded.k_max}]")
        raise
    return core.compact(kicked)


def _kick_with(state: MomentumState, potential: Potential, params: RatchetParams) -> MomentumState:
    return kick(state, potential, params.strength_P, params.alpha, params.k_cap)


def _step_with_pre_kick_states(
    state: MomentumState, params: RatchetParams
) -> Tuple[MomentumState, MomentumState, MomentumState]:
    """One period; also returns the states immediately before each kick"""
    if params.coincident:
        before = free_evolve(state, 1.0, params.kappa)
        return _kick_with(before, Potential.COMBINED, params), before, before

    first, second = params.slot_potentials()
    before_first = free_evolve(state, params.eta, params.kappa)
    after_first = _kick_with(before_first, first, params)
    before_second = free_evolve(after_first, 1.0 - params.eta, params.kappa)
    return _kick_with(before_second, second, params), before_first, before_second


def period_step(state: MomentumState, params: RatchetParams) -> MomentumState:
    """
    One period: free(eta), first kick, free(1 - eta), second kick.

    With eta = 0 the kicks coincide: free(1) followed by one combined kick.
    """
    return _step_with_pre_kick_states(state, params)[0]


def evolve(
    state: MomentumState,
    params: RatchetParams,
    n_periods: int,
    record_half_steps: bool = False,
) -> Trajectory:
    """
    Apply period_step n_periods times, recording observables after each period.

    The period force of record t is evaluated on the two pre-kick states of
    period t; with record_half_steps those states are kept as well.
    """
    if n_periods < 1:
        raise ValueError(f"n_periods must be at least 1, got {n_periods}")

    initial_norm = state.norm
    records: List[TrajectoryRecord] = []
    pre_kick_states: List[Tuple[MomentumState, MomentumState]] = []
    for t in range(1, n_periods + 1):
        state, before_first, before_second = _step_with_pre_kick_states(state, params)
        norm = state.norm
        if not math.isfinite(norm):
            logger.error(f"Non-finite norm at period {t}")
            raise UnitarityError(f"non-finite norm at period {t}")
        if abs(norm - initial_norm) > NORM_DRIFT_LIMIT:
            logger.error(f"Norm drifted by {norm - initial_norm:.3e} at period {t}")
            raise UnitarityError(f"unitarity breach: norm drift {norm - initial_norm:.3e} at period {t}")
        records.append(
            TrajectoryRecord(
                t=t,
                mean_k=observables.mean_momentum(state),
                mean_k2=observables.mean_kinetic(state),
                norm_error=abs(1.0 - norm),
                period_force=observables.period_force(before_first, before_second, params),
                k_support=state.support(),
            )
        )
        if record_half_steps:
            pre_kick_states.append((before_first, before_second))

    logger.debug(
        f"Evolved {n_periods} periods at kappa={params.kappa_pi:.4g}pi eta={params.eta:.4g} "
        f"P={params.strength_P:.4g}: <k>={records[-1].mean_k:.6g}, window [{state.k_min}, {state.k_max}]"
    )
    return Trajectory(
        records=records,
        final_state=state,
        pre_kick_states=pre_kick_states if record_half_steps else None,
    )


def _kick_matrix(potential: Potential, strength_P: float, alpha: float, size: int) -> np.ndarray:
    """
    Bessel convolution on a window of `size` sites: entry [k', k] is the
    amplitude sent from k to k' = k - m.
    """
    shift = np.arange(size)

    def convolution(z: float, step: int) -> np.ndarray:
        # coefficient of a shift d = k - k' is J_{d/step}(z) when step divides d
        def coefficients(d: np.ndarray) -> np.ndarray:
            out = np.zeros(d.shape, dtype=float)
            hit = d % step == 0
            out[hit] = jv(d[hit] // step, z)
            return out

        column = coefficients(-shift)  # [k', 0]: d = -k'
        row = coefficients(shift)      # [0, k]: d = k
        return toeplitz(column, row).astype(complex)

    identity = np.eye(size, dtype=complex)
    v1 = convolution(strength_P * alpha, 2) if potential != Potential.V2 else identity
    v2 = convolution(strength_P, 1) if potential != Potential.V1 else identity
    return v1 @ v2


def dense_period_matrix(params: RatchetParams, k_range: Tuple[int, int]) -> np.ndarray:
    """
    Explicit one-period matrix on the lattice k_range[0] .. k_range[1].

    Built from diagonal free phases and Bessel-convolution kick matrices.
    Columns far enough from the window edges must be exactly unitary; a
    breach means the window is too small for the kick bandwidth.
    """
    k_lo, k_hi = k_range
    size = k_hi - k_lo + 1
    momenta = np.arange(k_lo, k_hi + 1)
    P, alpha = params.strength_P, params.alpha

    if params.coincident:
        free = np.diag(_free_phases(momenta, 1.0, params.kappa))
        matrix = _kick_matrix(Potential.COMBINED, P, alpha, size) @ free
        reach = potential_bandwidth(Potential.COMBINED, P, alpha, params.tail_tol)
    else:
        first, second = params.slot_potentials()
        free_first = np.diag(_free_phases(momenta, params.eta, params.kappa))
        free_second = np.diag(_free_phases(momenta, 1.0 - params.eta, params.kappa))
        matrix = (
            _kick_matrix(second, P, alpha, size)
            @ free_second
            @ _kick_matrix(first, P, alpha, size)
            @ free_first
        )
        reach = potential_bandwidth(Potential.COMBINED, P, alpha, params.tail_tol)

    interior = slice(reach, size - reach)
    if size - 2 * reach < 1:
        raise UnitarityError(f"k_range {k_range} too small for a kick reach of {reach} sites")
    block = matrix[:, interior]
    residual = np.max(np.abs(block.conj().T @ block - np.eye(block.shape[1])))
    if residual > 1e-10:
        logger.error(f"Dense period matrix on {k_range} fails unitarity: residual {residual:.3e}")
        raise UnitarityError(f"k_range {k_range} too small: unitarity residual {residual:.3e}")
    return matrix


def dense_propagate(
    params: RatchetParams,
    k_range: Tuple[int, int],
    n_periods: int,
    state: Optional[MomentumState] = None,
) -> MomentumState:
    """Propagate by repeated dense-matrix products (uniform state by default)"""
    state = state if state is not None else core.uniform_initial_state(params.tail_tol)
    matrix = dense_period_matrix(params, k_range)
    vector = state.on_window(*k_range)
    for _ in range(n_periods):
        vector = matrix @ vector
    return MomentumState(k_min=k_range[0], amps=vector, tail_tol=state.tail_tol)

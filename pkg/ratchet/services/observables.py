import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from ..models import MomentumState, Potential, RatchetParams

logger = logging.getLogger(__name__)


def mean_momentum(state: MomentumState) -> float:
    """Ratchet current <k>"""
    return float(np.dot(state.momenta, state.probabilities))


def mean_kinetic(state: MomentumState) -> float:
    """Effective energy <k^2>"""
    k = state.momenta.astype(float)
    return float(np.dot(k * k, state.probabilities))


def momentum_distribution(state: MomentumState) -> List[Tuple[int, float]]:
    """(k, probability) pairs above tail_tol, sorted by k"""
    p = state.probabilities
    keep = np.flatnonzero(p > state.tail_tol)
    return [(state.k_min + int(i), float(p[i])) for i in keep]


def _harmonic(state: MomentumState, m: int) -> complex:
    """<exp(i m x)> = sum_k conj(c_{k+m}) c_k"""
    amps = state.amps
    if m >= amps.size:
        return 0j
    return complex(np.vdot(amps[m:], amps[:amps.size - m]))


def potential_gradient_expectation(
    state: MomentumState, potential: Potential, strength_P: float, alpha: float
) -> float:
    """
    <d(P v)/dx>, contracted exactly from the state's coherences.

    d(sin x)/dx = cos x and d(alpha sin 2x)/dx = 2 alpha cos 2x, and
    <cos m x> = Re sum_k conj(c_{k+m}) c_k.
    """
    gradient = 0.0
    if potential in (Potential.V2, Potential.COMBINED):
        gradient += _harmonic(state, 1).real
    if potential in (Potential.V1, Potential.COMBINED):
        gradient += 2.0 * alpha * _harmonic(state, 2).real
    return strength_P * gradient


def period_force(
    pre_kick1_state: MomentumState, pre_kick2_state: MomentumState, params: RatchetParams
) -> float:
    """
    Force over one period: the potential gradients at the two kick instants.

    Normalized so that the change of <k> across the period is exactly
    minus this value.
    """
    first, second = params.slot_potentials()
    return potential_gradient_expectation(
        pre_kick1_state, first, params.strength_P, params.alpha
    ) + potential_gradient_expectation(
        pre_kick2_state, second, params.strength_P, params.alpha
    )


def slope_fit(
    series: Sequence[Tuple[float, float]], window: Tuple[float, float]
) -> Tuple[float, float, float]:
    """Least-squares line over t0 <= t <= t1; returns (slope, intercept, r_squared)"""
    t0, t1 = window
    points = np.array([(t, value) for t, value in series if t0 <= t <= t1], dtype=float)
    if points.shape[0] < 10:
        raise ValueError(f"slope fit window {window} holds {points.shape[0]} points, need at least 10")
    t, value = points[:, 0], points[:, 1]
    if np.ptp(t) == 0:
        raise ValueError(f"slope fit window {window} is degenerate")
    fit = stats.linregress(t, value)
    if np.ptp(value) == 0:
        # linregress reports r = 0 for a flat series; the fit itself is exact
        return float(fit.slope), float(fit.intercept), 1.0
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)

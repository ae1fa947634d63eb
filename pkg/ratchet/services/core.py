import logging
from typing import Optional, Tuple

import numpy as np

from ..exceptions import GridUnderflowError, WindowOverflowError
from ..models import (
    DEFAULT_K_CAP,
    DEFAULT_TAIL_TOL,
    WINDOW_GROWTH,
    MomentumState,
    PhysicalUnits,
)

logger = logging.getLogger(__name__)


def uniform_initial_state(tail_tol: float = DEFAULT_TAIL_TOL) -> MomentumState:
    """
    The spatially uniform state psi(x, 0) = 1/sqrt(2*pi).

    In the plane-wave basis this is a single occupied site k = 0 with
    amplitude 1.
    """
    return MomentumState(k_min=0, amps=[1.0], tail_tol=tail_tol)


def fft_grid_size(sites: int) -> int:
    """Smallest power of two holding `sites` momentum sites"""
    return 1 << max(int(sites) - 1, 1).bit_length()


def position_samples(state: MomentumState, N: int) -> np.ndarray:
    """
    Samples s_j = psi(x_j) * sqrt(2*pi/N) on x_j = 2*pi*j/N.

    The transform is unitary, so sum |s_j|^2 equals the state norm.
    Momentum k lands on grid index k mod N.
    """
    if N < state.size:
        raise GridUnderflowError(
            f"grid underflow: {N} points cannot hold {state.size} momentum sites"
        )
    grid = np.zeros(N, dtype=complex)
    grid[np.mod(state.momenta, N)] = state.amps
    return np.fft.ifft(grid, norm="ortho")


def from_position_samples(
    samples,
    k_min: int,
    N: int,
    size: Optional[int] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> MomentumState:
    """
    Inverse of position_samples onto the window k_min .. k_min + size - 1.

    Probability left outside the window (or, for a window covering the
    whole grid, sitting in its edge bands where aliasing would wrap it)
    must stay below tail_tol.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (N,):
        raise GridUnderflowError(f"grid underflow: expected {N} samples, got {samples.shape}")
    size = N if size is None else size
    if size > N:
        raise GridUnderflowError(f"grid underflow: window of {size} sites on {N} points")

    grid = np.fft.fft(samples, norm="ortho")
    index = np.mod(np.arange(k_min, k_min + size), N)
    outside = np.ones(N, dtype=bool)
    outside[index] = False
    leaked = float(np.sum(np.abs(grid[outside]) ** 2))

    state = MomentumState(k_min=k_min, amps=grid[index], tail_tol=tail_tol)
    if leaked > tail_tol or (size == N and state.edge_band_probability() > tail_tol):
        raise WindowOverflowError(
            f"momentum window overflow: window [{k_min}, {k_min + size - 1}] on {N} points "
            f"leaks probability {max(leaked, state.edge_band_probability()):.3e}"
        )
    return state


def ensure_headroom(state: MomentumState, k_cap: int = DEFAULT_K_CAP) -> MomentumState:
    """
    Grow the window symmetrically by WINDOW_GROWTH sites per edge until the
    edge bands hold less than tail_tol.
    """
    grown = 0
    while state.edge_band_probability() >= state.tail_tol:
        state = state.padded(WINDOW_GROWTH)
        grown += WINDOW_GROWTH
        check_cap(state, k_cap)
    if grown:
        logger.debug(f"Momentum window grown by {grown} sites per edge to [{state.k_min}, {state.k_max}]")
    return state


def check_cap(state: MomentumState, k_cap: int) -> None:
    if max(abs(state.k_min), abs(state.k_max)) > k_cap:
        logger.error(f"Momentum window [{state.k_min}, {state.k_max}] exceeds k_cap={k_cap}")
        raise WindowOverflowError(
            f"momentum window overflow: [{state.k_min}, {state.k_max}] exceeds k_cap={k_cap}"
        )


def compact(state: MomentumState, margin: int = WINDOW_GROWTH) -> MomentumState:
    """
    Shrink the window to the sites carrying probability, keeping `margin`
    sites of tail beyond them on each edge.

    Only tail sites whose cumulative probability from the edge is below
    tail_tol/4, and that lie more than `margin` sites beyond that point,
    are dropped.
    """
    p = state.probabilities
    threshold = state.tail_tol / 4
    left = int(np.count_nonzero(np.cumsum(p) < threshold))
    right = int(np.count_nonzero(np.cumsum(p[::-1]) < threshold))
    left = max(left - margin, 0)
    right = max(right - margin, 0)
    if left == 0 and right == 0:
        return state
    if left + right >= state.size:
        return state
    return state.with_amps(state.amps[left:state.size - right], k_min=state.k_min + left)


def derive_params(units: PhysicalUnits) -> Tuple[float, float]:
    """
    Dimensionless (kappa, strength_P) from laboratory units.

    kappa = 8 * omega_R * T, K = kappa * T * V0 / hbar and P = K / kappa.
    """
    kappa = 8.0 * units.omega_R * units.T
    kick_strength = kappa * units.T * units.V0 / units.hbar
    strength_P = kick_strength / kappa
    logger.debug(f"Derived kappa={kappa:.6g}, K={kick_strength:.6g}, P={strength_P:.6g}")
    return kappa, strength_P


def asynchronization_degree(eta: float) -> float:
    """min(eta/(1-eta), (1-eta)/eta): 0 for coincident kicks, 1 at eta = 1/2"""
    if not 0 <= eta < 1:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    if eta == 0:
        return 0.0
    return min(eta / (1 - eta), (1 - eta) / eta)

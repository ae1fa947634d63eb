"""
Floquet analysis at the quantum resonance kappa = pi.

At kappa = pi the free segments of length 1/2 (eta = 1/2) or 1 (eta = 0)
only see k mod d, so the one-period operator couples the position
sublattice x0 + l*2*pi/d, l = 0..d-1, and nothing else. Fiber vectors are
the values psi(x0 + l*2*pi/d); in this basis the free segment is the
circulant W diag(Lambda) W^dagger with W the plain d-point DFT, kicks are
diagonal, and eigenvalues are written exp(-i omega).

At eta = 1/2 (v1 kicked first) the 4x4 fiber operator splits into the
blocks {0, 2} and {1, 3}. Each 2x2 block has determinant -i and trace
2 p cos(phi) exp(-i pi/4), which gives omega = pi/4 -+ arccos(p cos phi):
the closed-form bands and eigenvectors below.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import schur
from scipy.optimize import brentq, linear_sum_assignment

from ..exceptions import NoClosedFiberError, UnitarityError
from ..models import (
    BandSpectrum,
    FiberUnitary,
    KickOrder,
    MomentumState,
    Potential,
    RatchetParams,
)
from . import core
from .propagator import (
    inverse_free_evolve,
    kick,
    potential_bandwidth,
    potential_values,
)

logger = logging.getLogger(__name__)

QUARTER_PI = math.pi / 4
# Radicands below this are reported as errors instead of being clipped.
RADICAND_TOLERANCE = 1e-12
# Eigenphases this close below 2*pi are reported as 0.
PHASE_WRAP_TOLERANCE = 1e-12


def fiber_dimension(params: RatchetParams) -> int:
    """Size of the closed fiber: 4 at eta = 1/2, 2 at eta = 0 (kappa = pi only)"""
    if math.isclose(params.kappa, math.pi, rel_tol=1e-12):
        if params.eta == 0.5:
            return 4
        if params.eta == 0:
            return 2
    raise NoClosedFiberError(
        f"no closed fiber at kappa={params.kappa_pi:.6g}pi, eta={params.eta:.6g}"
    )


def is_analytic_point(params: RatchetParams) -> bool:
    """The closed-form bands hold at kappa = pi, eta = 1/2 with v1 kicked first"""
    return (
        math.isclose(params.kappa, math.pi, rel_tol=1e-12)
        and params.eta == 0.5
        and params.kick_order == KickOrder.V1_FIRST
    )


def _free_circulant(d: int, tau: float, kappa: float) -> np.ndarray:
    r = np.arange(d)
    W = np.exp(2j * np.pi * np.outer(r, r) / d) / math.sqrt(d)
    lam = np.exp(-0.5j * tau * kappa * r.astype(float) ** 2)
    return W @ np.diag(lam) @ W.conj().T


def _fiber_matrices(x0: np.ndarray, params: RatchetParams) -> np.ndarray:
    """One-period fiber operators for every x0, shape (len(x0), d, d)"""
    d = fiber_dimension(params)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x = x0[:, None] + (2 * np.pi / d) * np.arange(d)[None, :]
    P, alpha = params.strength_P, params.alpha

    if params.coincident:
        kicked = np.exp(-1j * P * potential_values(Potential.COMBINED, x, alpha))
        return kicked[:, :, None] * _free_circulant(d, 1.0, params.kappa)[None, :, :]

    first, second = params.slot_potentials()
    kick_first = np.exp(-1j * P * potential_values(first, x, alpha))
    kick_second = np.exp(-1j * P * potential_values(second, x, alpha))
    free_first = _free_circulant(d, params.eta, params.kappa)
    free_second = _free_circulant(d, 1.0 - params.eta, params.kappa)
    half = free_second @ (kick_first[:, :, None] * free_first[None, :, :])
    return kick_second[:, :, None] * half


def fiber_unitary(x0: float, params: RatchetParams) -> FiberUnitary:
    """One-period operator on the fiber over quasi-position x0"""
    matrix = _fiber_matrices(np.array([x0]), params)[0]
    residual = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
    if residual > 1e-12:
        logger.error(f"Fiber at x0={x0:.6g} fails unitarity: residual {residual:.3e}")
        raise UnitarityError(f"fiber at x0={x0} is not unitary (residual {residual:.3e})")
    return FiberUnitary(x0=float(x0), matrix=matrix)


def unitary_eigensystem(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenphases omega in [0, 2*pi) with eigenvalues exp(-i omega), and
    orthonormal eigenvectors as columns.

    The complex Schur form of a normal matrix is diagonal, so its unitary
    factor is an orthonormal eigenbasis even for degenerate eigenvalues.
    """
    T, Z = schur(matrix, output="complex")
    phases = np.mod(-np.angle(np.diag(T)), 2 * np.pi)
    # eigenvalues just above the real axis land on 2*pi after the mod
    phases[2 * np.pi - phases < PHASE_WRAP_TOLERANCE] = 0.0
    return phases, Z


def fiber_eigenphases(x0: float, params: RatchetParams) -> np.ndarray:
    return np.sort(unitary_eigensystem(fiber_unitary(x0, params).matrix)[0])


def _arc(phi: np.ndarray, p: np.ndarray, radicand: np.ndarray) -> np.ndarray:
    """arctan of sqrt(radicand) / (cos(phi) p) on the branch continuous in x0, in [0, pi]"""
    if np.any(radicand < -RADICAND_TOLERANCE):
        worst = float(np.min(radicand))
        logger.error(f"Negative radicand {worst:.3e} in quasienergy formula")
        raise UnitarityError(f"negative radicand {worst:.3e} in quasienergy formula")
    if np.any(radicand < 0):
        logger.warning(f"Clipping radicand {float(np.min(radicand)):.3e} to zero")
    return np.arctan2(np.sqrt(np.clip(radicand, 0.0, None)), np.cos(phi) * p)


def _band_ingredients(x0, strength_P: float, alpha: float):
    x0 = np.asarray(x0, dtype=float)
    v1 = strength_P * alpha * np.sin(2 * x0)
    phi = strength_P * np.sin(x0)
    phi_bar = strength_P * np.sin(x0 + np.pi / 2)
    p1 = np.cos(v1 + QUARTER_PI)
    p2 = np.cos(v1 - QUARTER_PI)
    q1 = np.sin(2 * v1) - 1
    q2 = np.sin(2 * v1) + 1
    # q1 = -2 p1^2 and q2 = +2 p2^2, so both radicands equal 1 - p^2 cos^2(phi)
    S = _arc(phi, p1, 1 + 0.5 * np.cos(phi) ** 2 * q1)
    S_bar = _arc(phi_bar, p2, 1 - 0.5 * np.cos(phi_bar) ** 2 * q2)
    return phi, phi_bar, p1, p2, S, S_bar


def analytic_quasienergies(x0, strength_P: float, alpha: float) -> np.ndarray:
    """
    Closed-form bands (omega1, omega2, omega3, omega4) at kappa = pi, eta = 1/2.

    omega1,3 = pi/4 -+ S(x0) and omega2,4 = pi/4 -+ S_bar(x0). Vectorized
    over x0; the last axis indexes the band.
    """
    _, _, _, _, S, S_bar = _band_ingredients(x0, strength_P, alpha)
    return np.stack(
        [QUARTER_PI - S, QUARTER_PI - S_bar, QUARTER_PI + S, QUARTER_PI + S_bar], axis=-1
    )


def _block_vectors(phi, angle, p_self, p_other, upper: int, lower: int, sign: float) -> np.ndarray:
    psi = phi + sign * angle
    norm_sq = 2.0 - 2.0 * p_self * np.cos(psi)
    vectors = np.zeros(np.shape(psi) + (4,), dtype=complex)

    degenerate = norm_sq < 1e-24
    safe = np.where(degenerate, 1.0, norm_sq)
    denominator = np.sqrt(safe)
    vectors[..., upper] = p_other * np.exp(-1j * psi) / denominator
    vectors[..., lower] = -1j * (1.0 - p_self * np.exp(-1j * psi)) / denominator

    if np.any(degenerate):
        # p_other = 0: the block is diagonal and its eigenvectors are basis vectors
        logger.warning("Degenerate eigenvector normalization, using the diagonal-block limit")
        flat = vectors.reshape(-1, 4)
        phis = np.broadcast_to(phi, np.shape(psi)).reshape(-1)
        angles = np.broadcast_to(angle, np.shape(psi)).reshape(-1)
        selves = np.broadcast_to(p_self, np.shape(psi)).reshape(-1)
        for i in np.flatnonzero(degenerate.reshape(-1)):
            target = np.exp(1j * sign * angles[i])
            to_upper = abs(selves[i] * np.exp(-1j * phis[i]) - target)
            to_lower = abs(selves[i] * np.exp(1j * phis[i]) - target)
            use_upper = to_upper < to_lower or (to_upper == to_lower and sign > 0)
            flat[i] = 0
            flat[i, upper if use_upper else lower] = 1.0
        vectors = flat.reshape(vectors.shape)
    return vectors


def analytic_eigenvectors(x0, strength_P: float, alpha: float) -> np.ndarray:
    """
    Closed-form Floquet eigenvectors (alpha1 .. alpha4) in sublattice components l = 0..3.

    alpha1,3 live on l = 0, 2 and alpha2,4 on l = 1, 3. Returns shape
    (..., 4, 4) with axis -2 the band and axis -1 the component.
    """
    phi, phi_bar, p1, p2, S, S_bar = _band_ingredients(x0, strength_P, alpha)
    return np.stack(
        [
            _block_vectors(phi, S, p1, p2, 0, 2, +1.0),
            _block_vectors(phi_bar, S_bar, p2, p1, 1, 3, +1.0),
            _block_vectors(phi, S, p1, p2, 0, 2, -1.0),
            _block_vectors(phi_bar, S_bar, p2, p1, 1, 3, -1.0),
        ],
        axis=-2,
    )


def _circular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(np.angle(np.exp(1j * (a - b))))


def x0_grid(params: RatchetParams, x0_count: int) -> np.ndarray:
    """Uniform grid over one fiber cell [0, 2*pi/d)"""
    d = fiber_dimension(params)
    return np.arange(x0_count) * (2 * np.pi / d) / x0_count


def band_scan(params: RatchetParams, x0_count: int) -> BandSpectrum:
    """
    Eigenphases of the fiber operator on a uniform x0 grid, sorted into bands.

    Bands are followed by eigenvector overlap between neighbouring x0, so
    crossings between decoupled blocks stay crossings. At the analytic point
    the first column set is matched to omega1..omega4; otherwise the first
    point is sorted.
    """
    if x0_count < 2:
        raise ValueError(f"x0_count must be at least 2, got {x0_count}")
    grid = x0_grid(params, x0_count)
    matrices = _fiber_matrices(grid, params)
    d = matrices.shape[1]

    phases, vectors = unitary_eigensystem(matrices[0])
    if is_analytic_point(params):
        reference = np.mod(analytic_quasienergies(grid[0], params.strength_P, params.alpha), 2 * np.pi)
        _, order = linear_sum_assignment(_circular_distance(reference[:, None], phases[None, :]))
    else:
        order = np.argsort(phases)

    bands = np.empty((x0_count, d))
    bands[0] = phases[order]
    previous = vectors[:, order]
    for i in range(1, x0_count):
        phases, vectors = unitary_eigensystem(matrices[i])
        overlap = np.abs(previous.conj().T @ vectors) ** 2
        _, order = linear_sum_assignment(-overlap)
        bands[i] = phases[order]
        previous = vectors[:, order]

    logger.debug(f"Band scan with {d} bands on {x0_count} points at P={params.strength_P:.4g}")
    return BandSpectrum(x0_grid=grid, bands=bands, labels=list(range(1, d + 1)))


def crossing_positions(strength_P: float, alpha: float, x0_count: int = 256) -> List[float]:
    """
    Quasi-positions in [0, pi/2] where omega1 meets omega2 (and omega3 meets omega4).

    These are the zeros of S - S_bar, bracketed on a grid and refined with
    a root finder. Flat bands (P = 0) have no isolated crossings.
    """
    if strength_P == 0:
        return []

    def gap(x: float) -> float:
        _, _, _, _, S, S_bar = _band_ingredients(x, strength_P, alpha)
        return float(S - S_bar)

    grid = np.linspace(0.0, np.pi / 2, x0_count + 1)
    values = [gap(x) for x in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(brentq(gap, a, b, xtol=1e-15)))
    if values[-1] == 0:
        roots.append(float(grid[-1]))
    return roots


def reconstruct_integer_time(
    t: int, params: RatchetParams, k_window: Optional[Tuple[int, int]] = None
) -> MomentumState:
    """
    psi(t) of the uniform initial state, assembled fiber by fiber from the
    Floquet eigendecomposition and returned on k_window.

    Uses the closed-form bands and eigenvectors at the analytic point and
    the numeric fiber eigensystem elsewhere.
    """
    d = fiber_dimension(params)
    if k_window is None:
        reach = potential_bandwidth(Potential.COMBINED, params.strength_P, params.alpha, params.tail_tol)
        half = (t + 1) * reach + 64
        k_window = (-half, half)
    k_lo, k_hi = k_window
    size = k_hi - k_lo + 1
    N = core.fft_grid_size(2 * size)
    M = N // d
    x0 = 2 * np.pi * np.arange(M) / N
    initial = np.full((M, d), 1.0 / math.sqrt(N), dtype=complex)

    if is_analytic_point(params):
        omegas = analytic_quasienergies(x0, params.strength_P, params.alpha)
        vectors = analytic_eigenvectors(x0, params.strength_P, params.alpha)
        weights = np.einsum("mul,ml->mu", vectors.conj(), initial)
        fibers = np.einsum("mu,mul->ml", weights * np.exp(-1j * omegas * t), vectors)
    else:
        matrices = _fiber_matrices(x0, params)
        fibers = np.empty_like(initial)
        for m in range(M):
            phases, basis = unitary_eigensystem(matrices[m])
            fibers[m] = basis @ (np.exp(-1j * phases * t) * (basis.conj().T @ initial[m]))

    # fiber (m, l) sits on grid point m + l*M
    samples = fibers.T.reshape(-1)
    return core.from_position_samples(samples, k_lo, N, size, params.tail_tol)


def half_period_state(state_at_t: MomentumState, params: RatchetParams) -> MomentumState:
    """
    Undo the second kick and the second free segment of the last period.

    For eta = 1/2 this is psi(t - 1/2), the state the first kick left behind.
    """
    if params.coincident:
        last = Potential.COMBINED
    else:
        last = params.slot_potentials()[1]
    undone = kick(state_at_t, last, -params.strength_P, params.alpha, params.k_cap)
    return inverse_free_evolve(undone, 1.0 - params.eta, params.kappa)

import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..config import settings
from ..exceptions import MetricUndefinedError, NoSignChangeError
from ..models import KickOrder, RatchetParams, SweepResult, TrajectoryRecord
from . import core, observables, propagator

logger = logging.getLogger(__name__)

DEFAULT_ETAS = (1 / 7, 2 / 7, 3 / 8, 1 / 2, 5 / 9, 2 / 3, 7 / 10, 4 / 5)
EARLY_WINDOW = (10, 40)
STRENGTH_SWEEP_CONFIGURATIONS = ((0.5, 0.0), (0.5, 0.5), (1.0, 0.0), (1.0, 0.5))
DEFAULT_STRENGTHS = tuple(0.25 * n for n in range(13))


def default_kappa_pi_grid() -> List[float]:
    """kappa/pi = 0.05, 0.10, ..., 4.00"""
    return [round(0.05 * n, 2) for n in range(1, 81)]


def default_kappa_grid() -> List[float]:
    return [kappa_pi * math.pi for kappa_pi in default_kappa_pi_grid()]


def _map_points(function: Callable, items: Sequence, workers: Optional[int] = None) -> List:
    """Evaluate independent sweep points, in parallel when more than one worker is configured"""
    workers = workers if workers is not None else (settings.threads or 1)
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    return Parallel(n_jobs=workers)(delayed(function)(item) for item in items)


def time_series_experiment(params: RatchetParams, n_periods: int = 200) -> List[TrajectoryRecord]:
    """Per-period observables of the uniform initial state"""
    state = core.uniform_initial_state(params.tail_tol)
    return propagator.evolve(state, params, n_periods).records


def early_time_current(records: Iterable[TrajectoryRecord], window: Tuple[int, int] = EARLY_WINDOW) -> float:
    """Mean <k> over the periods t0..t1"""
    values = [record.mean_k for record in records if window[0] <= record.t <= window[1]]
    if not values:
        raise ValueError(f"no records inside the early-time window {window}")
    return float(np.mean(values))


def _final_mean_k(point: Tuple[RatchetParams, int]) -> float:
    params, n_periods = point
    return time_series_experiment(params, n_periods)[-1].mean_k


def _mean_k_series(point: Tuple[RatchetParams, int]) -> Tuple[List[float], Optional[float]]:
    params, n_periods = point
    records = time_series_experiment(params, n_periods)
    early = early_time_current(records) if n_periods >= EARLY_WINDOW[0] else None
    return [record.mean_k for record in records], early


def eta_sweep(
    params: RatchetParams,
    eta_list: Sequence[float] = DEFAULT_ETAS,
    n_periods: int = 200,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Current against the time delay eta at fixed kappa and P.

    Keeps the full <k> series for every eta, with the early-time mean
    (periods 10-40) and the final value as summary.
    """
    logger.info(f"eta sweep over {len(eta_list)} values, {n_periods} periods")
    points = [(params.model_copy(update={"eta": eta}), n_periods) for eta in eta_list]
    results = _map_points(_mean_k_series, points, workers)
    series = [s for s, _ in results]
    early = [e for _, e in results]
    return SweepResult(
        parameter="eta",
        values=list(eta_list),
        mean_k_final=[s[-1] for s in series],
        early_mean_k=early if all(e is not None for e in early) else None,
        series=series,
        periods=n_periods,
        params=params,
    )


def strength_sweep(
    params: RatchetParams,
    P_list: Sequence[float],
    n_periods: int = 200,
    workers: Optional[int] = None,
) -> SweepResult:
    """Final <k> against the potential strength P at fixed kappa and eta"""
    logger.info(
        f"Strength sweep over {len(P_list)} values at kappa={params.kappa_pi:.4g}pi, eta={params.eta:.4g}"
    )
    points = [(params.model_copy(update={"strength_P": P}), n_periods) for P in P_list]
    return SweepResult(
        parameter="strength_P",
        values=list(P_list),
        mean_k_final=_map_points(_final_mean_k, points, workers),
        periods=n_periods,
        params=params,
    )


def strength_sweep_configurations(
    params: RatchetParams,
    P_list: Sequence[float],
    n_periods: int = 200,
    workers: Optional[int] = None,
) -> Dict[Tuple[float, float], SweepResult]:
    """Strength sweeps for kappa in {0.5pi, pi} and eta in {0, 0.5}, keyed by (kappa/pi, eta)"""
    results = {}
    for kappa_pi, eta in STRENGTH_SWEEP_CONFIGURATIONS:
        configured = params.model_copy(update={"kappa": kappa_pi * math.pi, "eta": eta})
        results[(kappa_pi, eta)] = strength_sweep(configured, P_list, n_periods, workers)
    return results


def kappa_sweep(
    params: RatchetParams,
    kappa_list: Optional[Sequence[float]] = None,
    n_periods: int = 200,
    workers: Optional[int] = None,
) -> SweepResult:
    """Final <k> against kappa at eta = 1/2 (the kick order of params is kept)"""
    kappa_list = list(kappa_list) if kappa_list is not None else default_kappa_grid()
    logger.info(
        f"kappa sweep over {len(kappa_list)} values at P={params.strength_P:.4g}, "
        f"order {params.kick_order.value}"
    )
    fixed = params.model_copy(update={"eta": 0.5})
    points = [(fixed.model_copy(update={"kappa": kappa}), n_periods) for kappa in kappa_list]
    return SweepResult(
        parameter="kappa",
        values=kappa_list,
        mean_k_final=_map_points(_final_mean_k, points, workers),
        periods=n_periods,
        params=fixed,
    )


def _final_currents_both_orders(params: RatchetParams, n_periods: int) -> Tuple[float, float]:
    first = _final_mean_k((params.model_copy(update={"kick_order": KickOrder.V1_FIRST}), n_periods))
    second = _final_mean_k((params.model_copy(update={"kick_order": KickOrder.V2_FIRST}), n_periods))
    return first, second


def order_reversal_difference(params: RatchetParams, n_periods: int = 200) -> float:
    """
    |2 (k1 - k2) / (k1 + k2)| with k1, k2 the final currents for v1 kicked
    first and v2 kicked first.
    """
    k1, k2 = _final_currents_both_orders(params, n_periods)
    if abs(k1 + k2) < 1e-9:
        logger.error(f"Reversal metric undefined: k1={k1:.3e}, k2={k2:.3e}")
        raise MetricUndefinedError(f"metric undefined: k1 + k2 = {k1 + k2:.3e}")
    metric = abs(2.0 * (k1 - k2) / (k1 + k2))
    logger.info(f"Kick-order difference at P={params.strength_P:.4g}: {metric:.6g} (k1={k1:.6g}, k2={k2:.6g})")
    return metric


def find_reversal_strength(
    params: RatchetParams,
    P_interval: Tuple[float, float] = (2.0, 3.0),
    n_periods: int = 200,
    width: float = 0.01,
) -> float:
    """Bisect the sign of the final current in P down to an interval of `width`"""
    lo, hi = P_interval

    def current(P: float) -> float:
        return _final_mean_k((params.model_copy(update={"strength_P": P}), n_periods))

    f_lo, f_hi = current(lo), current(hi)
    if f_lo * f_hi > 0 or (f_lo == 0 and f_hi == 0):
        logger.error(f"No current reversal on P in [{lo}, {hi}]: {f_lo:.3e}, {f_hi:.3e}")
        raise NoSignChangeError(f"no sign change of <k> on P in [{lo}, {hi}]")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        f_mid = current(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    reversal = 0.5 * (lo + hi)
    logger.info(f"Current reversal at P={reversal:.4f} ({params.kick_order.value})")
    return reversal


def accelerated_current_fit(
    records: Sequence[TrajectoryRecord], window: Tuple[int, int] = (50, 200)
) -> Tuple[float, float, float]:
    """Linear fit of <k>(t) over the window: (slope, intercept, r_squared)"""
    return observables.slope_fit([(r.t, r.mean_k) for r in records], window)

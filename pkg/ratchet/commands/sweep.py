import logging
import math

from ..output import SWEEP_COLUMNS, OutputHeader, sweep_rows, write_table
from ..schemas import Experiment, RunConfig
from ..services import experiments

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("sweep", help="Final current against one parameter")
    kinds = parser.add_subparsers(dest="sweep_kind", required=True)
    for kind, experiment, description in (
        ("eta", Experiment.SWEEP_ETA, "time delay eta"),
        ("strength", Experiment.SWEEP_STRENGTH, "potential strength P"),
        ("kappa", Experiment.SWEEP_KAPPA, "kappa in units of pi, at eta = 0.5"),
    ):
        sub = kinds.add_parser(kind, parents=parents, help=f"Sweep the {description}")
        sub.add_argument("--values", type=float, nargs="+", default=None, help=description)
        sub.set_defaults(experiment=experiment.value)


def _write(config: RunConfig, header: OutputHeader, rows) -> None:
    write_table(header, SWEEP_COLUMNS, rows, config.output.format, config.output.path)


def run_eta_sweep(config: RunConfig, header: OutputHeader) -> None:
    values = config.sweep.values or list(experiments.DEFAULT_ETAS)
    result = experiments.eta_sweep(config.params.to_params(), values, config.periods)
    _write(config, header, sweep_rows(result))


def run_strength_sweep(config: RunConfig, header: OutputHeader) -> None:
    values = config.sweep.values or list(experiments.DEFAULT_STRENGTHS)
    result = experiments.strength_sweep(config.params.to_params(), values, config.periods)
    _write(config, header, sweep_rows(result))


def run_kappa_sweep(config: RunConfig, header: OutputHeader) -> None:
    kappa_pi_values = config.sweep.values or experiments.default_kappa_pi_grid()
    result = experiments.kappa_sweep(
        config.params.to_params(),
        [kappa_pi * math.pi for kappa_pi in kappa_pi_values],
        config.periods,
    )
    # the param column stays in units of pi, as configured
    _write(config, header, list(zip(kappa_pi_values, result.mean_k_final)))


handlers = {
    Experiment.SWEEP_ETA: run_eta_sweep,
    Experiment.SWEEP_STRENGTH: run_strength_sweep,
    Experiment.SWEEP_KAPPA: run_kappa_sweep,
}

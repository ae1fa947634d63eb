import logging

from ..output import (
    DISTRIBUTION_COLUMNS,
    TRAJECTORY_COLUMNS,
    OutputHeader,
    distribution_rows,
    trajectory_rows,
    write_table,
)
from ..schemas import Experiment, RunConfig
from ..services import core, propagator

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "evolve",
        parents=parents,
        help="Evolve the uniform state and record per-period observables",
    )
    parser.add_argument(
        "--distribution", default=None, help="also write the final momentum distribution here"
    )
    parser.set_defaults(experiment=Experiment.EVOLVE.value)


def run_evolve(config: RunConfig, header: OutputHeader) -> None:
    params = config.params.to_params()
    logger.info(
        f"Evolving {config.periods} periods at kappa={params.kappa_pi:.4g}pi, "
        f"eta={params.eta:.4g}, P={params.strength_P:.4g}"
    )
    trajectory = propagator.evolve(core.uniform_initial_state(params.tail_tol), params, config.periods)
    write_table(
        header,
        TRAJECTORY_COLUMNS,
        trajectory_rows(trajectory.records),
        config.output.format,
        config.output.path,
    )
    if config.output.distribution:
        write_table(
            header,
            DISTRIBUTION_COLUMNS,
            distribution_rows(trajectory.final_state),
            config.output.format,
            config.output.distribution,
        )


handlers = {Experiment.EVOLVE: run_evolve}

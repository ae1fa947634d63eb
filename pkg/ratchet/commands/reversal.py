import logging

from ..output import OutputHeader, write_table
from ..schemas import Experiment, RunConfig
from ..services import experiments

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    subparsers.add_parser(
        "reversal",
        parents=parents,
        help="Relative current difference between the two kick orders",
    ).set_defaults(experiment=Experiment.REVERSAL.value)

    finder = subparsers.add_parser(
        "find-reversal",
        parents=parents,
        help="Bisect the potential strength at which the current changes sign",
    )
    finder.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    finder.add_argument("--width", type=float, default=None)
    finder.set_defaults(experiment=Experiment.FIND_REVERSAL.value)


def run_order_reversal(config: RunConfig, header: OutputHeader) -> None:
    params = config.params.to_params()
    difference = experiments.order_reversal_difference(params, config.periods)
    write_table(
        header,
        ("strength_P", "difference"),
        [(params.strength_P, difference)],
        config.output.format,
        config.output.path,
    )


def run_find_reversal(config: RunConfig, header: OutputHeader) -> None:
    params = config.params.to_params()
    strength = experiments.find_reversal_strength(
        params, config.reversal.interval, config.periods, config.reversal.width
    )
    write_table(
        header,
        ("reversal_strength",),
        [(strength,)],
        config.output.format,
        config.output.path,
    )


handlers = {
    Experiment.REVERSAL: run_order_reversal,
    Experiment.FIND_REVERSAL: run_find_reversal,
}

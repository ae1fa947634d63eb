import logging

from ..output import OutputHeader, band_columns, band_rows, write_table
from ..schemas import Experiment, RunConfig
from ..services import floquet

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("floquet", help="Quasienergy spectra at kappa = pi")
    kinds = parser.add_subparsers(dest="floquet_kind", required=True)
    bands = kinds.add_parser("bands", parents=parents, help="Quasienergy bands over the quasi-position x0")
    bands.add_argument("--x0-points", dest="x0_points", type=int, default=None)
    bands.set_defaults(experiment=Experiment.FLOQUET_BANDS.value)


def run_band_scan(config: RunConfig, header: OutputHeader) -> None:
    params = config.params.to_params()
    spectrum = floquet.band_scan(params, config.floquet.x0_points)
    logger.info(f"Scanned {len(spectrum.labels)} bands on {config.floquet.x0_points} x0 points")
    write_table(header, band_columns(spectrum), band_rows(spectrum), config.output.format, config.output.path)


handlers = {Experiment.FLOQUET_BANDS: run_band_scan}

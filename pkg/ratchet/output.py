import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .exceptions import ConfigError
from .models import BandSpectrum, MomentumState, SweepResult, TrajectoryRecord
from .schemas import RunConfig
from .services import observables

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("period", "mean_k", "mean_k2", "norm_error", "period_force", "kmin", "kmax")
SWEEP_COLUMNS = ("param", "mean_k_final")
DISTRIBUTION_COLUMNS = ("k", "probability")


class OutputHeader(BaseModel):
    """Provenance written at the top of every output file"""
    version: str = __version__
    config: dict
    overrides: List[str] = Field(default_factory=list)

    @classmethod
    def for_config(cls, config: RunConfig, overrides: Sequence[str] = ()) -> "OutputHeader":
        return cls(config=config.model_dump(mode="json"), overrides=sorted(overrides))

    def comment_lines(self) -> List[str]:
        return [
            f"# ratchet {self.version}",
            f"# config: {json.dumps(self.config, sort_keys=True)}",
            f"# overrides: {','.join(self.overrides) if self.overrides else 'none'}",
        ]


def format_number(value) -> str:
    """Integers verbatim, reals with 17 significant digits"""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def _render_csv(header: OutputHeader, columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    for line in header.comment_lines():
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(value) for value in row])
    return buffer.getvalue()


def _render_json(header: OutputHeader, columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    document = {
        "ratchet": header.version,
        "config": header.config,
        "overrides": header.overrides,
        "columns": list(columns),
        "rows": [[_json_number(value) for value in row] for row in rows],
    }
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def _json_number(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    return float(value)


def write_table(
    header: OutputHeader,
    columns: Sequence[str],
    rows: Sequence[Sequence],
    fmt: str = "csv",
    path: Optional[str] = None,
) -> None:
    """
    Write a table as CSV (comment header, column row, data rows) or JSON.

    Without a path the table goes to stdout.
    """
    text = _render_csv(header, columns, rows) if fmt == "csv" else _render_json(header, columns, rows)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        target = Path(path)
        target.write_text(text)
    except OSError as e:
        logger.error(f"Cannot write output file {path}: {e}")
        raise ConfigError(f"output path {path} is not writable: {e}")
    logger.info(f"Wrote {len(rows)} rows to {path}")


def trajectory_rows(records: Sequence[TrajectoryRecord]) -> List[tuple]:
    return [
        (r.t, r.mean_k, r.mean_k2, r.norm_error, r.period_force, r.k_support[0], r.k_support[1])
        for r in records
    ]


def band_columns(spectrum: BandSpectrum) -> List[str]:
    return ["x0"] + [f"omega{label}" for label in spectrum.labels]


def band_rows(spectrum: BandSpectrum) -> List[tuple]:
    return [(float(x0), *map(float, row)) for x0, row in zip(spectrum.x0_grid, spectrum.bands)]


def sweep_rows(result: SweepResult) -> List[tuple]:
    return list(zip(result.values, result.mean_k_final))


def distribution_rows(state: MomentumState) -> List[tuple]:
    return observables.momentum_distribution(state)

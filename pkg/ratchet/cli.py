import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import yaml
from pydantic import ValidationError

from .commands import FLAG_TARGETS, common_options, evolve, floquet, reversal, sweep
from .config import settings, setup_logging
from .exceptions import ConfigError, RatchetError
from .output import OutputHeader
from .schemas import Experiment, RunConfig

logger = logging.getLogger(__name__)

COMMANDS = (evolve, sweep, floquet, reversal)
HANDLERS = {experiment: handler for command in COMMANDS for experiment, handler in command.handlers.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratchet",
        description="Quantum delta-kicked flashing ratchet with two desynchronized potentials",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser


def _validation_message(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc']) or 'config'}: {item['msg']}"
        for item in error.errors()
    )


def _read_document(path: str) -> dict:
    try:
        document = yaml.safe_load(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}")
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"config file {path} must hold a mapping at the top level")
    return document


def _validate(document: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {_validation_message(e)}")


def load_config(path: str) -> RunConfig:
    """Read and validate a YAML run configuration; defaults fill every omitted field"""
    return _validate(_read_document(path))


def apply_flags(document: dict, args: argparse.Namespace) -> Tuple[dict, List[str]]:
    """
    Overlay command-line values on a configuration document.

    Returns the merged document and the dotted names of the fields the
    flags set.
    """
    merged = {key: dict(value) if isinstance(value, dict) else value for key, value in document.items()}
    overrides = []

    experiment = args.experiment
    if merged.get("experiment") not in (None, experiment):
        overrides.append("experiment")
    merged["experiment"] = experiment

    for dest, (section, field) in FLAG_TARGETS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if section is None:
            merged[field] = value
            overrides.append(field)
        else:
            target = merged.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigError(f"config section {section} must be a mapping")
            target[field] = value
            overrides.append(f"{section}.{field}")
    return merged, overrides


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the selected experiment and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    setup_logging(args.log_level)
    try:
        document = _read_document(args.config) if args.config else {}
        merged, overrides = apply_flags(document, args)
        config = _validate(merged)
        logger.info(f"Starting {settings.app_name} v{settings.app_version}: {config.experiment.value}")
        if overrides and args.config:
            logger.info(f"Flags override config file fields: {', '.join(overrides)}")
        HANDLERS[Experiment(config.experiment)](config, OutputHeader.for_config(config, overrides))
    except RatchetError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid value: {_validation_message(e)}")
        return ConfigError.exit_code
    logger.info("Run completed")
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))

"""
Subcommand groups of the ratchet CLI.

Each module registers its parsers and exposes `handlers`, a mapping from
Experiment to a function taking the resolved RunConfig and OutputHeader.
"""
import argparse

from ..models import KickOrder

# argparse dest -> (section, field) of the run configuration; section None is top level
FLAG_TARGETS = {
    "kappa_pi": ("params", "kappa_pi"),
    "eta": ("params", "eta"),
    "pstrength": ("params", "strength_P"),
    "alpha": ("params", "alpha"),
    "order": ("params", "kick_order"),
    "tail_tol": ("params", "tail_tol"),
    "k_cap": ("params", "k_cap"),
    "periods": (None, "periods"),
    "format": ("output", "format"),
    "out": ("output", "path"),
    "distribution": ("output", "distribution"),
    "values": ("sweep", "values"),
    "x0_points": ("floquet", "x0_points"),
    "interval": ("reversal", "interval"),
    "width": ("reversal", "width"),
}


def common_options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; unset flags stay None so the config file wins"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", default=None, help="YAML run configuration")
    parser.add_argument("--kappa-pi", dest="kappa_pi", type=float, default=None, help="kappa in units of pi")
    parser.add_argument("--eta", type=float, default=None, help="time delay of the first kick")
    parser.add_argument("--pstrength", type=float, default=None, help="potential strength P")
    parser.add_argument("--alpha", type=float, default=None, help="relative amplitude of sin(2x)")
    parser.add_argument(
        "--order", choices=[order.value for order in KickOrder], default=None, help="which potential kicks first"
    )
    parser.add_argument("--tail-tol", dest="tail_tol", type=float, default=None)
    parser.add_argument("--k-cap", dest="k_cap", type=int, default=None)
    parser.add_argument("--periods", type=int, default=None)
    parser.add_argument("--format", choices=["csv", "json"], default=None)
    parser.add_argument("--out", default=None, help="output file (stdout when omitted)")
    parser.add_argument("--log-level", dest="log_level", default=None)
    return parser

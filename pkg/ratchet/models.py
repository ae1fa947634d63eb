import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


DEFAULT_ALPHA = 0.3
DEFAULT_TAIL_TOL = 1e-14
DEFAULT_K_CAP = 2 ** 16

# Sites per edge whose probability must stay below tail_tol before a kick.
EDGE_BAND = 8
# Symmetric growth step of the momentum window, in sites per edge.
WINDOW_GROWTH = 64


class KickOrder(str, Enum):
    V1_FIRST = "v1-first"
    V2_FIRST = "v2-first"


class Potential(str, Enum):
    V1 = "v1"              # alpha * sin(2x)
    V2 = "v2"              # sin(x)
    COMBINED = "combined"  # alpha * sin(2x) + sin(x)


class MomentumState(BaseModel):
    """Wavefunction as amplitudes on the integer momentum lattice k_min .. k_min + len - 1"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k_min: int
    amps: np.ndarray
    tail_tol: float = Field(default=DEFAULT_TAIL_TOL, gt=0)

    @field_validator("amps", mode="before")
    @classmethod
    def _as_readonly_complex(cls, value):
        amps = np.array(value, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amps must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        return amps

    @classmethod
    def from_mapping(cls, amplitudes: dict, tail_tol: float = DEFAULT_TAIL_TOL) -> "MomentumState":
        """Build a state from {k: amplitude}; unlisted sites inside the span are zero"""
        k_lo, k_hi = min(amplitudes), max(amplitudes)
        amps = np.zeros(k_hi - k_lo + 1, dtype=complex)
        for k, c in amplitudes.items():
            amps[k - k_lo] = c
        return cls(k_min=k_lo, amps=amps, tail_tol=tail_tol)

    @property
    def size(self) -> int:
        return int(self.amps.size)

    @property
    def k_max(self) -> int:
        return self.k_min + self.size - 1

    @property
    def momenta(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_min + self.size)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.probabilities))

    def edge_band_probability(self) -> float:
        """Larger of the two edge-band probabilities (outermost EDGE_BAND sites per edge)"""
        p = self.probabilities
        return float(max(np.sum(p[:EDGE_BAND]), np.sum(p[-EDGE_BAND:])))

    def support(self) -> Tuple[int, int]:
        """Smallest (kmin, kmax) covering every site with probability above tail_tol"""
        occupied = np.flatnonzero(self.probabilities > self.tail_tol)
        if occupied.size == 0:
            return (self.k_min, self.k_min)
        return (self.k_min + int(occupied[0]), self.k_min + int(occupied[-1]))

    def on_window(self, k_lo: int, k_hi: int) -> np.ndarray:
        """Amplitudes on k_lo..k_hi, zero where the state has no site"""
        out = np.zeros(k_hi - k_lo + 1, dtype=complex)
        lo = max(k_lo, self.k_min)
        hi = min(k_hi, self.k_max)
        if lo <= hi:
            out[lo - k_lo:hi - k_lo + 1] = self.amps[lo - self.k_min:hi - self.k_min + 1]
        return out

    def padded(self, sites: int) -> "MomentumState":
        """Same state on a window widened by `sites` zero sites on each edge"""
        if sites <= 0:
            return self
        return MomentumState(
            k_min=self.k_min - sites,
            amps=np.pad(self.amps, sites),
            tail_tol=self.tail_tol,
        )

    def with_amps(self, amps: np.ndarray, k_min: Optional[int] = None) -> "MomentumState":
        return MomentumState(
            k_min=self.k_min if k_min is None else k_min,
            amps=amps,
            tail_tol=self.tail_tol,
        )


class RatchetParams(BaseModel):
    """Dimensionless model parameters of the desynchronized flashing ratchet"""
    model_config = ConfigDict(frozen=True)

    kappa: float = Field(gt=0)
    strength_P: float = Field(ge=0)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0)
    eta: float = Field(default=0.5, ge=0, lt=1)
    kick_order: KickOrder = KickOrder.V1_FIRST
    tail_tol: float = Field(default=DEFAULT_TAIL_TOL, gt=0)
    k_cap: int = Field(default=DEFAULT_K_CAP, gt=0)

    @classmethod
    def from_kappa_pi(cls, kappa_pi: float, **kwargs) -> "RatchetParams":
        return cls(kappa=kappa_pi * math.pi, **kwargs)

    @property
    def kappa_pi(self) -> float:
        return self.kappa / math.pi

    @property
    def coincident(self) -> bool:
        """True when both kicks act at the same instant (eta = 0)"""
        return self.eta == 0

    def slot_potentials(self) -> Tuple[Potential, Potential]:
        """Potentials kicking at t = n + eta and at t = n + 1, in that order"""
        if self.kick_order == KickOrder.V1_FIRST:
            return Potential.V1, Potential.V2
        return Potential.V2, Potential.V1


class TrajectoryRecord(BaseModel):
    """Observables at the end of period t"""
    model_config = ConfigDict(frozen=True)

    t: int
    mean_k: float
    mean_k2: float
    norm_error: float = Field(ge=0)
    period_force: float
    k_support: Tuple[int, int]


class Trajectory(BaseModel):
    """Result of evolve(): per-period records, the final state and optional pre-kick states"""
    model_config = ConfigDict(frozen=True)

    records: List[TrajectoryRecord]
    final_state: MomentumState
    pre_kick_states: Optional[List[Tuple[MomentumState, MomentumState]]] = None


class PhysicalUnits(BaseModel):
    """Laboratory quantities the dimensionless parameters derive from"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    omega_R: float = Field(gt=0)
    T: float = Field(gt=0)
    V0: float = Field(gt=0)
    hbar: float = Field(gt=0)
    k_L: float = Field(gt=0)
    m: float = Field(gt=0)
    wavelength: Optional[float] = Field(default=None, gt=0, alias="lambda")

    @model_validator(mode="after")
    def _check_wavelength(self):
        if self.wavelength is not None and not math.isclose(
            self.wavelength, 2 * math.pi / self.k_L, rel_tol=1e-9
        ):
            raise ValueError("lambda must equal 2*pi/k_L")
        return self

    @property
    def resolved_wavelength(self) -> float:
        return self.wavelength if self.wavelength is not None else 2 * math.pi / self.k_L


class FiberUnitary(BaseModel):
    """One-period operator restricted to the Bloch fiber over quasi-position x0"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x0: float
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])


class BandSpectrum(BaseModel):
    """Quasienergy bands sampled on an x0 grid; bands[i, j] belongs to labels[j]"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x0_grid: np.ndarray
    bands: np.ndarray
    labels: List[int]

    @model_validator(mode="after")
    def _check_shape(self):
        if self.bands.shape != (self.x0_grid.size, len(self.labels)):
            raise ValueError("bands must have one column per label and one row per x0")
        return self

    def unwrapped(self) -> np.ndarray:
        return np.unwrap(self.bands, axis=0)


class SweepResult(BaseModel):
    """Final currents of a one-parameter scan, one row per parameter value"""
    model_config = ConfigDict(frozen=True)

    parameter: str
    values: List[float]
    mean_k_final: List[float]
    early_mean_k: Optional[List[float]] = None
    series: Optional[List[List[float]]] = None
    periods: int
    params: RatchetParams

    @model_validator(mode="after")
    def _check_rows(self):
        rows = len(self.values)
        if len(self.mean_k_final) != rows:
            raise ValueError("one mean_k_final per parameter value is required")
        for name in ("early_mean_k", "series"):
            column = getattr(self, name)
            if column is not None and len(column) != rows:
                raise ValueError(f"one {name} entry per parameter value is required")
        return self

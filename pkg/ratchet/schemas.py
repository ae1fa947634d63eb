from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .models import (
    DEFAULT_ALPHA,
    DEFAULT_K_CAP,
    DEFAULT_TAIL_TOL,
    KickOrder,
    RatchetParams,
)


class Experiment(str, Enum):
    EVOLVE = "evolve"
    SWEEP_ETA = "sweep-eta"
    SWEEP_STRENGTH = "sweep-strength"
    SWEEP_KAPPA = "sweep-kappa"
    FLOQUET_BANDS = "floquet-bands"
    REVERSAL = "reversal"
    FIND_REVERSAL = "find-reversal"


class ParamsConfig(BaseModel):
    """Model parameters as written in a run configuration (kappa in units of pi)"""
    model_config = ConfigDict(extra="forbid")

    kappa_pi: float = Field(1.0, gt=0)
    eta: float = Field(0.5, ge=0, lt=1)
    strength_P: float = Field(0.5, ge=0)
    alpha: float = Field(DEFAULT_ALPHA, ge=0)
    kick_order: KickOrder = KickOrder.V1_FIRST
    tail_tol: float = Field(DEFAULT_TAIL_TOL, gt=0)
    k_cap: int = Field(DEFAULT_K_CAP, gt=0)

    def to_params(self) -> RatchetParams:
        return RatchetParams.from_kappa_pi(
            self.kappa_pi,
            strength_P=self.strength_P,
            alpha=self.alpha,
            eta=self.eta,
            kick_order=self.kick_order,
            tail_tol=self.tail_tol,
            k_cap=self.k_cap,
        )


class SweepConfig(BaseModel):
    """Values of the swept parameter; kappa values are given in units of pi"""
    model_config = ConfigDict(extra="forbid")

    values: Optional[List[float]] = Field(None, min_length=1)


class FloquetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x0_points: int = Field(256, ge=2)


class ReversalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    interval: Tuple[float, float] = (2.0, 3.0)
    width: float = Field(0.01, gt=0)

    @model_validator(mode="after")
    def _check_interval(self):
        lo, hi = self.interval
        if not 0 <= lo < hi:
            raise ValueError("reversal interval must satisfy 0 <= lo < hi")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None
    distribution: Optional[str] = None


class RunConfig(BaseModel):
    """Complete, validated run configuration"""
    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    periods: int = Field(200, ge=1)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    floquet: FloquetConfig = Field(default_factory=FloquetConfig)
    reversal: ReversalConfig = Field(default_factory=ReversalConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

"""Settings read by the coordination methods."""

import math

from pydantic import BaseModel, ConfigDict, Field

from ..rcdcre.config import AlgoConfig
from ..utils.config import Tolerances


class AdmmConfig(BaseModel):
    """Consensus ADMM penalty and stopping rule."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    rho: float = Field(default=100.0, gt=0.0)
    max_iterations: int = Field(default=3000, gt=0)
    primal_tol: float = Field(default=1e-5, gt=0.0)
    dual_tol: float = Field(default=1e-5, gt=0.0)


class BendersConfig(BaseModel):
    """Benders master box, gap tolerance and iteration cap."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta_bound: float = Field(default=math.pi, gt=0.0)
    gap_tol: float = Field(default=1e-6, gt=0.0)
    max_iterations: int = Field(default=1000, gt=0)
    big_m: float | None = Field(default=None, gt=0.0)


class MethodSettings(BaseModel):
    """Everything a method run may read; each method uses its own part."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    algo: AlgoConfig = Field(default_factory=AlgoConfig)
    admm: AdmmConfig = Field(default_factory=AdmmConfig)
    benders: BendersConfig = Field(default_factory=BendersConfig)
    reference_objective: float | None = None
    tolerances: Tolerances | None = None

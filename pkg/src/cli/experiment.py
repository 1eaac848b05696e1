"""Experiment configuration: which case, which methods, from where."""

import json
from dataclasses import replace
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..grid.case import NetworkCase
from ..grid.io import load_case
from ..grid.library import GENERATORS, TieSpec, load_ieee_case, stitch_cases
from ..methods.dispatcher import METHOD_ORDER
from ..methods.settings import AdmmConfig, BendersConfig, MethodSettings
from ..rcdcre.config import AlgoConfig
from ..utils.config import Tolerances
from ..utils.exceptions import ExperimentConfigError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class GeneratorSpec(BaseModel):
    """A case built by the library instead of read from disk."""

    model_config = ConfigDict(extra="forbid")

    name: str
    seed: int
    linear: bool = False

    @field_validator("name")
    @classmethod
    def _known_generator(cls, name: str) -> str:
        if name not in GENERATORS:
            raise ValueError(f"unknown generator {name!r}, expected one of {sorted(GENERATORS)}")
        return name

    def build(self) -> NetworkCase:
        return GENERATORS[self.name](self.seed, linear=self.linear)


class StitchTie(BaseModel):
    model_config = ConfigDict(extra="forbid")

    from_area: int = Field(ge=0)
    from_bus: int
    to_area: int = Field(ge=0)
    to_bus: int
    b_pu: float = Field(gt=0.0)
    limit_mw: float | None = Field(default=None, gt=0.0)


class StitchSpec(BaseModel):
    """
    A custom multi-area case: single-area parts joined by ties.

    Each part is an IEEE case name shipped with pypower (`ieee14`, `ieee30`,
    `ieee118`) or a path to a case file, relative to the spec file.
    """

    model_config = ConfigDict(extra="forbid")

    name: str = "stitched"
    cases: list[str] = Field(min_length=2)
    ties: list[StitchTie] = Field(min_length=1)
    tie_limit_mw: float = Field(default=10.0, gt=0.0)
    internal_limit_mw: float | None = Field(default=100.0, gt=0.0)

    def build(self, base_dir: Path) -> NetworkCase:
        parts = []
        for entry in self.cases:
            if entry.startswith("ieee"):
                try:
                    parts.append(load_ieee_case(entry))
                except KeyError as e:
                    raise ExperimentConfigError(f"unknown IEEE case {entry!r}") from e
            else:
                parts.append(load_case(base_dir / entry))
        ties = [TieSpec(**tie.model_dump()) for tie in self.ties]
        return stitch_cases(
            parts,
            ties,
            tie_limit_mw=self.tie_limit_mw,
            internal_limit_mw=self.internal_limit_mw,
            name=self.name,
        )


class ToleranceOverrides(BaseModel):
    """Solver tolerances that replace the environment defaults when set."""

    model_config = ConfigDict(extra="forbid")

    feasibility: float | None = Field(default=None, gt=0.0)
    stationarity: float | None = Field(default=None, gt=0.0)
    activity: float | None = Field(default=None, gt=0.0)

    def apply(self, base: Tolerances) -> Tolerances:
        return replace(base, **self.model_dump(exclude_none=True))


class StartFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    file: str


class ExperimentConfig(BaseModel):
    """
    One experiment: a case, the methods to compare and their settings.

    Exactly one of `case` (a path, relative to the config file) and
    `generator` is given. `start` is "zero", an explicit vector, or a file
    holding a JSON list.
    """

    model_config = ConfigDict(extra="forbid")

    name: str | None = None
    case: str | None = None
    generator: GeneratorSpec | None = None
    methods: list[Literal["centralized", "cre", "rcdcre", "admm", "benders"]] = Field(
        default_factory=lambda: list(METHOD_ORDER)
    )
    start: Literal["zero"] | list[float] | StartFile = "zero"
    algo: AlgoConfig = Field(default_factory=AlgoConfig)
    admm: AdmmConfig = Field(default_factory=AdmmConfig)
    benders: BendersConfig = Field(default_factory=BendersConfig)
    tolerances: ToleranceOverrides = Field(default_factory=ToleranceOverrides)
    output_dir: str | None = None
    csv: bool = False

    @model_validator(mode="after")
    def _one_case_source(self) -> "ExperimentConfig":
        if (self.case is None) == (self.generator is None):
            raise ValueError("give exactly one of 'case' and 'generator'")
        if not self.methods:
            raise ValueError("at least one method is required")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"methods repeat an entry: {self.methods}")
        return self

    @property
    def ordered_methods(self) -> list[str]:
        """Requested methods in run order, the centralized reference first."""
        return [name for name in METHOD_ORDER if name in self.methods]

    def build_case(self, base_dir: Path) -> NetworkCase:
        if self.generator is not None:
            logger.debug(f"Generating {self.generator.name} with seed {self.generator.seed}")
            return self.generator.build()
        return load_case(base_dir / self.case)

    def start_vector(self, dimension: int, base_dir: Path) -> np.ndarray:
        """
        The starting θ for the case.

        Raises:
            ExperimentConfigError: If the vector is unreadable or has the wrong length
        """
        if self.start == "zero":
            return np.zeros(dimension)
        if isinstance(self.start, StartFile):
            path = base_dir / self.start.file
            try:
                values = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise ExperimentConfigError(f"cannot read start vector {path}: {e}") from e
        else:
            values = self.start
        try:
            theta = np.asarray(values, dtype=float).ravel()
        except (TypeError, ValueError) as e:
            raise ExperimentConfigError(f"start vector is not a list of numbers: {e}") from e
        if theta.size != dimension:
            raise ExperimentConfigError(
                f"start has {theta.size} entries, the case has {dimension} boundary angles"
            )
        return theta

    def settings(self, base: Tolerances, threads: int | None = None) -> MethodSettings:
        """Method settings with the tolerance overrides and thread count applied."""
        algo = self.algo
        if threads is not None:
            algo = algo.model_copy(update={"threads": threads})
        return MethodSettings(
            algo=algo,
            admm=self.admm,
            benders=self.benders,
            tolerances=self.tolerances.apply(base),
        )


def load_experiment(path: Path | str) -> ExperimentConfig:
    """
    Read and validate an experiment file.

    Raises:
        ExperimentConfigError: If the file is unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ExperimentConfigError(f"cannot read {path}: {e}") from e
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in e.errors()
        )
        raise ExperimentConfigError(f"{path}: {problems}") from e


def load_stitch_spec(path: Path | str) -> NetworkCase:
    """
    Build the case described by a stitch spec file.

    Raises:
        ExperimentConfigError: If the stitch file is unreadable or invalid
        CaseError: If a part cannot be loaded or stitched
    """
    path = Path(path)
    try:
        spec = StitchSpec.model_validate_json(path.read_text())
    except OSError as e:
        raise ExperimentConfigError(f"cannot read {path}: {e}") from e
    except ValidationError as e:
        raise ExperimentConfigError(f"{path}: {e.error_count()} invalid stitch fields") from e
    return spec.build(path.parent)

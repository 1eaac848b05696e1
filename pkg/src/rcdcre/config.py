"""Settings of the rotated coordinate descent run."""

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utils.exceptions import ExperimentConfigError


class AlgoConfig(BaseModel):
    """
    Stepsize, optimality tolerance and ℓ1 weight schedule.

    `area_order` fixes the cycle over areas (ascending ids when omitted).
    `optimal_tol` is compared with ‖v‖ relative to the largest collected
    gradient, so it means the same thing for unit-scale and MW-scale cases.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    stepsize: float = Field(default=1e-3, gt=0.0)
    optimal_tol: float = Field(default=1e-6, gt=0.0)
    sigma: float = Field(default=1e3, gt=0.0)
    sigma_growth: float = Field(default=10.0, gt=1.0)
    sigma_margin: float = Field(default=1.0, gt=0.0)
    sigma_max: float = Field(default=1e8, gt=0.0)
    area_order: tuple[int, ...] | None = None
    max_iterations: int = Field(default=5000, gt=0)
    max_halvings: int = Field(default=20, gt=0)
    containment_tol: float = Field(default=1e-7, gt=0.0)
    big_m: float | None = Field(default=None, gt=0.0)
    threads: int = Field(default=1, gt=0)

    @field_validator("area_order")
    @classmethod
    def _distinct_areas(cls, order: tuple[int, ...] | None) -> tuple[int, ...] | None:
        if order is not None and len(set(order)) != len(order):
            raise ValueError(f"area_order repeats an area: {order}")
        return order

    def order_for(self, n_areas: int) -> list[int]:
        """The area cycle for a case with `n_areas` areas."""
        if self.area_order is None:
            return list(range(n_areas))
        if sorted(self.area_order) != list(range(n_areas)):
            raise ExperimentConfigError(
                f"area_order {self.area_order} is not a permutation of {n_areas} areas"
            )
        return list(self.area_order)

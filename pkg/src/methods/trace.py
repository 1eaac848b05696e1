"""Per-iteration convergence records shared by every method."""

import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..utils.exceptions import TraceStoreError

PHASES = ("explore", "coordinate", "rotate", "terminate", "iterate")


@dataclass
class TraceRecord:
    """
    One line of a trace.

    `objective` is the quantity the relative gap is measured on; the other
    numeric fields are optional and method specific.
    """

    iteration: int
    objective: float
    theta: list[float]
    phase: str = "iterate"
    area: int | None = None
    obj_true: float | None = None
    obj_penalized: float | None = None
    infeas_norm: float | None = None
    dual_residual: float | None = None
    v_norm: float | None = None
    rotations: int = 0
    stage: str | None = None
    wall_time: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        data = {
            "iter": self.iteration,
            "phase": self.phase,
            "area": self.area,
            "theta": [float(value) for value in self.theta],
            "objective": self.objective,
            "obj_true": self.obj_true,
            "obj_penalized": self.obj_penalized,
            "infeas_norm": self.infeas_norm,
            "dual_residual": self.dual_residual,
            "v_norm": self.v_norm,
            "rotations": self.rotations,
            "stage": self.stage,
            "wall_time": self.wall_time,
        }
        data.update(self.extra)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TraceRecord":
        known = {
            "iter",
            "phase",
            "area",
            "theta",
            "objective",
            "obj_true",
            "obj_penalized",
            "infeas_norm",
            "dual_residual",
            "v_norm",
            "rotations",
            "stage",
            "wall_time",
        }
        return cls(
            iteration=int(data["iter"]),
            objective=float(data["objective"]),
            theta=list(data.get("theta", [])),
            phase=data.get("phase", "iterate"),
            area=data.get("area"),
            obj_true=data.get("obj_true"),
            obj_penalized=data.get("obj_penalized"),
            infeas_norm=data.get("infeas_norm"),
            dual_residual=data.get("dual_residual"),
            v_norm=data.get("v_norm"),
            rotations=int(data.get("rotations", 0)),
            stage=data.get("stage"),
            wall_time=float(data.get("wall_time", 0.0)),
            extra={key: value for key, value in data.items() if key not in known},
        )


@dataclass
class ConvergenceTrace:
    """Records of one method run, in strictly increasing iteration order."""

    method: str
    records: list[TraceRecord] = field(default_factory=list)
    termination: str = ""
    reference_objective: float | None = None
    sink: Callable[[TraceRecord], None] | None = field(default=None, repr=False)
    started: float = field(default_factory=time.perf_counter, repr=False)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: TraceRecord) -> TraceRecord:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise TraceStoreError(
                f"{self.method}: iteration {record.iteration} does not follow "
                f"{self.records[-1].iteration}"
            )
        if record.phase not in PHASES:
            raise TraceStoreError(f"{self.method}: unknown phase {record.phase!r}")
        self.records.append(record)
        if self.sink is not None:
            self.sink(record)
        return record

    def add(self, objective: float, theta: np.ndarray, **fields: Any) -> TraceRecord:
        """Append a record numbered after the last one and stamped with the elapsed time."""
        iteration = self.records[-1].iteration + 1 if self.records else 0
        known = set(TraceRecord.__dataclass_fields__)
        extra = {key: fields.pop(key) for key in list(fields) if key not in known}
        record = TraceRecord(
            iteration=iteration,
            objective=float(objective),
            theta=[float(value) for value in np.ravel(theta)],
            wall_time=time.perf_counter() - self.started,
            extra=extra,
            **fields,
        )
        return self.append(record)

    def relative_gap(self, objective: float) -> float:
        """|objective − reference| / |reference|, or nan without a reference."""
        if self.reference_objective is None:
            return float("nan")
        reference = self.reference_objective
        if reference == 0.0:
            return abs(objective)
        return abs(objective - reference) / abs(reference)

    def gaps(self) -> np.ndarray:
        return np.array([self.relative_gap(record.objective) for record in self.records])

    def iterations_to(self, tol: float) -> int | None:
        """First iteration after which the relative gap stays ≤ tol."""
        if self.reference_objective is None or not self.records:
            return None
        gaps = self.gaps()
        if not gaps[-1] <= tol:
            return None
        above = np.flatnonzero(~(gaps <= tol))
        first = 0 if above.size == 0 else int(above[-1]) + 1
        return self.records[first].iteration

    def finish(
        self, objective: float, theta: np.ndarray, reason: str, certified: bool, **fields: Any
    ) -> TraceRecord:
        """Close the trace with a terminate record that carries the reference and the reason."""
        self.termination = reason
        return self.add(
            objective,
            theta,
            phase="terminate",
            termination=reason,
            certified=certified,
            reference=self.reference_objective,
            **fields,
        )

    @property
    def certified(self) -> bool:
        last = self.records[-1] if self.records else None
        return bool(last is not None and last.phase == "terminate" and last.extra.get("certified"))

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective if self.records else float("nan")

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0

    def count(self, phase: str) -> int:
        return sum(1 for record in self.records if record.phase == phase)

    def coordinate_switches(self) -> int:
        """Changes of the moving area between consecutive accepted moves."""
        areas = [record.area for record in self.records if record.phase == "coordinate"]
        return sum(1 for before, after in zip(areas, areas[1:]) if before != after)

    def first_feasible_iteration(self) -> int | None:
        for record in self.records:
            if record.stage == "feasible":
                return record.iteration
        return None

    def to_jsonl(self) -> list[dict[str, Any]]:
        return [record.to_dict() for record in self.records]

    @classmethod
    def from_jsonl(
        cls,
        method: str,
        rows: list[dict[str, Any]],
        reference_objective: float | None = None,
        termination: str = "",
    ) -> "ConvergenceTrace":
        trace = cls(method=method, reference_objective=reference_objective)
        for row in rows:
            trace.append(TraceRecord.from_dict(row))
        last = trace.records[-1].extra if trace.records else {}
        if reference_objective is None:
            trace.reference_objective = last.get("reference")
        trace.termination = termination or last.get("termination", "")
        return trace

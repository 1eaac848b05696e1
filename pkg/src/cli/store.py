"""Trace files and run summaries on disk."""

import csv
import io
import json
from pathlib import Path
from typing import Any

import aiofiles
import numpy as np

from ..methods.base import SUMMARY_GAP, summarize_trace
from ..methods.dispatcher import METHOD_ORDER
from ..methods.trace import ConvergenceTrace
from ..utils.exceptions import TraceStoreError
from ..utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_FILE = "summary.json"
TRACE_SUFFIX = ".jsonl"


def _method_rank(method: str) -> tuple[int, str]:
    position = METHOD_ORDER.index(method) if method in METHOD_ORDER else len(METHOD_ORDER)
    return position, method


def summary_from_traces(
    traces: dict[str, ConvergenceTrace], tol: float = SUMMARY_GAP
) -> dict[str, dict[str, Any]]:
    """The run summary, recomputed from the traces alone."""
    return {
        method: summarize_trace(traces[method], tol)
        for method in sorted(traces, key=_method_rank)
    }


class TraceStore:
    """
    One directory per experiment: `<method>.jsonl` traces, optional
    `<method>.csv` exports and `summary.json`.
    """

    def __init__(self, output_dir: Path | str) -> None:
        self.output_dir = Path(output_dir)

    def _ensure_dir(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def trace_path(self, method: str) -> Path:
        return self.output_dir / f"{method}{TRACE_SUFFIX}"

    @property
    def summary_path(self) -> Path:
        return self.output_dir / SUMMARY_FILE

    async def save_trace(self, trace: ConvergenceTrace) -> Path:
        """Write a trace as JSON lines, one record per line."""
        self._ensure_dir()
        path = self.trace_path(trace.method)
        lines = "".join(json.dumps(row, default=_json_default) + "\n" for row in trace.to_jsonl())
        try:
            async with aiofiles.open(path, "w") as f:
                await f.write(lines)
        except OSError as e:
            raise TraceStoreError(f"cannot write {path}: {e}") from e
        logger.debug(f"Saved {len(trace)} records to {path}")
        return path

    async def save_csv(self, trace: ConvergenceTrace) -> Path:
        """
        Write a trace as CSV with one θ column per boundary angle.

        Columns are the fixed record fields followed by any method-specific ones.
        """
        self._ensure_dir()
        path = self.output_dir / f"{trace.method}.csv"
        rows = trace.to_jsonl()
        width = max((len(row["theta"]) for row in rows), default=0)
        fixed = [key for key in rows[0] if key != "theta"] if rows else []
        extra = sorted({key for row in rows for key in row} - set(fixed) - {"theta"})
        header = fixed + extra + [f"theta_{k}" for k in range(width)]

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            theta = list(row["theta"]) + [""] * (width - len(row["theta"]))
            writer.writerow([_cell(row.get(key)) for key in fixed + extra] + theta)
        try:
            async with aiofiles.open(path, "w", newline="") as f:
                await f.write(buffer.getvalue())
        except OSError as e:
            raise TraceStoreError(f"cannot write {path}: {e}") from e
        return path

    async def save_summary(self, summary: dict[str, dict[str, Any]]) -> Path:
        self._ensure_dir()
        try:
            async with aiofiles.open(self.summary_path, "w") as f:
                await f.write(json.dumps(summary, indent=2, default=_json_default) + "\n")
        except OSError as e:
            raise TraceStoreError(f"cannot write {self.summary_path}: {e}") from e
        return self.summary_path

    async def load_trace(self, method: str) -> ConvergenceTrace:
        """
        Read a trace back.

        Raises:
            TraceStoreError: If the file is missing or not a valid trace
        """
        path = self.trace_path(method)
        if not path.exists():
            raise TraceStoreError(f"no trace for {method} in {self.output_dir}")
        async with aiofiles.open(path, "r") as f:
            content = await f.read()
        try:
            rows = [json.loads(line) for line in content.splitlines() if line.strip()]
            return ConvergenceTrace.from_jsonl(method, rows)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise TraceStoreError(f"{path} is not a valid trace: {e}") from e

    async def load_all(self) -> dict[str, ConvergenceTrace]:
        """
        Every trace in the directory, in run order.

        Raises:
            TraceStoreError: If the directory holds no traces
        """
        methods = sorted(
            (path.stem for path in self.output_dir.glob(f"*{TRACE_SUFFIX}")), key=_method_rank
        )
        if not methods:
            raise TraceStoreError(f"no traces found in {self.output_dir}")
        return {method: await self.load_trace(method) for method in methods}

    async def load_summary(self) -> dict[str, dict[str, Any]]:
        if not self.summary_path.exists():
            raise TraceStoreError(f"no {SUMMARY_FILE} in {self.output_dir}")
        async with aiofiles.open(self.summary_path, "r") as f:
            content = await f.read()
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise TraceStoreError(f"{self.summary_path} is not valid JSON: {e}") from e


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value

"""Tests for the trace store."""

import csv

import numpy as np
import pytest

from src.cli.store import TraceStore, summary_from_traces
from src.methods.trace import ConvergenceTrace
from src.utils.exceptions import TraceStoreError


def make_trace(method: str = "rcdcre", reference: float | None = 1.0) -> ConvergenceTrace:
    trace = ConvergenceTrace(method, reference_objective=reference)
    trace.add(3.0, np.zeros(2), phase="explore", stage="penalized")
    trace.add(
        1.5,
        np.array([-1.0, 0.0]),
        phase="coordinate",
        area=0,
        stage="feasible",
        sigma=np.float64(1e3),
    )
    trace.finish(1.0, np.array([-0.5, -0.5]), "optimal", True, rotations=1)
    return trace


@pytest.fixture
def store(tmp_path):
    return TraceStore(tmp_path / "run")


class TestTraceStore:
    """Writing and reading traces."""

    @pytest.mark.asyncio
    async def test_trace_round_trip(self, store):
        trace = make_trace()
        path = await store.save_trace(trace)
        assert path == store.trace_path("rcdcre")
        assert len(path.read_text().splitlines()) == 3

        loaded = await store.load_trace("rcdcre")
        assert len(loaded) == 3
        assert loaded.reference_objective == 1.0
        assert loaded.termination == "optimal"
        assert loaded.certified
        assert loaded.records[1].area == 0
        assert loaded.records[1].extra["sigma"] == 1e3
        assert loaded.records[2].theta == [-0.5, -0.5]

    @pytest.mark.asyncio
    async def test_load_all_in_run_order(self, store):
        for method in ("admm", "rcdcre", "centralized"):
            await store.save_trace(make_trace(method))
        traces = await store.load_all()
        assert list(traces) == ["centralized", "rcdcre", "admm"]

    @pytest.mark.asyncio
    async def test_load_all_empty(self, tmp_path):
        with pytest.raises(TraceStoreError, match="no traces"):
            await TraceStore(tmp_path).load_all()

    @pytest.mark.asyncio
    async def test_missing_trace(self, store):
        with pytest.raises(TraceStoreError, match="no trace for cre"):
            await store.load_trace("cre")

    @pytest.mark.asyncio
    async def test_invalid_trace(self, store):
        store.output_dir.mkdir(parents=True)
        store.trace_path("cre").write_text("not json\n")
        with pytest.raises(TraceStoreError, match="not a valid trace"):
            await store.load_trace("cre")

    @pytest.mark.asyncio
    async def test_csv_export(self, store):
        path = await store.save_csv(make_trace())
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        header = rows[0]
        assert header[0] == "iter"
        assert header[-2:] == ["theta_0", "theta_1"]
        assert {"sigma", "termination", "certified"} <= set(header)
        assert len(rows) == 4
        assert rows[3][-2:] == ["-0.5", "-0.5"]

    @pytest.mark.asyncio
    async def test_summary_round_trip(self, store):
        summary = summary_from_traces({"rcdcre": make_trace()})
        await store.save_summary(summary)
        assert await store.load_summary() == summary

    @pytest.mark.asyncio
    async def test_missing_summary(self, store):
        with pytest.raises(TraceStoreError):
            await store.load_summary()


class TestSummaryFromTraces:
    """The summary is a function of the traces alone."""

    def test_entries(self):
        summary = summary_from_traces({"rcdcre": make_trace()})
        entry = summary["rcdcre"]
        assert entry["final_obj"] == 1.0
        assert entry["rel_gap_vs_centralized"] == 0.0
        assert entry["iterations_to_0.001"] == 2
        assert entry["rotations"] == 1
        assert entry["first_feasible_iteration"] == 1
        assert entry["certified"]

    def test_method_order(self):
        traces = {name: make_trace(name) for name in ("benders", "cre", "centralized")}
        assert list(summary_from_traces(traces)) == ["centralized", "cre", "benders"]

    def test_no_reference(self):
        entry = summary_from_traces({"cre": make_trace("cre", reference=None)})["cre"]
        assert entry["rel_gap_vs_centralized"] is None
        assert entry["iterations_to_0.001"] is None

    @pytest.mark.asyncio
    async def test_recomputed_after_reload(self, store):
        traces = {name: make_trace(name) for name in ("centralized", "rcdcre")}
        for trace in traces.values():
            await store.save_trace(trace)
        assert summary_from_traces(await store.load_all()) == summary_from_traces(traces)

"""Tests for convergence traces."""

import numpy as np
import pytest

from src.methods.trace import ConvergenceTrace, TraceRecord
from src.utils.exceptions import TraceStoreError


def filled(objectives, reference=1.0):
    trace = ConvergenceTrace("test", reference_objective=reference)
    for value in objectives:
        trace.add(value, np.zeros(2))
    return trace


class TestConvergenceTrace:
    """Numbering, gaps and the terminate record."""

    def test_records_are_numbered_from_zero(self):
        trace = filled([3.0, 2.0, 1.0])
        assert [record.iteration for record in trace.records] == [0, 1, 2]
        assert trace.iterations == 2
        assert trace.final_objective == 1.0

    def test_non_increasing_iteration_rejected(self):
        trace = filled([1.0, 1.0])
        with pytest.raises(TraceStoreError):
            trace.append(TraceRecord(iteration=1, objective=1.0, theta=[0.0]))

    def test_unknown_phase_rejected(self):
        trace = ConvergenceTrace("test")
        with pytest.raises(TraceStoreError):
            trace.add(1.0, np.zeros(1), phase="wander")

    def test_unknown_fields_go_to_extra(self):
        trace = ConvergenceTrace("test")
        record = trace.add(1.0, np.zeros(1), sigma=10.0)
        assert record.extra == {"sigma": 10.0}
        assert record.to_dict()["sigma"] == 10.0

    def test_relative_gap(self):
        assert filled([]).relative_gap(1.5) == pytest.approx(0.5)
        assert filled([], reference=0.0).relative_gap(-0.25) == pytest.approx(0.25)
        assert np.isnan(filled([], reference=None).relative_gap(1.0))

    def test_iterations_to_is_the_last_entry_into_tolerance(self):
        assert filled([2.0, 1.5, 1.0005, 1.0]).iterations_to(1e-3) == 2
        assert filled([2.0, 1.0005, 1.5, 1.0]).iterations_to(1e-3) == 3
        assert filled([2.0, 1.5]).iterations_to(1e-3) is None
        assert filled([1.0], reference=None).iterations_to(1e-3) is None

    def test_finish_marks_termination(self):
        trace = filled([2.0, 1.0])
        record = trace.finish(1.0, np.zeros(2), "optimal", True)
        assert record.phase == "terminate"
        assert trace.termination == "optimal"
        assert trace.certified
        assert record.extra["reference"] == 1.0

    def test_not_certified_without_terminate(self):
        assert not filled([1.0]).certified

    def test_sink_sees_each_record(self):
        received = []
        trace = ConvergenceTrace("test", sink=received.append)
        trace.add(1.0, np.zeros(1))
        trace.finish(0.5, np.zeros(1), "optimal", True)
        assert [record.phase for record in received] == ["iterate", "terminate"]

    def test_coordinate_switches(self):
        trace = ConvergenceTrace("test")
        for area in (0, 0, 1, 0):
            trace.add(1.0, np.zeros(1), phase="coordinate", area=area)
        trace.add(1.0, np.zeros(1), phase="explore", area=1)
        assert trace.coordinate_switches() == 2

    def test_first_feasible_iteration(self):
        trace = ConvergenceTrace("test")
        trace.add(3.0, np.zeros(1), stage="penalized")
        trace.add(2.0, np.zeros(1), stage="outside-coupling")
        trace.add(1.0, np.zeros(1), stage="feasible")
        assert trace.first_feasible_iteration() == 2

    def test_jsonl_rows_restore_the_trace(self):
        trace = filled([2.0, 1.0])
        trace.finish(1.0, np.array([0.5, -0.5]), "optimal", True, sigma=1e3)
        restored = ConvergenceTrace.from_jsonl("test", trace.to_jsonl())
        assert restored.reference_objective == 1.0
        assert restored.termination == "optimal"
        assert restored.certified
        assert restored.records[-1].theta == [0.5, -0.5]
        assert restored.records[-1].extra["sigma"] == 1e3

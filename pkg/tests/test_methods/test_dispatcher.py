"""Tests for the method dispatcher."""

import numpy as np
import pytest

from src.methods.base import CoordinationMethod, MethodRegistry
from src.methods.dispatcher import METHOD_ORDER, MethodCall, MethodDispatcher
from src.methods.settings import MethodSettings
from src.utils.exceptions import CoordinationError, MethodExecutionError, MethodNotFoundError


class RaisingMethod(CoordinationMethod):
    description = "Always fails"

    def __init__(self, name, error):
        self.name = name
        self.error = error

    def run(self, problems, start, settings, sink=None):
        raise self.error


@pytest.fixture
def dispatcher():
    return MethodDispatcher()


@pytest.fixture
def failing_dispatcher():
    dispatcher = MethodDispatcher()
    dispatcher.registry = MethodRegistry()
    dispatcher.registry.register(RaisingMethod("cre", CoordinationError("no region")))
    dispatcher.registry.register(RaisingMethod("admm", ValueError("bad shape")))
    return dispatcher


class TestMethodDispatcher:
    """Lookup, execution and error wrapping."""

    def test_available_methods_in_experiment_order(self, dispatcher):
        assert dispatcher.get_available_methods() == list(METHOD_ORDER)

    def test_run_centralized(self, dispatcher, toy_areas):
        result = dispatcher.run(toy_areas, MethodCall("centralized", np.zeros(2)))
        assert result.objective == pytest.approx(0.5, abs=1e-9)

    def test_unknown_method(self, dispatcher, toy_areas):
        with pytest.raises(MethodNotFoundError) as info:
            dispatcher.run(toy_areas, MethodCall("simplex", np.zeros(2)))
        assert info.value.name == "simplex"

    def test_method_errors_are_wrapped(self, failing_dispatcher, toy_areas):
        with pytest.raises(MethodExecutionError) as info:
            failing_dispatcher.run(toy_areas, MethodCall("cre", np.zeros(2)))
        assert isinstance(info.value.__cause__, CoordinationError)

    def test_numerical_errors_are_wrapped(self, failing_dispatcher, toy_areas):
        with pytest.raises(MethodExecutionError):
            failing_dispatcher.run(toy_areas, MethodCall("admm", np.zeros(2)))

    async def test_execute(self, dispatcher, toy_areas):
        result = await dispatcher.execute(toy_areas, MethodCall("cre", np.array([-1.0, -1.0])))
        assert result.certified
        assert result.objective == pytest.approx(0.5, abs=1e-9)

    async def test_execute_multiple_keeps_order(self, dispatcher, toy_areas):
        calls = [
            MethodCall("centralized", np.zeros(2)),
            MethodCall("rcdcre", np.array([-1.0, -1.0])),
        ]
        results = await dispatcher.execute_multiple(toy_areas, calls)
        assert [result.method for result in results] == ["centralized", "rcdcre"]
        assert results[1].objective == pytest.approx(0.5, abs=1e-6)

    async def test_sink_is_forwarded(self, dispatcher, toy_areas):
        received = []
        await dispatcher.execute(
            toy_areas, MethodCall("centralized", np.zeros(2), sink=received.append)
        )
        assert len(received) == 1

    def test_with_reference(self, dispatcher):
        referenced = dispatcher.with_reference(0.5)
        assert referenced.settings.reference_objective == 0.5
        assert dispatcher.settings.reference_objective is None
        assert isinstance(referenced.settings, MethodSettings)

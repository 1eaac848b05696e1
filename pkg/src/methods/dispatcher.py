"""Method dispatcher for running coordination methods by name."""

import asyncio
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..grid.compact import CompactAreaProblem
from ..utils.exceptions import MethodExecutionError, MethodNotFoundError, MopfError
from ..utils.logger import get_logger
from .base import MethodResult, method_registry
from .settings import MethodSettings
from .trace import TraceRecord

# Import methods to register them
from ..rcdcre import core  # noqa: F401
from . import admm  # noqa: F401
from . import benders  # noqa: F401
from . import centralized  # noqa: F401
from . import cre  # noqa: F401

logger = get_logger(__name__)

# Order in which an experiment runs its methods; the reference comes first
METHOD_ORDER = ("centralized", "cre", "rcdcre", "admm", "benders")


@dataclass
class MethodCall:
    """One method to run on a case."""

    name: str
    start: np.ndarray
    sink: Callable[[TraceRecord], None] | None = None


class MethodDispatcher:
    """Dispatches method runs to the registered coordination methods."""

    def __init__(self, settings: MethodSettings | None = None) -> None:
        self.registry = method_registry
        self.settings = settings or MethodSettings()

    def get_available_methods(self) -> list[str]:
        return [name for name in METHOD_ORDER if name in self.registry]

    def run(self, problems: Sequence[CompactAreaProblem], call: MethodCall) -> MethodResult:
        """
        Run one method synchronously.

        Raises:
            MethodNotFoundError: If the method isn't registered
            MethodExecutionError: If the run fails
        """
        method = self.registry.get(call.name)
        if method is None:
            raise MethodNotFoundError(call.name, self.get_available_methods())

        logger.debug(f"Running method: {call.name} from θ = {np.round(call.start, 6).tolist()}")
        try:
            result = method.run(problems, call.start, self.settings, call.sink)
        except MopfError as e:
            logger.error(f"Method {call.name} failed: {e}")
            raise MethodExecutionError(call.name, str(e)) from e
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.error(f"Method {call.name} failed numerically: {e}")
            raise MethodExecutionError(call.name, str(e)) from e
        logger.debug(f"Method {call.name} finished: certified={result.certified}")
        return result

    async def execute(
        self, problems: Sequence[CompactAreaProblem], call: MethodCall
    ) -> MethodResult:
        """Run one method in a worker thread so the event loop stays responsive."""
        return await asyncio.to_thread(self.run, problems, call)

    async def execute_multiple(
        self, problems: Sequence[CompactAreaProblem], calls: list[MethodCall]
    ) -> list[MethodResult]:
        """
        Run methods one after another, for clean timings.

        Returns:
            Results in the same order as the calls
        """
        results = []
        for call in calls:
            results.append(await self.execute(problems, call))
        return results

    def with_reference(self, objective: float) -> "MethodDispatcher":
        """A dispatcher whose settings carry the centralized objective."""
        settings = self.settings.model_copy(update={"reference_objective": objective})
        return MethodDispatcher(settings)

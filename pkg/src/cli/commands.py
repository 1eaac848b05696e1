"""CLI command handlers."""

import argparse
import asyncio
import json
from enum import Enum, IntEnum, auto
from pathlib import Path
from typing import Any

import aiofiles
import numpy as np

from .. import __version__
from ..grid.case import NetworkCase, Provenance
from ..grid.compact import CompactAreaProblem, reduce_to_compact
from ..grid.dc_model import build_dc_model
from ..grid.io import load_case, serialize_case
from ..grid.library import GENERATORS, perturb_costs, rng_from_seed, with_linear_costs
from ..methods.centralized import solve_centralized
from ..methods.dispatcher import MethodCall, MethodDispatcher
from ..parametric.penalty import bigM_reformulate, verify_bigM_equivalence
from ..parametric.regions import enumerate_regions_bruteforce
from ..utils.config import Config, config
from ..utils.exceptions import (
    CertificationError,
    ExperimentConfigError,
    MethodExecutionError,
    TraceStoreError,
)
from ..utils.logger import get_logger
from .experiment import load_experiment, load_stitch_spec
from .interface import CLIInterface
from .store import TraceStore, summary_from_traces

logger = get_logger(__name__)

CUSTOM_SPEC = "custom"
REGION_SAMPLES = 5


class CommandType(Enum):
    """Types of CLI commands."""

    GENERATE = auto()
    RUN = auto()
    REGIONS = auto()
    CHECK_PENALTY = auto()
    SUMMARIZE = auto()


class ExitCode(IntEnum):
    """Process exit codes."""

    OK = 0
    INPUT_ERROR = 2
    CERTIFICATION_FAILURE = 3


COMMANDS = {
    "generate": CommandType.GENERATE,
    "run": CommandType.RUN,
    "regions": CommandType.REGIONS,
    "check-penalty": CommandType.CHECK_PENALTY,
    "summarize": CommandType.SUMMARIZE,
}


def build_parser() -> argparse.ArgumentParser:
    """The `mopf` argument parser with one subcommand per CommandType."""
    parser = argparse.ArgumentParser(
        prog="mopf",
        description="Distributed multi-area DC-OPF over critical regions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="errors only")
    parser.add_argument("--plain", action="store_true", help="monochrome output")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    generate = commands.add_parser("generate", help="write a test case as JSON")
    generate.add_argument("spec", choices=[*GENERATORS, CUSTOM_SPEC])
    generate.add_argument("--seed", type=int, required=True, help="cost perturbation seed")
    generate.add_argument("-o", "--output", required=True, help="case file to write")
    generate.add_argument("--linear", action="store_true", help="drop quadratic costs")
    generate.add_argument("--stitch", help="stitch spec JSON for the custom case")

    run = commands.add_parser("run", help="run an experiment")
    run.add_argument("-c", "--config", required=True, help="experiment JSON")
    run.add_argument("--csv", action="store_true", help="also export traces as CSV")
    run.add_argument("--threads", type=int, help="worker threads for area evaluations")
    run.add_argument("-o", "--output", help="directory for traces and summary")

    regions = commands.add_parser("regions", help="enumerate critical regions over a box")
    regions.add_argument("case", help="case file")
    regions.add_argument(
        "--box", type=float, nargs="+", required=True, metavar="BOUND", help="LO HI per axis"
    )
    regions.add_argument("--grid", type=int, default=21, help="points per axis")
    regions.add_argument("--big-m", type=float, help="penalty weight M")
    regions.add_argument("--seed", type=int, default=0, help="seed for sampled points")
    regions.add_argument("-o", "--output", help="JSON report to write")

    check = commands.add_parser("check-penalty", help="compare hard and big-M area problems")
    check.add_argument("case", help="case file")
    check.add_argument("--theta", type=float, nargs="+", help="boundary angles, zero by default")
    check.add_argument("--big-m", type=float, help="penalty weight M")

    summarize = commands.add_parser("summarize", help="rebuild the summary from stored traces")
    summarize.add_argument("directory", help="run directory")
    summarize.add_argument("--write", action="store_true", help="overwrite summary.json")

    return parser


def _compact(case: NetworkCase) -> list[CompactAreaProblem]:
    return reduce_to_compact(build_dc_model(case))


async def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        async with aiofiles.open(path, "w") as f:
            await f.write(text)
    except OSError as e:
        raise TraceStoreError(f"cannot write {path}: {e}") from e


class CommandHandler:
    """Runs the parsed `mopf` subcommands."""

    def __init__(self, cli: CLIInterface, app_config: Config | None = None) -> None:
        """
        Initialize the command handler.

        Args:
            cli: CLI interface for output
            app_config: Environment configuration, the shared instance by default
        """
        self.cli = cli
        self.config = app_config or config

    def parse_command(self, args: argparse.Namespace) -> CommandType:
        return COMMANDS[args.command]

    async def handle(self, args: argparse.Namespace) -> int:
        """
        Handle a parsed command.

        Returns:
            Process exit code

        Raises:
            MopfError: Input problems, left to the caller to report
            CertificationError: After all artifacts are written, if a run is not certified
        """
        match self.parse_command(args):
            case CommandType.GENERATE:
                await self._handle_generate(args)
            case CommandType.RUN:
                await self._handle_run(args)
            case CommandType.REGIONS:
                await self._handle_regions(args)
            case CommandType.CHECK_PENALTY:
                await self._handle_check_penalty(args)
            case CommandType.SUMMARIZE:
                await self._handle_summarize(args)
        return ExitCode.OK

    async def _handle_generate(self, args: argparse.Namespace) -> None:
        if args.spec == CUSTOM_SPEC:
            if not args.stitch:
                raise ExperimentConfigError("the custom case needs --stitch SPEC.json")
            case = perturb_costs(load_stitch_spec(args.stitch), args.seed)
            if args.linear:
                case = with_linear_costs(case)
            provenance = Provenance(
                generator=CUSTOM_SPEC,
                seed=args.seed,
                version=__version__,
                extra={"stitch": case.name, "linear": args.linear},
            )
            case = case.model_copy(update={"provenance": provenance})
        else:
            case = GENERATORS[args.spec](args.seed, linear=args.linear)

        path = Path(args.output)
        await _write_text(path, serialize_case(case))
        self.cli.print_case(case)
        self.cli.print_message("success", f"Wrote {path}")

    def _output_dir(
        self, args: argparse.Namespace, name: str, base_dir: Path, given: str | None
    ) -> Path:
        if args.output:
            return Path(args.output)
        if given:
            return base_dir / given
        return self.config.output_dir / name

    async def _handle_run(self, args: argparse.Namespace) -> None:
        config_path = Path(args.config)
        experiment = load_experiment(config_path)
        base_dir = config_path.parent
        case = experiment.build_case(base_dir)
        self.cli.print_case(case)

        problems = await asyncio.to_thread(_compact, case)
        start = experiment.start_vector(problems[0].theta_dim, base_dir)
        threads = args.threads
        if threads is None and "threads" not in experiment.algo.model_fields_set:
            threads = self.config.threads
        settings = experiment.settings(self.config.tolerances, threads)

        with self.cli.create_spinner("Solving the centralized reference..."):
            reference = await asyncio.to_thread(
                solve_centralized, problems, None, settings.tolerances
            )
        dispatcher = MethodDispatcher(settings)
        if reference.optimal:
            dispatcher = dispatcher.with_reference(reference.objective)
        else:
            self.cli.print_message(
                "warning", f"Centralized reference {reference.status.value}; gaps are not reported"
            )

        store = TraceStore(
            self._output_dir(args, experiment.name or case.name, base_dir, experiment.output_dir)
        )
        logger.info(
            f"Experiment {config_path}: {experiment.ordered_methods} into {store.output_dir}"
        )
        traces = {}
        failed = []
        for name in experiment.ordered_methods:
            call = MethodCall(name=name, start=start)
            with self.cli.create_spinner(f"Running {name}..."):
                try:
                    result = await dispatcher.execute(problems, call)
                except MethodExecutionError as e:
                    self.cli.print_error(str(e))
                    failed.append(name)
                    continue
            self.cli.print_method_result(result)
            traces[name] = result.trace
            await store.save_trace(result.trace)
            if args.csv or experiment.csv:
                await store.save_csv(result.trace)
            if not result.certified:
                failed.append(name)

        if traces:
            summary = summary_from_traces(traces)
            await store.save_summary(summary)
            self.cli.print_summary(summary, title=f"{case.name} ({store.output_dir})")
        if failed:
            raise CertificationError(f"not certified: {', '.join(failed)}")

    async def _handle_regions(self, args: argparse.Namespace) -> None:
        if len(args.box) % 2:
            raise ExperimentConfigError(f"--box needs LO HI pairs, got {len(args.box)} numbers")
        box = np.asarray(args.box, dtype=float).reshape(-1, 2)
        case = load_case(args.case)
        problems = await asyncio.to_thread(_compact, case)
        penalized = [bigM_reformulate(problem, args.big_m) for problem in problems]
        with self.cli.create_spinner(f"Sweeping a {args.grid}-point grid..."):
            pieces = await asyncio.to_thread(
                enumerate_regions_bruteforce, penalized, box, args.grid, self.config.tolerances
            )

        rng = rng_from_seed(args.seed)
        regions = []
        for piece in pieces:
            center, radius = piece.chebyshev_center(box)
            samples = piece.interior_points(rng, REGION_SAMPLES, box)
            regions.append(
                {
                    "active_sets": {
                        str(component.area): list(component.working_set)
                        for component in piece.components
                    },
                    "center": center.tolist(),
                    "radius": radius,
                    "center_value": piece.value(center),
                    "degenerate": piece.degenerate,
                    "samples": [
                        {"theta": point.tolist(), "value": piece.value(point)} for point in samples
                    ],
                    "piece": piece.to_dict(),
                }
            )
        report: dict[str, Any] = {
            "case": case.name,
            "dimension": int(box.shape[0]),
            "box": box.tolist(),
            "grid": args.grid,
            "count": len(regions),
            "regions": regions,
        }
        self.cli.print_regions(report)
        if args.output:
            path = Path(args.output)
            await _write_text(path, json.dumps(report, indent=2) + "\n")
            self.cli.print_message("success", f"Wrote {path}")

    async def _handle_check_penalty(self, args: argparse.Namespace) -> None:
        case = load_case(args.case)
        problems = await asyncio.to_thread(_compact, case)
        dimension = problems[0].theta_dim
        theta = np.zeros(dimension) if args.theta is None else np.asarray(args.theta)
        if theta.size != dimension:
            raise ExperimentConfigError(
                f"--theta has {theta.size} entries, the case has {dimension} boundary angles"
            )
        reports = [
            verify_bigM_equivalence(problem, args.big_m, theta, tolerances=self.config.tolerances)
            for problem in problems
        ]
        self.cli.print_penalty_reports(reports)
        broken = [
            k for k, report in enumerate(reports) if report.feasible_theta and not report.equivalent
        ]
        if broken:
            raise CertificationError(f"big-M problem differs from the hard one in areas {broken}")
        if not all(report.feasible_theta for report in reports):
            self.cli.print_message("warning", "θ is infeasible for some areas; nothing to compare")

    async def _handle_summarize(self, args: argparse.Namespace) -> None:
        store = TraceStore(args.directory)
        summary = summary_from_traces(await store.load_all())
        self.cli.print_summary(summary, title=str(store.output_dir))
        if args.write:
            await store.save_summary(summary)
            self.cli.print_message("success", f"Wrote {store.summary_path}")

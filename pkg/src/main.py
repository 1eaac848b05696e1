"""Main entry point for the mopf command line."""

import asyncio
import sys
from collections.abc import Sequence

from .cli.commands import CommandHandler, ExitCode, build_parser
from .cli.interface import CLIInterface
from .cli.themes import default_theme, minimal_theme
from .utils.exceptions import CertificationError, MopfError
from .utils.logger import configure_debug_logging, configure_quiet_logging, get_logger

logger = get_logger(__name__)


async def run_cli(argv: Sequence[str] | None = None, cli: CLIInterface | None = None) -> int:
    """
    Parse arguments, run one command and map the outcome to an exit code.

    Args:
        argv: Arguments without the program name, sys.argv by default
        cli: Output interface, a fresh console by default

    Returns:
        0 on success, 2 for input errors, 3 for certification failures
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage and 0 for --help
        return int(e.code or 0)

    if args.verbose:
        configure_debug_logging()
    elif args.quiet:
        configure_quiet_logging()

    cli = cli or CLIInterface(theme=minimal_theme if args.plain else default_theme)
    handler = CommandHandler(cli)
    try:
        return int(await handler.handle(args))
    except CertificationError as e:
        cli.print_error(str(e))
        return ExitCode.CERTIFICATION_FAILURE
    except MopfError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        cli.print_error(str(e))
        return ExitCode.INPUT_ERROR


def main() -> None:
    """Entry point for the mopf console script."""
    try:
        sys.exit(asyncio.run(run_cli()))
    except KeyboardInterrupt:
        print("\nInterrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()

"""hazdispatch command-line interface.

CLI with stdout/stderr separation and fixed exit codes:
0 success, 1 usage, 2 configuration, 3 runtime.
"""

from __future__ import annotations

import logging
import sys
from functools import wraps
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple, TypeVar

import click

from .. import __version__
from ..core.config import PRESETS
from ..core.exceptions import (
    ConfigurationError,
    HazDispatchError,
    SolverError,
    ValidationError,
)
from ..core.policy import StrategyKind
from ..core.schema import (
    InstanceDocument,
    SolutionDocument,
    dump_document,
    load_document,
)
from ..core.vrpp import validate_solution
from ..solver import DEFAULT_BUDGET, solve_exact, solve_heuristic
from ..solver.exact import DEFAULT_SITE_LIMIT
from ..utils.rng import SOLVER, derive_rng
from .report import cmd_compare
from .runner import RunSpec, cmd_run

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

F = TypeVar("F", bound=Callable[..., Any])


class FlushingStreamHandler(logging.StreamHandler):  # type: ignore[type-arg]
    """StreamHandler that flushes after every emit for real-time output."""

    def emit(self, record: logging.LogRecord) -> None:
        super().emit(record)
        self.flush()


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    quiet: bool = False,
) -> logging.Logger:
    """Set up logging on the package logger.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional file path that always receives DEBUG output
        quiet: If True, suppress all log output to stderr

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger("hazdispatch")
    logger.setLevel(logging.DEBUG if log_file else level.upper())
    logger.handlers.clear()

    if not quiet:
        console = FlushingStreamHandler(sys.stderr)
        console.setLevel(level.upper())
        console.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(message)s",
            datefmt="%H:%M:%S",
        ))
        logger.addHandler(console)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        ))
        logger.addHandler(file_handler)

    return logger


def echo_stderr(message: str) -> None:
    """Echo to stderr (for diagnostics)."""
    click.echo(message, err=True)


def echo_stdout(message: str, flush: bool = True) -> None:
    """Echo to stdout (for primary output like objectives and paths)."""
    click.echo(message, err=False)
    if flush:
        sys.stdout.flush()


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigurationError, ValidationError)):
        return EXIT_CONFIG
    return EXIT_RUNTIME


def handle_errors(func: F) -> F:
    """Report usage, package and I/O errors on stderr and exit."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except click.UsageError as e:
            echo_stderr(f"Error: {e.format_message()}")
            sys.exit(EXIT_USAGE)
        except (HazDispatchError, OSError) as e:
            echo_stderr(f"Error: {e}")
            sys.exit(exit_code_for(e))

    return wrapper  # type: ignore[return-value]


class SeedRange(click.ParamType):
    """Inclusive seed range written A..B (a single N means N..N)."""

    name = "A..B"

    def convert(
        self,
        value: Any,
        param: Optional[click.Parameter],
        ctx: Optional[click.Context],
    ) -> Tuple[int, int]:
        if isinstance(value, tuple):
            return value
        text = str(value)
        lo, sep, hi = text.partition("..")
        try:
            first = int(lo)
            last = int(hi) if sep else first
        except ValueError:
            self.fail(f"'{text}' is not a seed range like 0..99", param, ctx)
        if first < 0 or last < first:
            self.fail(f"Seed range '{text}' is empty or negative", param, ctx)
        return first, last


def run_options(func: F) -> F:
    """Options shared by ``run`` and ``compare``."""
    options = [
        click.option(
            "--config", "config_path",
            type=click.Path(dir_okay=False, path_type=Path),
            help="Scenario YAML file",
        ),
        click.option(
            "--preset", type=click.Choice(sorted(PRESETS)),
            help="Built-in scenario [default: scenario1]",
        ),
        click.option(
            "--seed", type=click.IntRange(min=0),
            help="Single seed (shorthand for --seeds N..N)",
        ),
        click.option(
            "--seeds", type=SeedRange(),
            help="Inclusive seed range, e.g. 0..99",
        ),
        click.option(
            "--strategy", "strategies", multiple=True,
            type=click.Choice([k.value for k in StrategyKind]),
            help="Sensing strategy (repeatable)",
        ),
        click.option(
            "--out", "out_dir", type=click.Path(path_type=Path),
            default=Path("results"), show_default=True,
            help="Output directory",
        ),
        click.option(
            "--budget", type=click.IntRange(min=1),
            help="Heuristic restarts per routing solve",
        ),
        click.option(
            "--workers", type=click.IntRange(min=1), default=1,
            show_default=True, help="Parallel episode processes",
        ),
        click.option(
            "--format", "fmt", type=click.Choice(["json", "yaml"]),
            default="json", show_default=True,
            help="Summary file format",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_spec(
    config_path: Optional[Path],
    preset: Optional[str],
    seed: Optional[int],
    seeds: Optional[Tuple[int, int]],
    strategies: Tuple[str, ...],
    out_dir: Path,
    budget: Optional[int],
    workers: int,
    fmt: str,
    default_strategies: List[str],
) -> RunSpec:
    if seed is not None and seeds is not None:
        raise click.UsageError("Use either --seed or --seeds, not both")
    if config_path is not None and preset is not None:
        raise click.UsageError("Use either --config or --preset, not both")
    if seed is not None:
        seeds = (seed, seed)
    return RunSpec.from_options(
        config_path=config_path,
        preset=preset,
        seeds=seeds or (0, 0),
        strategies=list(strategies) or default_strategies,
        out_dir=out_dir,
        format=fmt,
        budget=budget,
        workers=workers,
    )


@click.group(invoke_without_command=True)
@click.option("--version", "-V", is_flag=True, help="Show version and exit")
@click.option(
    "--quiet", "-q", is_flag=True,
    help="Suppress all log output except errors"
)
@click.option(
    "--log-level", "-l",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"],
                      case_sensitive=False),
    default="INFO",
    help="Set logging verbosity [default: INFO]"
)
@click.option(
    "--log-file", type=click.Path(dir_okay=False),
    help="Write DEBUG logs to file in addition to stderr"
)
@click.pass_context
def cli(
    ctx: click.Context,
    version: bool,
    quiet: bool,
    log_level: str,
    log_file: Optional[str],
) -> None:
    """hazdispatch - hazard sensing and cleaning dispatch simulator.

    \b
    Quick start:
      hazdispatch run --preset scenario1 --seed 7
      hazdispatch compare --preset scenario3 --seeds 0..99 \\
          --strategy bucb --strategy random --strategy round_robin \\
          --strategy oracle
      hazdispatch solve instance.json --exact

    Run 'hazdispatch COMMAND --help' for command-specific help.
    """
    if version:
        echo_stdout(f"hazdispatch {__version__}")
        ctx.exit(EXIT_SUCCESS)

    setup_logging(log_level, log_file, quiet)

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@cli.command()
@run_options
@handle_errors
def run(
    config_path: Optional[Path],
    preset: Optional[str],
    seed: Optional[int],
    seeds: Optional[Tuple[int, int]],
    strategies: Tuple[str, ...],
    out_dir: Path,
    budget: Optional[int],
    workers: int,
    fmt: str,
) -> None:
    """Run episodes and write a trace and a summary per episode.

    \b
    Examples:
      hazdispatch run --preset scenario1 --seed 7
      hazdispatch run --config my.yml --seeds 0..9 --strategy random
    """
    spec = build_spec(
        config_path, preset, seed, seeds, strategies, out_dir,
        budget, workers, fmt, default_strategies=["bucb"],
    )
    for path in cmd_run(spec):
        echo_stdout(str(path))


@cli.command()
@run_options
@handle_errors
def compare(
    config_path: Optional[Path],
    preset: Optional[str],
    seed: Optional[int],
    seeds: Optional[Tuple[int, int]],
    strategies: Tuple[str, ...],
    out_dir: Path,
    budget: Optional[int],
    workers: int,
    fmt: str,
) -> None:
    """Compare strategies over a seed range and write a report.

    Without --strategy all four strategies are compared.
    """
    if len(strategies) == 1:
        echo_stderr("Error: compare needs at least two strategies")
        sys.exit(EXIT_USAGE)
    spec = build_spec(
        config_path, preset, seed, seeds, strategies, out_dir,
        budget, workers, fmt,
        default_strategies=[k.value for k in StrategyKind],
    )
    echo_stdout(str(cmd_compare(spec)))


def cmd_solve(
    instance_file: Path,
    exact: bool = False,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    site_limit: int = DEFAULT_SITE_LIMIT,
    out_path: Optional[Path] = None,
) -> Tuple[SolutionDocument, Path]:
    """Solve an instance file and write the solution next to it.

    Raises:
        ValidationError: if the file is not a valid instance document
        InstanceSizeError: if ``exact`` and the instance is too large
        SolverError: if the solution violates a constraint
    """
    doc = load_document(instance_file)
    if not isinstance(doc, InstanceDocument):
        raise ValidationError(
            f"{instance_file} holds a {doc.type} document, not an instance"
        )
    instance = doc.to_instance()

    if exact:
        solution = solve_exact(instance, site_limit=site_limit)
    else:
        solution = solve_heuristic(
            instance, derive_rng(seed, SOLVER), budget=budget
        )

    violations = validate_solution(instance, solution)
    if violations:
        raise SolverError(f"Infeasible solution: {violations}")

    out_path = out_path or instance_file.with_suffix(".solution.json")
    result = SolutionDocument(
        mode=instance.mode,
        solver="exact" if exact else "heuristic",
        routes=solution.routes,
        objective=solution.objective,
        seed=None if exact else seed,
        budget=None if exact else budget,
    )
    dump_document(result, out_path)
    return result, out_path


@cli.command()
@click.argument(
    "instance_file", type=click.Path(dir_okay=False, path_type=Path)
)
@click.option("--exact", is_flag=True, help="Force the exact solver")
@click.option(
    "--seed", type=click.IntRange(min=0), default=0, show_default=True,
    help="Heuristic seed",
)
@click.option(
    "--budget", type=click.IntRange(min=1), default=DEFAULT_BUDGET,
    show_default=True, help="Heuristic restarts",
)
@click.option(
    "--site-limit", type=click.IntRange(0, 12), default=DEFAULT_SITE_LIMIT,
    show_default=True, help="Largest instance the exact solver accepts",
)
@click.option(
    "--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
    help="Solution file [default: <instance>.solution.json]",
)
@handle_errors
def solve(
    instance_file: Path,
    exact: bool,
    seed: int,
    budget: int,
    site_limit: int,
    out_path: Optional[Path],
) -> None:
    """Solve a routing instance file and print the objective."""
    result, path = cmd_solve(
        instance_file, exact, seed, budget, site_limit, out_path
    )
    echo_stderr(f"Solution written to {path}")
    echo_stdout(f"{result.objective:.6f}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the CLI; returns the process exit code."""
    try:
        result = cli.main(args=argv, prog_name="hazdispatch",
                          standalone_mode=False)
    except click.UsageError as e:
        echo_stderr(f"Error: {e.format_message()}")
        return EXIT_USAGE
    except click.ClickException as e:
        echo_stderr(f"Error: {e.format_message()}")
        return e.exit_code
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        echo_stderr("Aborted")
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_RUNTIME
    except KeyboardInterrupt:
        echo_stderr("\nInterrupted")
        return 130  # 128 + SIGINT(2)
    return result if isinstance(result, int) else EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())

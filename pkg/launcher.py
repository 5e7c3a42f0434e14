from __future__ import annotations

from typing import Any, Callable, Optional, Sequence

import os
import sys
import random
import string
import logging
import traceback
import contextlib
from datetime import datetime

import click

from tool import SparseTool
from utils.tools import parse_vector
from utils.errors import SparseToolError, VerificationFailure
from analysis.report import Payload, render
from analysis.problem import STRUCTURES, load_instance
from analysis.conditions import CONDITIONS

import config

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@contextlib.contextmanager
def setup_logging(level: Optional[str] = None):
    log = logging.getLogger()
    previous = log.level

    os.makedirs(config.LOG_DIR, exist_ok=True)
    handler = logging.FileHandler(
        filename=os.path.join(
            config.LOG_DIR,
            f"sparsetool-{datetime.now().strftime('%Y-%m-%d~%H-%M-%S')}.log",
        ),
        encoding="utf-8",
        mode="w",
    )
    handler.setFormatter(
        logging.Formatter(
            "[{asctime}] [{levelname:<8}] {name}: {message}",
            "%Y-%m-%d %H:%M:%S",
            style="{",
        )
    )

    try:
        log.addHandler(handler)
        log.setLevel((level or config.LOG_LEVEL).upper())

        yield

    finally:
        log.removeHandler(handler)
        handler.close()
        log.setLevel(previous)


def report_crash(command: str, error: BaseException) -> str:
    os.makedirs(config.ERROR_LOG_DIR, exist_ok=True)

    file_name = os.path.join(
        config.ERROR_LOG_DIR,
        f"{command}-"
        f"{''.join(random.choices(string.ascii_letters + string.digits, k=10))}.log",
    )

    with open(file_name, "w", encoding="utf-8") as f:
        f.write("".join(traceback.format_exception(error)))

    return file_name


def io_options(func: Callable) -> Callable:
    func = click.option(
        "--output",
        "-o",
        default="-",
        show_default="standard output",
        type=click.Path(dir_okay=False, writable=True, allow_dash=True),
        help="Where to write the report.",
    )(func)
    return click.option(
        "--input",
        "-i",
        "input_path",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="Instance document (JSON).",
    )(func)


def run_options(func: Callable) -> Callable:
    options = [
        click.option(
            "--format",
            "fmt",
            type=click.Choice(["text", "json"]),
            default="text",
            show_default=True,
        ),
        click.option(
            "--kcap",
            type=click.IntRange(min=0),
            default=None,
            help="Largest support size to scan (default n).",
        ),
        click.option(
            "--samples",
            type=click.IntRange(min=1),
            default=config.DEFAULT_SAMPLES,
            show_default=True,
            help="Members sampled per family.",
        ),
        click.option(
            "--max-supports",
            type=click.IntRange(min=1),
            default=config.MAX_SUPPORTS,
            show_default=True,
        ),
        click.option(
            "--max-active-subsets",
            type=click.IntRange(min=1),
            default=config.MAX_ACTIVE_SUBSETS,
            show_default=True,
        ),
        click.option(
            "--seed",
            type=int,
            default=None,
            help="Reserved; the analysis is deterministic.",
        ),
        click.option(
            "--timings",
            is_flag=True,
            help="Add wall-clock seconds per stage to the report.",
        ),
    ]

    for _option in reversed(options):
        func = _option(func)

    return io_options(func)


def _build(options: dict[str, Any]) -> SparseTool:
    log = logging.getLogger()

    if options.get("seed") is not None:
        log.debug(f"Ignoring --seed {options['seed']}; no step is randomized.")

    tool = SparseTool(
        load_instance(options["input_path"]),
        kcap=options.get("kcap"),
        samples=options.get("samples"),
        max_supports=options.get("max_supports"),
        max_active_subsets=options.get("max_active_subsets"),
        timings=options.get("timings", False),
    )
    tool.log = log

    return tool


def _write(options: dict[str, Any], text: str) -> None:
    with click.open_file(options["output"], "w", encoding="utf-8") as f:
        f.write(text)


def _emit(options: dict[str, Any], payload: Payload) -> None:
    _write(options, render(payload, options["fmt"]))


@click.group(options_metavar="[options]")
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help=f"Run log level (default {config.LOG_LEVEL}).",
)
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str]):
    """Exact analysis of sparsest solutions of ||y - Ax|| <= eps, Bx <= b."""
    ctx.with_resource(setup_logging(log_level))


@main.command()
@run_options
def analyze(**options):
    """Full pipeline: enumeration, conditions, families and boundedness."""
    _emit(options, _build(options).analyze())


@main.command("enumerate")
@run_options
def enumerate_(**options):
    """Optimal value, optimal supports and the maximum active cardinality."""
    _emit(options, _build(options).enumerate())


@main.command()
@run_options
@click.option("--point", required=True, help='Comma separated, e.g. "0,1,-1/2,0".')
def classify(point: str, **options):
    """Multiplicity conditions at a sparsest point."""
    _emit(options, _build(options).classify(parse_vector(point)))


@main.command()
@run_options
@click.option("--point", required=True, help="Comma separated sparsest point.")
@click.option(
    "--condition",
    "label",
    required=True,
    type=click.Choice(CONDITIONS, case_sensitive=False),
)
@click.option("--direction", default=None, help="Comma separated, zero off supp x.")
def family(point: str, label: str, direction: Optional[str], **options):
    """Build and verify the families of one condition."""
    direction = None if direction is None else parse_vector(direction)
    _emit(options, _build(options).family(parse_vector(point), label, direction))


@main.command()
@run_options
def boundedness(**options):
    """Sufficient conditions for a bounded set of sparsest solutions."""
    _emit(options, _build(options).boundedness())


@main.command()
@run_options
def spark(**options):
    """Smallest number of linearly dependent columns of A."""
    _emit(options, _build(options).spark())


@main.command()
@run_options
@click.option("--point", required=True, help="Comma separated point.")
def check(point: str, **options):
    """Feasibility, support, active set and the stacked rank test of a point."""
    _emit(options, _build(options).check(parse_vector(point)))


@main.command()
@io_options
@click.option("--model", required=True, type=click.Choice(list(STRUCTURES)))
def structure(model: str, **options):
    """Print the instance with the rows of a structured sparsity model added."""
    tool = SparseTool(load_instance(options["input_path"]))
    _write(options, tool.structure(model))


def _command_name(argv: Sequence[str]) -> str:
    return next((_a for _a in argv if _a in main.commands), "sparsetool")


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    try:
        rv = main.main(args=argv, prog_name="sparsetool", standalone_mode=False)

    except click.ClickException as e:
        e.show()
        return 1

    except click.Abort:
        click.echo("Aborted.", err=True)
        return 1

    except SparseToolError as e:
        click.echo(f"Error: {e}", err=True)

        if isinstance(e, VerificationFailure):
            file_name = report_crash(_command_name(argv), e)
            click.echo(f"The traceback has been saved to {file_name}.", err=True)

        return e.exit_code

    except Exception as e:
        file_name = report_crash(_command_name(argv), e)
        click.echo(
            f"Unexpected error: {e}\nThe traceback has been saved to {file_name}.",
            err=True,
        )
        return 5

    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(run())

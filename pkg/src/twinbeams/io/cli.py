"""Command-line front end: ``run``, ``validate`` and ``sweep``.

Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
failure (a pipeline stage error or a residual past its threshold),
4 input/output failure.
"""

from __future__ import annotations

import copy
import dataclasses
import sys
from pathlib import Path

import click
import yaml

from .. import __version__
from .config import (
    FORMATS,
    ConfigError,
    config_from_dict,
    config_to_dict,
    parse_config,
    serialize_config,
)
from .exports import write_csv
from .pipeline import ENV_OUTPUT_DIR, PipelineError, resolve_output_dir, run_pipeline

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(source):
    try:
        return parse_config(source)
    except ConfigError as err:
        _fail(EXIT_VALIDATION, str(err))


def _override(cfg, fmt=None, pairs_tol=None, terms=None):
    try:
        if fmt is not None:
            cfg = dataclasses.replace(
                cfg, output=dataclasses.replace(cfg.output, format=fmt)
            )
        if pairs_tol is not None:
            cfg = dataclasses.replace(cfg, pairing_tol=pairs_tol)
        if terms is not None:
            cfg = dataclasses.replace(cfg, mehler_terms=terms)
    except ValueError as err:
        _fail(EXIT_VALIDATION, str(err))
    return cfg


_format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(FORMATS),
    default=None,
    help="Artifact format override (csv, json or both).",
)
_out_option = click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=None,
    help=f"Output directory (default: config value, then ${ENV_OUTPUT_DIR}, then CWD).",
)
_pairs_tol_option = click.option(
    "--pairs-tol",
    type=float,
    default=None,
    help="Relative gap below which consecutive eigenvalues count as a pair.",
)
_terms_option = click.option(
    "--terms",
    type=int,
    default=None,
    help="Mehler series truncation used by the analytic diagnostics.",
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="twinbeams")
def main():
    """Twin-beam squeezing spectra of pulsed type-I downconversion."""


@main.command()
@click.argument("config_source", metavar="CONFIG")
@_out_option
@_format_option
@_pairs_tol_option
@_terms_option
def run(config_source, out_dir, fmt, pairs_tol, terms):
    """Run the pipeline described by CONFIG (a path or a bundled name)."""
    cfg = _override(_load(config_source), fmt=fmt, pairs_tol=pairs_tol, terms=terms)
    try:
        report = run_pipeline(cfg, out_dir=out_dir)
    except PipelineError as err:
        _fail(EXIT_NUMERICAL, str(err))
    except OSError as err:
        _fail(EXIT_IO, str(err))
    for line in report.summary_lines():
        click.echo(line)
    out = resolve_output_dir(cfg, out_dir)
    click.echo(f"report: {out / 'report.json'}")
    if report.threshold_failures:
        _fail(
            EXIT_NUMERICAL,
            "residual thresholds violated: " + ", ".join(report.threshold_failures),
        )


@main.command()
@click.argument("config_source", metavar="CONFIG")
def validate(config_source):
    """Parse CONFIG and echo its fully resolved form."""
    cfg = _load(config_source)
    click.echo(serialize_config(cfg), nl=False)


def _set_path(tree: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown config path {dotted!r}")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"unknown config path {dotted!r}")
    node[keys[-1]] = value


@main.command()
@click.argument("config_source", metavar="CONFIG")
@click.option("--param", required=True, help="Dotted config path, e.g. pump.gain.")
@click.option(
    "--values", required=True, help="Comma-separated values substituted into --param."
)
@_out_option
@_format_option
@_pairs_tol_option
@_terms_option
def sweep(config_source, param, values, out_dir, fmt, pairs_tol, terms):
    """Run CONFIG once per value of --param and collect a summary table.

    Each point writes its artifacts to the subdirectory ``<param>=<value>``
    of the output directory; the table lands in ``sweep_summary.csv``.
    """
    base_cfg = _override(_load(config_source), fmt=fmt, pairs_tol=pairs_tol, terms=terms)
    base = config_to_dict(base_cfg)
    raw_values = [v.strip() for v in values.split(",") if v.strip()]
    if not raw_values:
        _fail(EXIT_VALIDATION, "--values is empty")
    root = resolve_output_dir(base_cfg, out_dir)

    rows = []
    any_failed = False
    for raw in raw_values:
        tree = copy.deepcopy(base)
        try:
            _set_path(tree, param, yaml.safe_load(raw))
            cfg = config_from_dict(tree)
        except ConfigError as err:
            _fail(EXIT_VALIDATION, str(err))
        except yaml.YAMLError as err:
            _fail(EXIT_VALIDATION, f"cannot parse value {raw!r}: {err}")
        sub = root / f"{param}={raw}".replace("/", "_")
        try:
            report = run_pipeline(cfg, out_dir=sub)
        except PipelineError as err:
            any_failed = True
            rows.append((raw, "", "", "", "", str(err)))
            click.echo(f"{param}={raw}: failed: {err}", err=True)
            continue
        except OSError as err:
            _fail(EXIT_IO, str(err))
        s = report.summary
        failures = ";".join(report.threshold_failures)
        any_failed = any_failed or bool(report.threshold_failures)
        rows.append(
            (
                raw,
                s.get("r1", ""),
                s.get("q_fit", ""),
                s.get("schmidt_number", ""),
                s.get("pairs_accepted", ""),
                failures,
            )
        )
        click.echo(
            f"{param}={raw}: r1={s.get('r1', float('nan')):.6g} "
            f"pairs={s.get('pairs_accepted', '-')}"
            + (f" [{failures}]" if failures else "")
        )

    try:
        root.mkdir(parents=True, exist_ok=True)
        summary_path = write_csv(
            root / "sweep_summary.csv",
            ["value", "r1", "q_fit", "schmidt_number", "pairs_accepted", "failures"],
            rows,
        )
    except OSError as err:
        _fail(EXIT_IO, str(err))
    click.echo(f"sweep summary: {summary_path}")
    if any_failed:
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()

"""Command line entry point: ``disperse-uc run`` and ``disperse-uc sweep``."""

from __future__ import annotations

import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click

from . import report as rpt
from .errors import ConfigError, DisperseError, DomainError
from .experiments import parse_config

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_COLUMNS = ["axis", "value", "status", "pass", "primary", "primary_value", "error"]


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, DomainError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def parse_value(text: str):
    """JSON literal if it parses, otherwise the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_key(raw: dict, key: str, value) -> None:
    """Assign ``value`` at a dotted path such as ``parameters.b``."""
    parts = key.split(".")
    node = raw
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot set '{key}': '{p}' is not an object")
        node = nxt
    node[parts[-1]] = value


def get_key(raw: dict, key: str):
    node = raw
    for p in key.split("."):
        if not isinstance(node, dict) or p not in node:
            return None
        node = node[p]
    return node


def load_config(path: str, overrides=()) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got '{item}'")
        k, v = item.split("=", 1)
        set_key(raw, k.strip(), parse_value(v))
    return raw


def thread_cap() -> int:
    env = os.environ.get("DISPERSE_UC_THREADS")
    if env is None or env == "":
        return os.cpu_count() or 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"DISPERSE_UC_THREADS must be a positive integer, got '{env}'") from None
    if n < 1:
        raise ConfigError(f"DISPERSE_UC_THREADS must be a positive integer, got '{env}'")
    return n


def _emit(report, output: str | None) -> None:
    if output:
        rpt.write_json(report, output)
    else:
        click.echo(rpt.dumps(report))


@click.group()
@click.version_option(rpt.ARTIFACT_VERSION)
def main():
    """Numerical checks for 1-D higher-order Schrodinger equations.

    Exit codes: 0 pass, 1 tolerance failure, 2 configuration error,
    3 numerical error.
    """


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a config entry; dotted keys reach into 'parameters'.")
@click.option("--output", default=None, help="JSON report path (default: config output_path or stdout).")
@click.option("--csv", "csv_path", default=None,
              help="Write the experiment's series as CSV. Columns are x,y for curve-type "
                   "experiments and A,B,theta,ratio for theta-transfer.")
def run(config_path, overrides, output, csv_path):
    """Run one experiment and write its JSON report."""
    try:
        cfg = parse_config(load_config(config_path, overrides))
        report, series = rpt.run_experiment(cfg)
    except DisperseError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(exit_code_for(e))
    _emit(report, output or cfg.output_path)
    if csv_path:
        rpt.write_csv(series, csv_path)
    sys.exit(EXIT_PASS if report["pass"] else EXIT_FAIL)


def _sweep_row(raw: dict, axis: str, value) -> dict:
    row = {"axis": axis, "value": value}
    try:
        cfg = parse_config(raw)
        report, _ = rpt.run_experiment(cfg)
    except DisperseError as e:
        row.update(status="config_error" if exit_code_for(e) == EXIT_CONFIG else "error", error=str(e))
        return row
    primary = report["primary"]
    row.update(status="pass" if report["pass"] else "fail", report=report, primary=primary,
               primary_value=report["results"][primary], **{"pass": report["pass"]})
    return row


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--axis", required=True, help="Dotted config key to vary, e.g. parameters.b or m.")
@click.option("--values", required=True, help="Comma separated values for the axis.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
@click.option("--output", default=None, help="JSON path for all reports plus the summary.")
@click.option("--csv", "csv_path", default=None,
              help="Summary CSV, one row per run with columns "
                   "axis,value,status,pass,primary,primary_value,error and a final summary row.")
def sweep(config_path, axis, values, overrides, output, csv_path):
    """Run a template config once per axis value.

    Rows run in parallel, capped by DISPERSE_UC_THREADS.
    """
    try:
        raw = load_config(config_path, overrides)
        vals = [parse_value(v.strip()) for v in values.split(",") if v.strip()]
        if not vals:
            raise ConfigError("--values is empty")
        current = get_key(raw, axis)
        if isinstance(current, (dict, list)):
            raise ConfigError(f"axis '{axis}' is not a scalar parameter")
        workers = min(thread_cap(), len(vals))
    except DisperseError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(exit_code_for(e))
    configs = []
    for v in vals:
        r = copy.deepcopy(raw)
        set_key(r, axis, v)
        configs.append(r)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, configs, [axis] * len(vals), vals))
    else:
        rows = [_sweep_row(c, axis, v) for c, v in zip(configs, vals)]
    summary = rpt.summarize([r.get("primary_value") for r in rows if "primary_value" in r])
    doc = {"axis": axis, "values": vals, "rows": rows, "summary": summary}
    _emit(doc, output)
    if csv_path:
        table = [dict(r) for r in rows]
        table.append({"axis": axis, "value": "summary", "status": "summary",
                      "primary": f"min={summary['min']} max={summary['max']}",
                      "primary_value": summary["ratio"]})
        rpt.write_csv(table, csv_path, SWEEP_COLUMNS)
    statuses = {r["status"] for r in rows}
    if "error" in statuses:
        sys.exit(EXIT_NUMERICAL)
    if "config_error" in statuses:
        sys.exit(EXIT_CONFIG)
    sys.exit(EXIT_FAIL if "fail" in statuses else EXIT_PASS)


if __name__ == "__main__":
    main()

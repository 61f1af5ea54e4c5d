"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 validation or usage error.
All output files land under the --out directory.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from . import configio, engine, scenarios
from .netmodel import NetworkConfig, NetworkValidationError, validate_network


def _fail(message: str, code: int):
    click.echo(message, err=True)
    sys.exit(code)


def _load_config(path: str) -> NetworkConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        _fail(f"cannot read config: {exc}", 1)
    try:
        return configio.parse_config(text)
    except (configio.ConfigParseError, configio.ConfigSchemaError) as exc:
        _fail(str(exc), 2)


def _validate(config: NetworkConfig):
    try:
        return validate_network(config)
    except NetworkValidationError as exc:
        _fail(str(exc), 2)


def _write_outputs(result: engine.SimulationResult, out: str,
                   formats: tuple[str, ...], figures: bool) -> None:
    try:
        configio.write_run_files(result.report, out, formats=formats,
                                 trace_rows=result.trace)
        if figures:
            from . import plots  # deferred: pulls in matplotlib

            plots.render_report_figures(result.report, out)
    except OSError as exc:
        _fail(f"cannot write outputs: {exc}", 1)


@click.group()
def main() -> None:
    """Event-driven link-level simulator for AFDX and avionics Ethernet."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(dir_okay=False), help="Network config file.")
@click.option("--seed", type=int, default=None, envvar="AVIONET_SEED",
              help="RNG seed; falls back to AVIONET_SEED, then the config.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]),
              default="both", show_default=True)
@click.option("--trace", is_flag=True, help="Also write a per-hop trace.csv.")
@click.option("--figures/--no-figures", default=True, show_default=True)
def simulate(config_path, seed, out_dir, fmt, trace, figures):
    """Run a simulation from a config file and write its report."""
    config = _load_config(config_path)
    net = _validate(config)
    result = engine.run(net, seed=seed, options=engine.RunOptions(trace=trace))
    formats = ("json", "csv") if fmt == "both" else (fmt,)
    _write_outputs(result, out_dir, formats, figures)
    click.echo(f"simulated {result.final_time_ns / 1e9:g} s "
               f"({result.event_count} events) -> {out_dir}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(dir_okay=False))
def validate(config_path):
    """Check a config file; exit 0 if valid, 2 with diagnostics otherwise."""
    config = _load_config(config_path)
    _validate(config)
    click.echo("configuration is valid")


@main.command()
@click.option("--name", required=True, type=click.Choice(["xu2019", "a350"]))
@click.option("--row", type=click.Choice(sorted(scenarios.XU2019_ROWS)),
              default=None, help="Worst-case row for the xu2019 scenario.")
@click.option("--periodicity", type=float, default=0.5, show_default=True,
              help="Message periodicity in ms for the a350 scenario.")
@click.option("--seed", type=int, default=None, envvar="AVIONET_SEED")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--trace", is_flag=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def scenario(name, row, periodicity, seed, out_dir, trace, figures):
    """Build and run a built-in scenario."""
    offsets = None
    if name == "xu2019":
        config = scenarios.xu2019_network()
        if row is not None:
            offsets = scenarios.xu2019_worst_case(row)
    else:
        params = scenarios.A350Params(
            periodicity_ms=periodicity,
            seed=seed if seed is not None else scenarios.A350Params().seed)
        config = scenarios.a350_network(params)
    net = _validate(config)
    result = engine.run(net, offsets=offsets, seed=seed,
                        options=engine.RunOptions(trace=trace))
    if name == "xu2019" and row is not None:
        target = scenarios.XU2019_ROWS[row].target_vl_id
        stats = dict(result.report.vls)[target]
        worst = stats.delay_us.max if stats.delay_us else float("nan")
        # headline rounded away from the 1 ns ordering-offset residue;
        # report files keep full precision
        click.echo(f"{name} {row} VL{target} worst delay: {round(worst, 2):.3f} us")
    else:
        click.echo(f"{name}: {sum(s.sent for _, s in result.report.vls)} messages, "
                   f"{result.event_count} events")
    if out_dir is not None:
        formats = ("json", "csv")
        _write_outputs(result, out_dir, formats, figures)
        click.echo(f"report written to {out_dir}")


@main.command()
@click.option("--name", required=True, type=click.Choice(["a350"]))
@click.option("--periodicities", default="0.5,1,2,3,4,5,6,7,8",
              show_default=True, help="Comma-separated list in ms.")
@click.option("--reps", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--seed", type=int, default=1, envvar="AVIONET_SEED")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Parallel runs; timings are annotated with this degree.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def bench(name, periodicities, reps, seed, jobs, out_dir):
    """Measure runtime scaling against the number of messages sent."""
    try:
        plist = [float(x) for x in periodicities.split(",") if x.strip()]
    except ValueError:
        _fail(f"bad periodicity list: {periodicities!r}", 2)
    if not plist:
        _fail("empty periodicity list", 2)

    result = bench_mod.run_bench(plist, reps=reps, seed=seed, jobs=jobs)
    out = Path(out_dir)
    from . import plots  # deferred: pulls in matplotlib
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(bench_mod.bench_csv_text(result))
        fit_obj = None
        if result.fit is not None:
            fit_obj = {"slope_min_per_packet": result.fit.slope,
                       "intercept_min": result.fit.intercept,
                       "r_squared": result.fit.r_squared}
        (out / "bench_fit.json").write_text(
            json.dumps({"fit": fit_obj, "jobs": jobs, "reps": reps},
                       indent=2, sort_keys=True) + "\n")
        plots.render_scaling_figure(
            [p.n_packets for p in result.points],
            [p.mean_runtime_min for p in result.points],
            result.fit, out / "scaling.png")
    except OSError as exc:
        _fail(f"cannot write outputs: {exc}", 1)

    for p in result.points:
        click.echo(f"periodicity {p.periodicity_ms:g} ms: {p.n_packets} messages, "
                   f"mean runtime {p.mean_runtime_s:.3f} s over {reps} reps")
    if result.fit is not None:
        click.echo(f"linear fit: runtime_min = {result.fit.slope:.3e} * n_packets "
                   f"+ {result.fit.intercept:.3f} (R2 = {result.fit.r_squared:.5f})")
    else:
        click.echo("fit skipped: need at least 3 distinct packet counts")


if __name__ == "__main__":
    main()

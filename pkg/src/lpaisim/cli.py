"""Command-line interface.

Global options (before the subcommand) pick the config file, seed, output
directory, and table format; each run writes its result tables plus a
manifest that `lpaisim replay` can re-execute byte-identically.

Exit codes: 0 success, 1 unexpected failure, 2 configuration/usage,
3 infeasible operating point, 4 fit failure, 5 degenerate or missing data.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from . import __version__
from .analysis import (
    allan_deviation,
    allan_slope,
    fit_chirped_gravity,
    fit_fringe,
    measured_phase_noise,
    noise_report,
    series_accelerations,
    short_term_sensitivity,
    sweep_data_rate,
)
from .config import (
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    with_data_rate,
)
from .engine import simulate_fringe_scan, simulate_gravity_scan, simulate_mid_fringe
from .errors import ConfigError, LpaiError
from .noise import total_shot_noise
from .output import (
    ALLAN_COLUMNS,
    SERIES_COLUMNS,
    SWEEP_COLUMNS,
    allan_rows,
    fit_to_dict,
    output_path,
    read_manifest,
    report_rows,
    series_rows,
    sweep_rows,
    write_json,
    write_manifest,
    write_table,
)


def _resolve_config(obj, rate=None):
    cfg = load_config(obj["config"]) if obj["config"] else default_config()
    if rate is not None:
        cfg = with_data_rate(cfg, rate)
    return cfg


def _echo(msg=""):
    click.echo(msg)


# --- command cores (shared by the subcommands and replay) ---------------------

def _run_simulate(cfg, seed, fmt, out_dir, mode="mid-fringe", shots=12000,
                  points=400):
    if mode == "mid-fringe":
        series = simulate_mid_fringe(cfg, shots=shots, seed=seed)
    elif mode == "fringe-scan":
        series = simulate_fringe_scan(cfg, points=points, seed=seed)
    else:
        raise ConfigError(f"unknown simulate mode {mode!r}")

    table = output_path(out_dir, "simulate", fmt)
    write_table(table, SERIES_COLUMNS, series_rows(series), fmt)
    outputs = [table]

    if mode == "fringe-scan":
        fit = fit_fringe(series.scan_values, series.populations)
        fit_path = output_path(out_dir, "fringe-fit", "json")
        write_json(fit_path, fit_to_dict(fit))
        outputs.append(fit_path)
        _echo(
            f"fringe fit: contrast {fit.contrast:.4f} +- {fit.sigma_contrast:.4f}, "
            f"offset {fit.offset:.4f}, phase origin {fit.phase_origin:.4f} rad"
        )
    else:
        dphi = measured_phase_noise(series)
        budget = total_shot_noise(cfg.noise, cfg.data_rate)
        sens = short_term_sensitivity(dphi, cfg)
        _echo(
            f"{shots} shots at {cfg.data_rate:g} Hz "
            f"(T = {cfg.timing.interrogation_T * 1e3:.4f} ms, "
            f"duty {cfg.timing.duty_cycle:.1%})"
        )
        _echo(
            f"phase noise: measured {dphi * 1e3:.2f} mrad/shot, "
            f"budget {budget * 1e3:.2f} mrad/shot"
        )
        _echo(f"short-term sensitivity: {sens * 1e6:.3f} ug/sqrt(Hz)")

    manifest = output_path(out_dir, "simulate-manifest", "json")
    write_manifest(
        manifest, "simulate", config_to_dict(cfg), series.seed,
        {"mode": mode, "shots": shots, "points": points}, fmt, outputs,
    )
    _echo(f"wrote {', '.join(outputs)} and {manifest}")
    return outputs


def _run_gravity(cfg, seed, fmt, out_dir, shots_per_point=1, include_linear=True):
    series = simulate_gravity_scan(cfg, seed=seed, shots_per_point=shots_per_point)
    fit = fit_chirped_gravity(
        series.scan_values, series.populations, cfg,
        include_linear_term=include_linear,
    )
    table = output_path(out_dir, "gravity-scan", fmt)
    write_table(table, SERIES_COLUMNS, series_rows(series), fmt)
    fit_path = output_path(out_dir, "gravity-fit", "json")
    write_json(fit_path, fit_to_dict(fit))
    outputs = [table, fit_path]

    true_g = cfg.physical.gravity
    _echo(
        f"gravity: {fit.gravity:.7f} +- {fit.sigma_gravity:.7f} m/s^2 "
        f"({fit.iterations} refinement steps)"
    )
    _echo(
        f"configured value {true_g:.7f} m/s^2, "
        f"offset {(fit.gravity - true_g) / fit.sigma_gravity:+.2f} sigma"
    )
    manifest = output_path(out_dir, "gravity-manifest", "json")
    write_manifest(
        manifest, "gravity", config_to_dict(cfg), series.seed,
        {"shots_per_point": shots_per_point, "include_linear": include_linear},
        fmt, outputs,
    )
    _echo(f"wrote {', '.join(outputs)} and {manifest}")
    return outputs


def _run_allan(cfg, seed, fmt, out_dir, shots=16384, overlapping=False):
    series = simulate_mid_fringe(cfg, shots=shots, seed=seed)
    accel = series_accelerations(series, in_g=True)
    curve = allan_deviation(
        accel, cfg.timing.cycle_time, overlapping=overlapping
    )
    table = output_path(out_dir, "allan", fmt)
    write_table(table, ALLAN_COLUMNS, allan_rows(curve), fmt)

    # Slope over the well-populated octaves only.
    solid = curve.taus[curve.bin_counts >= 16]
    slope = allan_slope(curve, tau_max=float(solid[-1]) if len(solid) else None)
    _echo(
        f"Allan deviation over {shots} shots at {cfg.data_rate:g} Hz "
        f"({'overlapping' if overlapping else 'non-overlapping'} estimator)"
    )
    _echo(
        f"sigma({curve.taus[0]:.3g} s) = {curve.sigmas[0] * 1e6:.3f} ug, "
        f"log-log slope {slope:+.3f}"
    )
    manifest = output_path(out_dir, "allan-manifest", "json")
    write_manifest(
        manifest, "allan", config_to_dict(cfg), series.seed,
        {"shots": shots, "overlapping": overlapping}, fmt, [table],
    )
    _echo(f"wrote {table} and {manifest}")
    return [table]


def _run_sweep(cfg, seed, fmt, out_dir, rates, mc_shots=10000):
    # The sweep draws per-rate run seeds from the root seed, so the root must
    # be pinned before it goes into the manifest.
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    result = sweep_data_rate(cfg, rates=rates, seed=seed, mc_shots=mc_shots)
    table = output_path(out_dir, "sweep", fmt)
    write_table(table, SWEEP_COLUMNS, sweep_rows(result), fmt)
    first, last = result.rows[0], result.rows[-1]
    _echo(f"swept {len(result.rows)} rates, {first.data_rate:g}"
          f" to {last.data_rate:g} Hz")
    for row in (first, last):
        measured = (
            f", measured {row.sensitivity_measured * 1e6:.3f}"
            if row.sensitivity_measured is not None
            else ""
        )
        _echo(
            f"  {row.data_rate:g} Hz: duty {row.duty_cycle:.1%}, budget "
            f"{row.sensitivity_budget * 1e6:.3f}{measured} ug/sqrt(Hz)"
        )
    manifest = output_path(out_dir, "sweep-manifest", "json")
    write_manifest(
        manifest, "sweep", config_to_dict(cfg), seed,
        {"rates": list(rates), "mc_shots": mc_shots}, fmt, [table],
    )
    _echo(f"wrote {table} and {manifest}")
    return [table]


def _run_noise_report(cfg, seed, fmt, out_dir):
    report = noise_report(cfg)
    table = output_path(out_dir, "noise-report", fmt)
    write_table(table, ("quantity", "value"), report_rows(report), fmt)
    _echo(
        f"known sources quadrature sum: "
        f"{report['known_quadrature_sum'] * 1e3:.2f} mrad/shot, "
        f"full budget {report['budget_total'] * 1e3:.2f} mrad/shot"
    )
    _echo(
        f"projection floor {report['projection_phase_noise'] * 1e3:.2f} mrad/shot "
        f"(budget/floor ratio {report['budget_to_projection_ratio']:.2f})"
    )
    _echo(
        f"sensitivity: budget {report['sensitivity_budget'] * 1e6:.3f}, "
        f"readout floor {report['sensitivity_readout_floor'] * 1e6:.3f} ug/sqrt(Hz)"
    )
    manifest = output_path(out_dir, "noise-report-manifest", "json")
    write_manifest(
        manifest, "noise-report", config_to_dict(cfg), seed, {}, fmt, [table]
    )
    _echo(f"wrote {table} and {manifest}")
    return [table]


# --- click wiring --------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="lpaisim")
@click.option("--config", type=click.Path(), default=None,
              help="YAML config file (defaults to the built-in operating point).")
@click.option("--seed", type=int, default=None,
              help="Root seed; omitted means a fresh one, recorded in the manifest.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Directory for result files.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True, help="Result table format.")
@click.pass_context
def cli(ctx, config, seed, out_dir, fmt):
    """Deterministic simulator for a high-data-rate cold-atom accelerometer."""
    ctx.obj = {"config": config, "seed": seed, "out_dir": out_dir, "fmt": fmt}


@cli.command()
@click.option("--mode", type=click.Choice(["mid-fringe", "fringe-scan"]),
              default="mid-fringe", show_default=True)
@click.option("--shots", type=int, default=12000, show_default=True,
              help="Shots for mid-fringe mode.")
@click.option("--points", type=int, default=400, show_default=True,
              help="Phase steps for fringe-scan mode.")
@click.option("--rate", type=float, default=None,
              help="Override the data rate (Hz); the cycle is re-derived.")
@click.pass_obj
def simulate(obj, mode, shots, points, rate):
    """Run a fixed-phase or phase-scan acquisition."""
    cfg = _resolve_config(obj, rate)
    _run_simulate(cfg, obj["seed"], obj["fmt"], obj["out_dir"],
                  mode=mode, shots=shots, points=points)


@cli.command()
@click.option("--shots-per-point", type=int, default=1, show_default=True)
@click.option("--include-linear/--no-include-linear", default=True,
              show_default=True,
              help="Model the finite-pulse linear phase term in the fit.")
@click.option("--rate", type=float, default=None,
              help="Override the data rate (Hz).")
@click.pass_obj
def gravity(obj, shots_per_point, include_linear, rate):
    """Scan interrogation time with the chirp off and fit gravity."""
    cfg = _resolve_config(obj, rate)
    _run_gravity(cfg, obj["seed"], obj["fmt"], obj["out_dir"],
                 shots_per_point=shots_per_point, include_linear=include_linear)


@cli.command()
@click.option("--shots", type=int, default=16384, show_default=True)
@click.option("--overlapping", is_flag=True, default=False,
              help="Use the overlapping estimator.")
@click.option("--rate", type=float, default=None,
              help="Override the data rate (Hz).")
@click.pass_obj
def allan(obj, shots, overlapping, rate):
    """Long acquisition and Allan-deviation analysis."""
    cfg = _resolve_config(obj, rate)
    _run_allan(cfg, obj["seed"], obj["fmt"], obj["out_dir"],
               shots=shots, overlapping=overlapping)


def _parse_rates(_ctx, _param, value):
    try:
        rates = tuple(float(r) for r in value.split(",") if r.strip())
    except ValueError as exc:
        raise click.BadParameter(f"bad rate list {value!r}") from exc
    if not rates:
        raise click.BadParameter("rate list is empty")
    return rates


@cli.command()
@click.option("--rates", callback=_parse_rates,
              default="50,100,150,200,250,300,330", show_default=True,
              help="Comma-separated data rates (Hz).")
@click.option("--mc-shots", type=int, default=10000, show_default=True,
              help="Monte-Carlo shots per rate (0 disables).")
@click.pass_obj
def sweep(obj, rates, mc_shots):
    """Sensitivity versus data rate, analytic and Monte-Carlo."""
    cfg = _resolve_config(obj)
    _run_sweep(cfg, obj["seed"], obj["fmt"], obj["out_dir"],
               rates=rates, mc_shots=mc_shots)


@cli.command("noise-report")
@click.option("--rate", type=float, default=None,
              help="Override the data rate (Hz).")
@click.pass_obj
def noise_report_cmd(obj, rate):
    """Phase-noise budget breakdown and readout floor."""
    cfg = _resolve_config(obj, rate)
    _run_noise_report(cfg, obj["seed"], obj["fmt"], obj["out_dir"])


_REPLAY_DISPATCH = {
    "simulate": _run_simulate,
    "gravity": _run_gravity,
    "allan": _run_allan,
    "sweep": _run_sweep,
    "noise-report": _run_noise_report,
}


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def replay(obj, manifest):
    """Re-execute a recorded run; outputs are byte-identical."""
    data = read_manifest(manifest)
    command = data["command"]
    runner = _REPLAY_DISPATCH.get(command)
    if runner is None:
        raise ConfigError(f"manifest command {command!r} is not replayable")
    cfg = config_from_dict(data["config"])
    options = {k: v for k, v in data.get("options", {}).items()}
    if "rates" in options:
        options["rates"] = tuple(options["rates"])
    runner(cfg, data.get("seed"), data.get("format", "csv"), obj["out_dir"],
           **options)


def main(argv=None):
    """Entry point with category-coded exit statuses."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(130)
    except LpaiError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    return 0


if __name__ == "__main__":
    main()

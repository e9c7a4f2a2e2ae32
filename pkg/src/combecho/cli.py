"""Command-line harness: run one scenario per invocation.

    combecho <command> --scenario <file> [--out <dir>] [--threads <n>]

Commands: spectrum, simulate, sweep, match, fit, compare.  The scenario
file must contain the matching command block.  Exit codes: 0 success,
2 validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .dynamics import auto_grid, detect_echoes, integrate
from .errors import NumericalError, ValidationError
from .matching import fit_device, optimize_kappa, sweep_detuning, _with_kappa
from .model import FREQUENCY_SCALE, Grid, median_spacing, validate_config
from .scenario import COMMANDS, Scenario, load_scenario, write_csv_atomic, write_json
from .spectral import sample_response


def _echo_report(scenario: Scenario, config, grid=None, pulse=None):
    pulse = pulse if pulse is not None else scenario.pulse
    period = 1.0 / median_spacing(config.minis)
    if grid is None:
        grid, pulse = auto_grid(config, pulse)
    trace = integrate(config, pulse, grid)
    t0 = pulse.center_time
    report = detect_echoes(
        trace,
        input_window=(max(grid.t_start, t0 - 0.5 * period), t0 + 0.5 * period),
        expected_period=period,
    )
    return trace, report, t0


def _events_payload(report, t0):
    return {
        "input_energy": report.input_energy,
        "reflected_fraction": report.reflected_fraction,
        "events": [
            {"k": e.k, "peak_time_us": e.peak_time, "delay_us": e.peak_time - t0, "efficiency": e.efficiency}
            for e in report.events
        ],
    }


def _run_spectrum(scenario: Scenario) -> str:
    omega_max = scenario.options["omega_max"]
    if not omega_max:
        span = float(np.max(np.abs(scenario.device.detunings()), initial=0.0))
        omega_max = 1.5 * FREQUENCY_SCALE * max(span, 1.0)
    response = sample_response(scenario.device, omega_max, scenario.options["n_points"])
    out = scenario.out_dir / "spectrum.csv"
    write_csv_atomic(out, response.to_csv)
    dip = float(np.min(np.abs(response.reflection) ** 2))
    note = f" ({'; '.join(response.warnings)})" if response.warnings else ""
    return f"spectrum: min |r|^2 = {dip:.6g} over +-{omega_max:.6g} rad/us -> {out}{note}"


def _run_simulate(scenario: Scenario) -> str:
    config = scenario.device
    pulse = scenario.pulse
    grid = None
    t_end, dt = scenario.options["t_end"], scenario.options["dt"]
    if t_end or dt:
        base, pulse = auto_grid(config, pulse)
        grid = Grid(t_start=0.0, t_end=t_end or base.t_end, dt=dt or base.dt)
    trace, report, t0 = _echo_report(scenario, config, grid=grid, pulse=pulse)
    trace_path = scenario.out_dir / "trace.csv"
    echo_path = scenario.out_dir / "echoes.json"
    write_csv_atomic(trace_path, trace.to_csv)
    write_json(echo_path, _events_payload(report, t0))
    eta1 = report.efficiency(1)
    delay = next((e.peak_time - t0 for e in report.events if e.k == 1), math.nan)
    return (
        f"simulate: eta1={eta1:.6g} echo_delay={delay * 1e3:.6g} ns "
        f"reflected={report.reflected_fraction:.6g} -> {trace_path} {echo_path}"
    )


def _run_sweep(scenario: Scenario, threads: int) -> str:
    result = sweep_detuning(
        scenario.device,
        scenario.pulse,
        scenario.options["deltas"],
        reoptimize_kappa=scenario.options["reoptimize_kappa"],
        dt_per_period=scenario.options["dt_per_period"] or None,
        threads=threads,
    )
    csv_path = scenario.out_dir / "sweep.csv"
    json_path = scenario.out_dir / "sweep.json"
    write_csv_atomic(csv_path, result.to_csv)
    write_json(
        json_path,
        {
            "parameter": result.parameter,
            "points": [
                {
                    "delta_mhz": p.delta,
                    "echo_time_ns": p.echo_time * 1e3,
                    "eta_first": p.eta_first,
                    "eta_analytic": p.eta_analytic,
                    "reflected_fraction": p.reflected_fraction,
                    "kappa_mhz": p.kappa,
                    "coupling_mhz": p.coupling,
                }
                for p in result.points
            ],
        },
    )
    etas = ", ".join(f"{p.eta_first:.3f}" for p in result.points)
    return f"sweep: {len(result.points)} points, eta_first = [{etas}] -> {csv_path} {json_path}"


def _run_match(scenario: Scenario) -> str:
    result = optimize_kappa(scenario.device, scenario.pulse, bounds=scenario.options["bounds"])
    path = scenario.out_dir / "match.json"
    write_json(
        path,
        {
            "kappa_opt": result.kappa_opt,
            "kappa_analytic": result.kappa_analytic,
            "eta_opt": result.eta_opt,
            "reflected_fraction": result.reflected_fraction_at_opt,
            "evaluations": result.evaluations,
            "unimodal": result.unimodal,
        },
    )
    return (
        f"match: kappa_opt={result.kappa_opt:.6g} (analytic {result.kappa_analytic:.6g}) "
        f"eta_opt={result.eta_opt:.6g} reflected={result.reflected_fraction_at_opt:.6g} -> {path}"
    )


def _run_fit(scenario: Scenario) -> str:
    result = fit_device(
        scenario.options["target_eta"],
        scenario.options["target_echo_time"],
        scenario.options["free"],
        scenario.device,
        pulse=None,
        budget=scenario.options["budget"],
    )
    path = scenario.out_dir / "fit.json"
    write_json(
        path,
        {
            "recovered": result.recovered(),
            "residual": result.residual,
            "evaluations": result.evaluations,
            "converged": result.converged,
        },
    )
    rec = result.recovered()
    return (
        f"fit: residual={result.residual:.3g} g={rec['g']:.4g} gamma={rec['gamma']:.4g} "
        f"({result.evaluations} simulations) -> {path}"
    )


def _run_compare(scenario: Scenario) -> str:
    config = scenario.device
    match = optimize_kappa(config, scenario.pulse)
    multiplier = scenario.options["open_multiplier"]
    variants = {
        "matched": _with_kappa(config, match.kappa_opt),
        "open": _with_kappa(config, multiplier * match.kappa_opt),
    }
    payload: dict = {"open_multiplier": multiplier, "kappa_matched": match.kappa_opt}
    ratios = {}
    for name, cfg in variants.items():
        trace, report, t0 = _echo_report(scenario, cfg)
        write_csv_atomic(scenario.out_dir / f"trace_{name}.csv", trace.to_csv)
        eta1, eta2 = report.efficiency(1), report.efficiency(2)
        ratios[name] = (eta2 / eta1) if eta1 > 0 else math.inf
        payload[name] = {
            "kappa": cfg.common.kappa,
            "eta1": eta1,
            "eta2": eta2,
            "reflected_fraction": report.reflected_fraction,
        }
    payload["checks"] = {
        "matched_second_echo_suppressed": bool(ratios["matched"] < ratios["open"]),
        "matched_reflection_suppressed": bool(
            payload["matched"]["reflected_fraction"] < payload["open"]["reflected_fraction"]
        ),
    }
    path = scenario.out_dir / "comparison.json"
    write_json(path, payload)
    ok = payload["checks"]
    return (
        f"compare: matched eta1={payload['matched']['eta1']:.4g} "
        f"second-echo ratios matched/open = {ratios['matched']:.4g}/{ratios['open']:.4g}, "
        f"checks={'pass' if all(ok.values()) else 'FAIL'} -> {path}"
    )


def run_scenario(path, command: str | None = None, out_dir=None, threads: int = 1) -> int:
    """Execute a scenario file; returns the process exit code."""
    try:
        scenario = load_scenario(path, out_dir=out_dir)
        if command is not None and scenario.command != command:
            raise ValidationError(
                f"scenario declares the '{scenario.command}' command, invoked as '{command}'"
            )
        validate_config(scenario.device)
        if scenario.command == "spectrum":
            summary = _run_spectrum(scenario)
        elif scenario.command == "simulate":
            summary = _run_simulate(scenario)
        elif scenario.command == "sweep":
            summary = _run_sweep(scenario, threads)
        elif scenario.command == "match":
            summary = _run_match(scenario)
        elif scenario.command == "fit":
            summary = _run_fit(scenario)
        else:
            summary = _run_compare(scenario)
    except ValidationError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write artifacts: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    print(summary)
    return 0


def compare_matched_open(path, out_dir=None, threads: int = 1) -> int:
    """Run a compare scenario: matched vs open coupling, paired artifacts."""
    return run_scenario(path, command="compare", out_dir=out_dir, threads=threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="combecho",
        description="Multiresonator photon-echo memory simulator",
    )
    parser.add_argument("--version", action="version", version=f"combecho {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a '{name}' scenario")
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", default=None, help="artifact directory (overrides the scenario)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    args = parser.parse_args(argv)
    code = run_scenario(args.scenario, command=args.command, out_dir=args.out, threads=args.threads)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()

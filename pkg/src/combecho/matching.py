"""Numerical impedance matching, detuning sweeps and parameter fitting.

The figure of merit throughout is the simulated first-echo efficiency;
reflection suppression at the optimum comes out as a byproduct of the
matching, and both are reported.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import analytics
from .dynamics import auto_grid, detect_echoes, integrate
from .errors import ValidationError
from .model import DeviceConfig, CommonResonator, Grid, Pulse, build_uniform_comb, median_spacing, validate_config

__all__ = [
    "MatchResult",
    "SweepPoint",
    "SweepResult",
    "FitResult",
    "optimize_kappa",
    "sweep_detuning",
    "fit_device",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MatchResult:
    """Outcome of the kappa search."""

    kappa_opt: float
    eta_opt: float
    kappa_analytic: float
    reflected_fraction_at_opt: float
    evaluations: int
    unimodal: bool
    bounds: tuple[float, float]


@dataclass(frozen=True)
class SweepPoint:
    delta: float
    eta_first: float
    echo_time: float
    reflected_fraction: float
    eta_analytic: float
    kappa: float
    coupling: float


@dataclass(frozen=True)
class SweepResult:
    """Per-spacing records of a detuning sweep."""

    parameter: str
    values: tuple[float, ...]
    points: tuple[SweepPoint, ...]

    def to_csv(self, path) -> None:
        """Write columns delta_mhz, echo_time_ns, eta_first, eta_analytic, reflected_fraction."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("delta_mhz,echo_time_ns,eta_first,eta_analytic,reflected_fraction\n")
            for p in self.points:
                fh.write(
                    f"{p.delta:.12g},{p.echo_time * 1e3:.12g},{p.eta_first:.12g},"
                    f"{p.eta_analytic:.12g},{p.reflected_fraction:.12g}\n"
                )


@dataclass(frozen=True)
class FitResult:
    config: DeviceConfig
    residual: float
    evaluations: int
    converged: bool

    def recovered(self) -> dict[str, float]:
        c = self.config
        return {
            "g": float(np.mean(c.couplings())) if c.n else 0.0,
            "gamma": float(np.mean(c.decay_rates())) if c.n else 0.0,
            "gamma_r": c.common.decay_rate,
            "kappa": c.common.kappa,
        }


def _with_kappa(config: DeviceConfig, kappa: float) -> DeviceConfig:
    return DeviceConfig(config.minis, replace(config.common, kappa=kappa))


def _echo_run(config: DeviceConfig, pulse: Pulse, grid: Grid | None = None):
    """Integrate on the default grid and score; returns (eta1, report)."""
    spacing = median_spacing(config.minis)
    period = 1.0 / spacing
    if grid is None:
        grid, pulse = auto_grid(config, pulse)
    trace = integrate(config, pulse, grid)
    t0 = pulse.center_time
    report = detect_echoes(
        trace,
        input_window=(max(grid.t_start, t0 - 0.5 * period), t0 + 0.5 * period),
        expected_period=period,
    )
    return report.efficiency(1), report


def optimize_kappa(
    config: DeviceConfig,
    pulse: Pulse,
    bounds: tuple[float, float] | None = None,
) -> MatchResult:
    """Maximise the first-echo efficiency over the port coupling.

    Golden-section search on log(kappa) down to a relative interval of
    1e-3.  When the three-point bracket (bounds plus their geometric mean)
    does not look unimodal, the search falls back to a 64-point log-spaced
    scan with local refinement and the result is flagged.
    """
    validate_config(config)
    summary = analytics.summarize_comb(config)
    kappa0 = analytics.kappa_matched(summary, config.common.decay_rate)
    if bounds is None:
        bounds = (kappa0 / 10.0, 10.0 * kappa0)
    lo, hi = bounds
    if not (0.0 < lo < hi):
        raise ValidationError(f"kappa bounds must be positive and ordered, got {bounds}")
    if not (lo <= kappa0 <= hi):
        warnings.warn(
            f"search bounds {bounds} do not bracket the analytic matching "
            f"kappa_0 = {kappa0:.4g}",
            stacklevel=2,
        )

    cache: dict[float, float] = {}

    def eta(kappa: float) -> float:
        if kappa not in cache:
            cache[kappa], _ = _echo_run(_with_kappa(config, kappa), pulse)
        return cache[kappa]

    mid = math.sqrt(lo * hi)
    unimodal = eta(mid) >= max(eta(lo), eta(hi))

    if unimodal:
        a, b = math.log(lo), math.log(hi)
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        while b - a > 1e-3:
            if eta(math.exp(c)) > eta(math.exp(d)):
                b = d
            else:
                a = c
            c = b - _INVPHI * (b - a)
            d = a + _INVPHI * (b - a)
        kappa_opt = math.exp(0.5 * (a + b))
    else:
        grid_k = np.geomspace(lo, hi, 64)
        etas = [eta(float(k)) for k in grid_k]
        i = int(np.argmax(etas))
        a = math.log(grid_k[max(0, i - 1)])
        b = math.log(grid_k[min(len(grid_k) - 1, i + 1)])
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        while b - a > 1e-3:
            if eta(math.exp(c)) > eta(math.exp(d)):
                b = d
            else:
                a = c
            c = b - _INVPHI * (b - a)
            d = a + _INVPHI * (b - a)
        kappa_opt = math.exp(0.5 * (a + b))

    eta_opt, report = _echo_run(_with_kappa(config, kappa_opt), pulse)
    return MatchResult(
        kappa_opt=kappa_opt,
        eta_opt=eta_opt,
        kappa_analytic=kappa0,
        reflected_fraction_at_opt=report.reflected_fraction,
        evaluations=len(cache) + 1,
        unimodal=unimodal,
        bounds=bounds,
    )


def sweep_detuning(
    template: DeviceConfig,
    pulse: Pulse,
    deltas,
    reoptimize_kappa: bool = False,
    dt_per_period: float | None = None,
    threads: int = 1,
) -> SweepResult:
    """Rebuild the comb at each spacing and measure echo time and efficiency.

    Each point is the template device rescaled to the new spacing: the
    comb is rebuilt with the coupling and the pulse width scaled by
    delta/delta_ref, which keeps the matching quality and the
    pulse-to-comb bandwidth ratio fixed across the sweep so the only trend
    left is the decay over the storage time.  Tooth decay, cavity loss and
    amplitude are taken from the template unchanged.  kappa is re-optimised
    per point when requested, otherwise set to the analytic matching
    kappa_0(delta).

    dt_per_period overrides the integration step as a fraction of the
    rephasing period 1/delta (the default grid rule otherwise).
    """
    validate_config(template)
    deltas = [float(d) for d in deltas]
    if any(d <= 0.0 for d in deltas):
        raise ValidationError("sweep spacings must be positive")
    n = template.n
    if n < 2:
        raise ValidationError("sweep needs a template comb with >= 2 teeth")
    delta_ref = median_spacing(template.minis)
    g_ref = float(np.mean(template.couplings()))
    gamma = float(np.mean(template.decay_rates()))
    gamma_r = template.common.decay_rate

    def run_point(delta: float) -> SweepPoint:
        scale = delta / delta_ref
        minis = build_uniform_comb(n, delta, g_ref * scale, gamma)
        summary_point = analytics.CombSummary(
            g_bar=g_ref * scale, gamma_bar=gamma, delta_bar=delta, n_teeth=n
        )
        kappa = analytics.kappa_matched(summary_point, gamma_r)
        config = DeviceConfig(
            minis, CommonResonator(kappa=kappa, detuning=template.common.detuning, decay_rate=gamma_r)
        )
        pulse_point = replace(pulse, power_fwhm=pulse.power_fwhm / scale)
        if reoptimize_kappa:
            match = optimize_kappa(config, pulse_point)
            config = _with_kappa(config, match.kappa_opt)
            kappa = match.kappa_opt
        period = 1.0 / delta
        grid = None
        if dt_per_period is not None:
            t0 = 5.0 * pulse_point.power_fwhm
            grid = Grid(t_start=0.0, t_end=t0 + 2.5 * period, dt=dt_per_period * period)
            pulse_run = replace(pulse_point, center_time=t0)
        else:
            grid, pulse_run = auto_grid(config, pulse_point)
        eta1, report = _echo_run(config, pulse_run, grid)
        event_time = next((e.peak_time for e in report.events if e.k == 1), math.nan)
        t_in = pulse_run.center_time
        return SweepPoint(
            delta=delta,
            eta_first=eta1,
            echo_time=event_time - t_in,
            reflected_fraction=report.reflected_fraction,
            eta_analytic=analytics.eta_matched(summary_point, gamma_r),
            kappa=kappa,
            coupling=g_ref * scale,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(run_point, deltas))
    else:
        points = [run_point(d) for d in deltas]
    return SweepResult(parameter="delta_mhz", values=tuple(deltas), points=tuple(points))


_FIT_BOUNDS = {
    "g": (0.5, 40.0),
    "gamma": (1e-5, 20.0),
    "gamma_r": (1e-6, 20.0),
    "kappa": (1e-3, 400.0),
}


def fit_device(
    target_eta: float,
    target_echo_time: float,
    free,
    fixed: DeviceConfig,
    pulse: Pulse | None = None,
    budget: int = 500,
) -> FitResult:
    """Recover device parameters that reproduce a measured operating point.

    The spacing is pinned by the echo time (delta = 1/target_echo_time and
    the comb is rebuilt uniform); the parameters named in `free` (subset of
    g, gamma, gamma_r, kappa) then descend coordinate-wise on the squared
    efficiency mismatch, each line search a golden section in log space
    with tolerances tightening per sweep.  All teeth stay identical.  When
    kappa is not free it tracks the analytic matching of each candidate.
    """
    free = list(free)
    unknown = [p for p in free if p not in _FIT_BOUNDS]
    if unknown:
        raise ValidationError(f"unknown fit parameters: {unknown}")
    if not (target_eta >= 0.0 and target_echo_time > 0.0):
        raise ValidationError("fit targets must be positive (eta may be 0)")
    validate_config(fixed)
    delta = 1.0 / target_echo_time
    n = max(fixed.n, 2)

    params = {
        "g": float(np.mean(fixed.couplings())) if fixed.n else delta,
        "gamma": float(np.mean(fixed.decay_rates())) if fixed.n else 1e-3,
        "gamma_r": fixed.common.decay_rate,
        "kappa": fixed.common.kappa,
    }
    for name in free:
        lo, hi = _FIT_BOUNDS[name]
        params[name] = min(max(params[name], lo), hi)

    evaluations = 0

    def build(p: dict[str, float]) -> DeviceConfig:
        minis = build_uniform_comb(n, delta, p["g"], p["gamma"])
        kappa = p["kappa"]
        if "kappa" not in free:
            summary = analytics.CombSummary(g_bar=p["g"], gamma_bar=p["gamma"], delta_bar=delta, n_teeth=n)
            kappa = analytics.kappa_matched(summary, p["gamma_r"])
        return DeviceConfig(minis, CommonResonator(kappa=kappa, decay_rate=p["gamma_r"]))

    if pulse is None:
        width = (n - 1) * math.pi * delta
        pulse = Pulse(power_fwhm=4.0 * math.log(2.0) / width)

    def objective(p: dict[str, float]) -> float:
        nonlocal evaluations
        evaluations += 1
        eta1, _ = _echo_run(build(p), pulse)
        return (eta1 - target_eta) ** 2

    best = objective(params)
    tol_target = 1e-8
    for tol in (2e-2, 2e-3, 2e-4, 2e-5):
        if best < tol_target or evaluations >= budget:
            break
        for name in free:
            if best < tol_target or evaluations >= budget:
                break
            lo, hi = _FIT_BOUNDS[name]
            a, b = math.log(lo), math.log(hi)
            c = b - _INVPHI * (b - a)
            d = a + _INVPHI * (b - a)

            def line(x: float) -> float:
                trial = dict(params)
                trial[name] = math.exp(x)
                return objective(trial)

            fc, fd = line(c), line(d)
            while b - a > tol and evaluations < budget:
                if fc < fd:
                    b, d, fd = d, c, fc
                    c = b - _INVPHI * (b - a)
                    fc = line(c)
                else:
                    a, c, fc = c, d, fd
                    d = a + _INVPHI * (b - a)
                    fd = line(d)
            params[name] = math.exp(0.5 * (a + b))
            best = objective(params)

    residual = math.sqrt(best)
    return FitResult(
        config=build(params),
        residual=residual,
        evaluations=evaluations,
        converged=residual < 1e-3,
    )

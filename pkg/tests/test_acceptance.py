"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured numbers (run with -s to see them all)."""

import numpy as np

from combecho import (
    CombSummary,
    Grid,
    Pulse,
    auto_grid,
    detect_echoes,
    eta_matched,
    fit_device,
    integrate,
    kappa_matched,
    matched_pulse,
    optimize_kappa,
    reflection_center,
    respond_pulse,
    summarize_comb,
    sweep_detuning,
)
from combecho.cli import compare_matched_open
from combecho.matching import _with_kappa
from combecho.model import RATE_SCALE

from conftest import make_device


def report(number, ok, detail):
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {number}: {detail}"


def test_criterion_1_closed_form_efficiency():
    summary = CombSummary(g_bar=4.0, gamma_bar=1e-3, delta_bar=4.0, n_teeth=5)
    eta = eta_matched(summary, gamma_r=1e-3)
    ok = abs(eta - 0.9985) <= 0.0010
    report(1, ok, f"matched-coupling estimate at g=delta=4, losses 1e-3: eta={eta:.6f} (want 0.9985 +- 0.0010)")


def test_criterion_2_echo_timing():
    config = make_device(5, 13.0, 13.0, gamma=1e-3, gamma_r=1e-3)
    fwhm = matched_pulse(config.minis).power_fwhm
    dt = 6e-4
    period = 1.0 / 13.0
    pulse = Pulse(amplitude=1.0, center_time=5 * fwhm, power_fwhm=fwhm)
    grid = Grid(t_start=0.0, t_end=pulse.center_time + 2.5 * period, dt=dt)
    trace = integrate(config, pulse, grid)
    rep = detect_echoes(
        trace, (pulse.center_time - period / 2, pulse.center_time + period / 2), period
    )
    delay = rep.events[0].peak_time - pulse.center_time
    ok = abs(delay - period) <= dt
    report(
        2,
        ok,
        f"first echo at {delay * 1e3:.3f} ns vs 1/spacing = {period * 1e3:.3f} ns "
        f"(grid step {dt * 1e3:.2f} ns)",
    )


def test_criterion_3_detuning_sweep():
    template = make_device(5, 13.0, 13.0, gamma=0.02, gamma_r=1e-3)
    pulse = matched_pulse(template.minis)
    deltas = [4.0, 6.0, 8.0, 10.0, 12.0, 13.0, 15.0]
    dt_per_period = 0.0079
    result = sweep_detuning(template, pulse, deltas, dt_per_period=dt_per_period)
    timing_ok = all(
        abs(p.echo_time - 1.0 / p.delta) <= dt_per_period / p.delta for p in result.points
    )
    times_ns = [p.echo_time * 1e3 for p in result.points]
    span_ok = abs(times_ns[0] - 250.0) < 3.0 and abs(times_ns[-1] - 66.7) < 1.0
    by_time = sorted(result.points, key=lambda p: p.echo_time)
    etas = [p.eta_first for p in by_time]
    monotone_ok = all(a > b for a, b in zip(etas, etas[1:]))
    ok = timing_ok and span_ok and monotone_ok
    report(
        3,
        ok,
        f"echo times {['%.1f' % t for t in times_ns]} ns (timing within one step: {timing_ok}, "
        f"span {times_ns[0]:.1f}->{times_ns[-1]:.1f} ns: {span_ok}); "
        f"eta falls with storage time: {monotone_ok} ({['%.3f' % e for e in etas]})",
    )


def test_criterion_4_impedance_matching(helium_device, helium_pulse):
    result = optimize_kappa(helium_device, helium_pulse)
    summary = summarize_comb(helium_device)
    eta_formula = eta_matched(summary, 1e-3)
    r_at_k0 = reflection_center(summary, kappa_matched(summary, 1e-3), 1e-3)
    refl_ok = result.reflected_fraction_at_opt < 0.02
    eta_ok = abs(result.eta_opt - eta_formula) <= 0.05
    exact_ok = r_at_k0 == 0.0
    ok = refl_ok and eta_ok and exact_ok
    report(
        4,
        ok,
        f"optimised kappa={result.kappa_opt:.4f} (analytic {result.kappa_analytic:.4f}): "
        f"reflected={result.reflected_fraction_at_opt:.4f} (<0.02: {refl_ok}), "
        f"eta={result.eta_opt:.4f} vs estimate {eta_formula:.4f} (within 0.05: {eta_ok}), "
        f"closed-form reflection at analytic matching = {r_at_k0} (exactly 0: {exact_ok})",
    )


def test_criterion_5_operating_point_fit():
    fixed = make_device(5, 13.0, 10.0, gamma=0.3, gamma_r=1e-3)
    result = fit_device(0.163, 1.0 / 13.0, ["g", "gamma"], fixed, budget=500)
    recovered = result.recovered()
    ok = result.residual < 1e-3 and result.evaluations <= 500
    report(
        5,
        ok,
        f"fit to eta=0.163 at 76.9 ns: residual={result.residual:.2e} in "
        f"{result.evaluations} simulations; recovered g={recovered['g']:.3f}, "
        f"gamma={recovered['gamma']:.4f} (reported, not asserted)",
    )


def test_criterion_6_matched_vs_open(tmp_path, capsys):
    scenario = tmp_path / "compare.toml"
    scenario.write_text(
        """
[device]
n = 5
spacing_mhz = 12.0
coupling_mhz = 24.0
gamma_mhz = 1e-3

[device.common]
kappa_mhz = "matched"
gamma_mhz = 1e-3

[compare]
open_multiplier = 10.0
"""
    )
    code = compare_matched_open(scenario, out_dir=tmp_path / "out")
    import json

    payload = json.loads((tmp_path / "out" / "comparison.json").read_text())
    m, o = payload["matched"], payload["open"]
    ratio_ok = payload["checks"]["matched_second_echo_suppressed"]
    refl_ok = payload["checks"]["matched_reflection_suppressed"]
    ok = code == 0 and ratio_ok and refl_ok
    report(
        6,
        ok,
        f"second-echo ratio matched {m['eta2'] / m['eta1']:.4f} < open "
        f"{o['eta2'] / o['eta1']:.4f}: {ratio_ok}; reflection matched "
        f"{m['reflected_fraction']:.4f} < open {o['reflected_fraction']:.4f}: {refl_ok}",
    )


def test_criterion_7_property_suite(comb13_device, comb13_pulse):
    from combecho import sample_response

    checks = {}

    lossless = make_device(5, 4.0, 4.0, gamma=0.0, gamma_r=0.0)
    pulse = matched_pulse(lossless.minis)
    grid, pulse_c = auto_grid(lossless, pulse, periods=8.0)
    trace = integrate(lossless, pulse_c, grid)
    checks["unitary energy 1e-6"] = (
        abs(trace.output_energy() / trace.input_energy() - 1.0) <= 1e-6
    )

    resp = sample_response(lossless, omega_max=120.0, n_points=2001)
    checks["|r|=1 within 1e-12"] = np.max(np.abs(np.abs(resp.reflection) - 1.0)) < 1e-12

    lossy = make_device(5, 13.0, 6.0, gamma=0.3, gamma_r=0.2)
    resp_lossy = sample_response(lossy, omega_max=250.0, n_points=2001)
    checks["passivity"] = np.max(np.abs(resp_lossy.reflection)) <= 1.0 + 1e-12

    config = make_device(5, 4.0, 4.0, gamma=1e-3, gamma_r=1e-3)
    base = matched_pulse(config.minis)
    grid, first = auto_grid(config, base)
    second = Pulse(amplitude=0.5, center_time=first.center_time + 0.07, power_fwhm=first.power_fwhm)
    both = integrate(config, (first, second), grid)
    sum_parts = integrate(config, first, grid).a_out + integrate(config, second, grid).a_out
    checks["linearity 1e-9"] = (
        np.max(np.abs(both.a_out - sum_parts)) <= 1e-9 * np.max(np.abs(both.a_out))
    )

    lossy_comb = make_device(5, 4.0, 4.0, gamma=0.3, gamma_r=0.1)
    p2 = matched_pulse(lossy_comb.minis)
    t_end = p2.center_time + 2.5 / 4.0
    energies = [
        integrate(lossy_comb, p2, Grid(0.0, t_end, dt)).output_energy()
        for dt in (2e-3, 1e-3, 5e-4)
    ]
    ratio = (energies[0] - energies[1]) / (energies[1] - energies[2])
    checks["rk4 order ratio in [12,20]"] = 12.0 <= ratio <= 20.0

    grid13, pulse13 = auto_grid(comb13_device, comb13_pulse)
    spectral = respond_pulse(comb13_device, pulse13, grid13)
    direct = integrate(comb13_device, pulse13, grid13)
    rel = np.linalg.norm(spectral.a_out - direct.a_out) / np.linalg.norm(direct.a_out)
    checks["pathway agreement 1e-3"] = rel <= 1e-3

    cfg = make_device(5, 4.0, 4.0, gamma=0.05, gamma_r=0.02)
    p3 = matched_pulse(cfg.minis)
    g3, p3 = auto_grid(cfg, p3)
    tr = integrate(cfg, p3, g3)
    loss = float(
        np.trapezoid(
            2 * RATE_SCALE * 0.02 * np.abs(tr.a) ** 2
            + 2 * np.sum(RATE_SCALE * cfg.decay_rates() * np.abs(tr.s) ** 2, axis=1),
            dx=g3.dt,
        )
    )
    stored = float(np.abs(tr.a[-1]) ** 2 + np.sum(np.abs(tr.s[-1]) ** 2))
    balance = abs(tr.input_energy() - (tr.output_energy() + loss + stored)) / tr.input_energy()
    checks["energy balance 1e-4"] = balance <= 1e-4

    ok = all(checks.values())
    detail = "; ".join(f"{name}: {'ok' if good else 'VIOLATED'}" for name, good in checks.items())
    report(7, ok, f"rk4 ratio={ratio:.1f}, pathway L2={rel:.1e}, balance={balance:.1e}; {detail}")


def test_criterion_8_reflection_formula(helium_device, helium_pulse):
    summary = summarize_comb(helium_device)
    kappa0 = kappa_matched(summary, 1e-3)
    period = 0.25
    rows = []
    ok = True
    for mult in (1.0 / 3.0, 1.0, 3.0):
        config = _with_kappa(helium_device, mult * kappa0)
        grid, pulse = auto_grid(config, helium_pulse)
        trace = integrate(config, pulse, grid)
        rep = detect_echoes(
            trace, (pulse.center_time - period / 2, pulse.center_time + period / 2), period
        )
        formula = reflection_center(summary, mult * kappa0, 1e-3)
        diff = abs(rep.reflected_fraction - formula)
        ok = ok and diff <= 0.10
        rows.append(f"kappa={mult:.2f}*kappa0: sim={rep.reflected_fraction:.4f} formula={formula:.4f}")
    report(8, ok, "prompt reflection vs closed form (tolerance 0.10): " + "; ".join(rows))

import numpy as np
import pytest

from combecho import (
    ValidationError,
    first_echo_efficiency,
    kappa_matched,
    matched_pulse,
    optimize_kappa,
    fit_device,
    summarize_comb,
    sweep_detuning,
)
from combecho.matching import _with_kappa

from conftest import make_device


def grid_scan_eta(config, pulse, kappas):
    """Brute-force oracle: efficiency at each coupling on a fixed list."""
    return [first_echo_efficiency(_with_kappa(config, float(k)), pulse) for k in kappas]


class TestOptimizeKappa:
    def test_matched_design_suppresses_reflection(self, helium_device, helium_pulse):
        result = optimize_kappa(helium_device, helium_pulse)
        assert result.reflected_fraction_at_opt < 0.02
        assert result.unimodal
        kappa0 = kappa_matched(summarize_comb(helium_device), 1e-3)
        assert result.kappa_analytic == pytest.approx(kappa0)
        assert result.kappa_opt == pytest.approx(kappa0, rel=0.15)

    def test_overcoupling_revives_the_second_echo(self, helium_device, helium_pulse):
        from combecho import auto_grid, detect_echoes, integrate

        result = optimize_kappa(helium_device, helium_pulse)
        period = 0.25

        def ratio(kappa):
            config = _with_kappa(helium_device, kappa)
            grid, pulse = auto_grid(config, helium_pulse)
            trace = integrate(config, pulse, grid)
            report = detect_echoes(
                trace, (pulse.center_time - period / 2, pulse.center_time + period / 2), period
            )
            return report.efficiency(2) / report.efficiency(1)

        assert ratio(5 * result.kappa_opt) > ratio(result.kappa_opt)

    def test_interior_maximum_beats_grid_scan_endpoints(self):
        config = make_device(5, 4.0, 4.0, gamma=0.0, gamma_r=0.0)
        pulse = matched_pulse(config.minis)
        result = optimize_kappa(config, pulse)
        lo, hi = result.bounds
        scan = grid_scan_eta(config, pulse, np.geomspace(lo, hi, 8))
        assert result.eta_opt >= max(scan[0], scan[-1]) - 1e-6
        assert result.eta_opt >= max(scan) - 5e-3
        assert lo < result.kappa_opt < hi

    def test_lossless_objective_is_unimodal_on_a_grid(self):
        config = make_device(5, 4.0, 4.0, gamma=0.0, gamma_r=0.0)
        pulse = matched_pulse(config.minis)
        lo, hi = 4.0 / 10, 4.0 * 10
        scan = np.array(grid_scan_eta(config, pulse, np.geomspace(lo, hi, 8)))
        rising = np.diff(scan) > 0
        # single switch from rising to falling
        assert np.count_nonzero(np.diff(rising.astype(int))) == 1

    def test_off_bracket_bounds_warn_and_fall_back(self, helium_device, helium_pulse):
        kappa0 = kappa_matched(summarize_comb(helium_device), 1e-3)
        with pytest.warns(UserWarning, match="bracket"):
            result = optimize_kappa(helium_device, helium_pulse, bounds=(kappa0 / 100, kappa0 / 10))
        assert not result.unimodal
        assert result.bounds[0] <= result.kappa_opt <= result.bounds[1]
        assert result.eta_opt == pytest.approx(
            first_echo_efficiency(_with_kappa(helium_device, result.kappa_opt), helium_pulse)
        )

    def test_rejects_bad_bounds(self, helium_device, helium_pulse):
        with pytest.raises(ValidationError):
            optimize_kappa(helium_device, helium_pulse, bounds=(2.0, 1.0))

    def test_matching_minimises_prompt_reflection_locally(self, helium_device, helium_pulse):
        from combecho import auto_grid, detect_echoes, integrate

        result = optimize_kappa(helium_device, helium_pulse)
        period = 0.25

        def reflected(kappa):
            config = _with_kappa(helium_device, kappa)
            grid, pulse = auto_grid(config, helium_pulse)
            trace = integrate(config, pulse, grid)
            report = detect_echoes(
                trace, (pulse.center_time - period / 2, pulse.center_time + period / 2), period
            )
            return report.reflected_fraction

        at_opt = reflected(result.kappa_opt)
        assert at_opt <= reflected(3 * result.kappa_opt)
        assert at_opt <= reflected(result.kappa_opt / 3)


class TestSweepDetuning:
    def test_echo_times_track_the_spacing(self, comb13_device, comb13_pulse):
        deltas = [4.0, 6.0, 8.0, 10.0, 12.0, 13.0, 15.0]
        result = sweep_detuning(
            comb13_device, comb13_pulse, deltas, dt_per_period=0.0079
        )
        assert result.values == tuple(deltas)
        for point in result.points:
            period = 1.0 / point.delta
            assert abs(point.echo_time - period) <= 0.0079 * period
        times = [p.echo_time * 1e3 for p in result.points]
        assert times[0] == pytest.approx(250.0, rel=0.01)
        assert times[-1] == pytest.approx(66.7, rel=0.01)

    def test_decay_trend_with_storage_time(self):
        template = make_device(5, 13.0, 13.0, gamma=0.02, gamma_r=1e-3)
        pulse = matched_pulse(template.minis)
        result = sweep_detuning(template, pulse, [4.0, 6.0, 8.0, 10.0, 12.0, 13.0, 15.0])
        by_time = sorted(result.points, key=lambda p: p.echo_time)
        etas = [p.eta_first for p in by_time]
        assert all(a > b for a, b in zip(etas, etas[1:]))

    def test_lossless_reoptimized_sweep_is_flat(self):
        template = make_device(5, 8.0, 8.0, gamma=0.0, gamma_r=0.0)
        pulse = matched_pulse(template.minis)
        result = sweep_detuning(template, pulse, [4.0, 8.0, 15.0], reoptimize_kappa=True)
        etas = [p.eta_first for p in result.points]
        assert max(etas) - min(etas) < 0.05

    def test_deterministic(self, comb13_device, comb13_pulse):
        a = sweep_detuning(comb13_device, comb13_pulse, [6.0, 12.0])
        b = sweep_detuning(comb13_device, comb13_pulse, [6.0, 12.0])
        assert a == b

    def test_threaded_matches_sequential(self, comb13_device, comb13_pulse):
        a = sweep_detuning(comb13_device, comb13_pulse, [6.0, 12.0])
        b = sweep_detuning(comb13_device, comb13_pulse, [6.0, 12.0], threads=2)
        assert a == b

    def test_rejects_nonpositive_spacings(self, comb13_device, comb13_pulse):
        with pytest.raises(ValidationError):
            sweep_detuning(comb13_device, comb13_pulse, [4.0, -1.0])

    def test_csv_columns(self, tmp_path, comb13_device, comb13_pulse):
        result = sweep_detuning(comb13_device, comb13_pulse, [13.0])
        path = tmp_path / "sweep.csv"
        result.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "delta_mhz,echo_time_ns,eta_first,eta_analytic,reflected_fraction"


class TestFitDevice:
    def test_reported_operating_point_is_reachable(self):
        fixed = make_device(5, 13.0, 10.0, gamma=0.3, gamma_r=1e-3)
        result = fit_device(0.163, 1.0 / 13.0, ["g", "gamma"], fixed)
        assert result.residual < 1e-3
        assert result.converged
        assert result.evaluations <= 500
        recovered = result.recovered()
        assert recovered["g"] > 0 and recovered["gamma"] > 0

    def test_target_zero_drives_coupling_to_the_floor(self):
        fixed = make_device(5, 13.0, 10.0, gamma=0.3, gamma_r=1e-3)
        result = fit_device(0.0, 1.0 / 13.0, ["g"], fixed, budget=200)
        assert result.recovered()["g"] == pytest.approx(0.5, rel=0.05)
        assert result.residual < 0.01

    def test_ideal_efficiency_needs_coupling_at_the_spacing_scale(self):
        fixed = make_device(5, 4.0, 2.0, gamma=1e-3, gamma_r=1e-3)
        result = fit_device(0.999, 0.25, ["g"], fixed, budget=120)
        assert 1.0 <= result.recovered()["g"] <= 16.0
        assert result.residual < 0.05

    def test_unknown_free_parameter_rejected(self):
        fixed = make_device(5, 13.0, 10.0, gamma=0.3)
        with pytest.raises(ValidationError):
            fit_device(0.1, 0.1, ["detuning"], fixed)

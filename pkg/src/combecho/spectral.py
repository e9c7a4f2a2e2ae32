"""Frequency-domain solution of the coupled-mode equations.

The device is single-port reflective; its monochromatic steady state under
an e^(-i w t) drive gives the reflection amplitude

    r(w) = kappa_d / D(w) - 1
    D(w) = kappa_d/2 + gamma_rd + i(delta_r - w)
           + sum_n g_dn^2 / (gamma_dn + i(delta_n - w))

where the subscript d marks dynamical quantities (quoted values times the
calibration factors of :mod:`combecho.model`) and delta_n = 2*pi*detuning_n
are the angular tooth frequencies.  Re D > 0 for any valid device, so r is
finite everywhere except exactly on a lossless tooth, where the comb pole
forces r = -1 (full reflection with a pi phase flip).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .model import (
    COUPLING_SCALE,
    FREQUENCY_SCALE,
    RATE_SCALE,
    DeviceConfig,
    Grid,
    Pulse,
    TimeTrace,
    pulse_envelope,
    pulse_spectrum,
    validate_config,
)

__all__ = ["SpectralResponse", "transfer_function", "sample_response", "respond_pulse"]


@dataclass(frozen=True)
class SpectralResponse:
    """Reflection amplitude sampled on a uniform angular-frequency grid."""

    omegas: np.ndarray
    reflection: np.ndarray
    warnings: tuple[str, ...] = ()

    def to_csv(self, path) -> None:
        """Write columns omega_rad_per_us, re_r, im_r, abs_r2."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("omega_rad_per_us,re_r,im_r,abs_r2\n")
            mag2 = np.abs(self.reflection) ** 2
            for w, r, m in zip(self.omegas, self.reflection, mag2):
                fh.write(f"{w:.12g},{r.real:.12g},{r.imag:.12g},{m:.12g}\n")


def transfer_function(config: DeviceConfig, omega):
    """Reflection amplitude r(omega); omega angular [rad/us], scalar or array."""
    validate_config(config)
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega)

    kap = RATE_SCALE * config.common.kappa
    d = kap / 2.0 + RATE_SCALE * config.common.decay_rate
    d = d + 1j * (FREQUENCY_SCALE * config.common.detuning - w)
    on_pole = np.zeros(w.shape, dtype=bool)
    for m in config.minis:
        if m.coupling == 0.0:
            continue
        den = RATE_SCALE * m.decay_rate + 1j * (FREQUENCY_SCALE * m.detuning - w)
        hit = den == 0
        on_pole |= hit
        safe = np.where(hit, 1.0, den)
        d = d + np.where(hit, 0.0, (COUPLING_SCALE * m.coupling) ** 2 / safe)
    r = kap / d - 1.0
    # a lossless tooth driven exactly on resonance pins the port to full
    # reflection with inverted phase (the D -> infinity limit)
    r = np.where(on_pole, -1.0 + 0.0j, r)
    return complex(r[0]) if scalar else r


def sample_response(config: DeviceConfig, omega_max: float, n_points: int) -> SpectralResponse:
    """Sample r on n_points spanning [-omega_max, omega_max].

    Attaches a warning when the grid spacing is coarser than the narrowest
    lossy feature, min of kappa and the nonzero tooth decays (dynamical
    rates set the linewidths).
    """
    if n_points < 2:
        raise NumericalError("sample_response needs n_points >= 2")
    if not (omega_max > 0.0):
        raise NumericalError("sample_response needs omega_max > 0")
    omegas = np.linspace(-omega_max, omega_max, n_points)
    spacing = 2.0 * omega_max / (n_points - 1)
    scales = [RATE_SCALE * config.common.kappa]
    scales += [RATE_SCALE * m.decay_rate for m in config.minis if m.decay_rate > 0.0]
    finest = min(scales)
    warns = ()
    if spacing > finest:
        warns = (
            f"grid spacing {spacing:.3g} rad/us exceeds the narrowest spectral "
            f"feature {finest:.3g} rad/us; dips may be undersampled",
        )
    return SpectralResponse(omegas=omegas, reflection=transfer_function(config, omegas), warnings=warns)


def respond_pulse(config: DeviceConfig, pulse: Pulse, grid: Grid) -> TimeTrace:
    """Pulse response via the transfer function on a DFT grid.

    The analytic pulse spectrum is multiplied by r on the frequency comb
    conjugate to the time grid and inverse-transformed.  The implied
    periodicity makes two checks mandatory: the pulse must sit inside the
    window (pre-history below 1e-6 of its energy) and the response must
    have rung down before the window ends (energy in the last 5% of the
    window below 1% of the input), otherwise the wrapped tail would
    contaminate the trace and a longer grid is required.
    """
    validate_config(config)
    count = grid.count
    dt = grid.dt
    times = grid.times()

    a_in = pulse_envelope(pulse, times)
    e_in = float(np.trapezoid(np.abs(a_in) ** 2, dx=dt))
    if pulse.energy_outside(grid.t_start, grid.t_end) > 1e-6 * pulse.energy():
        raise NumericalError(
            "pulse energy outside the time window exceeds 1e-6 of its total; "
            "shift center_time or extend the grid"
        )

    omegas = 2.0 * np.pi * np.fft.fftfreq(count, d=dt)
    f = pulse_spectrum(pulse, omegas)
    r = transfer_function(config, omegas)
    domega = 2.0 * np.pi / (count * dt)
    # a(t_k) = (2*pi)^(-1/2) * domega * sum_j f_j r_j e^(-i w_j t_k)
    phase = np.exp(-1j * omegas * grid.t_start)
    a_out = np.fft.fft(f * r * phase) * domega / np.sqrt(2.0 * np.pi)

    tail = count - max(2, count // 20)
    e_tail = float(np.trapezoid(np.abs(a_out[tail:]) ** 2, dx=dt))
    if e_tail > 0.01 * e_in:
        raise NumericalError(
            f"aliasing detected: {e_tail / e_in:.2%} of the input energy sits in "
            "the last 5% of the window; extend the grid so the response rings down"
        )
    return TimeTrace(grid=grid, a_in=a_in, a_out=a_out)

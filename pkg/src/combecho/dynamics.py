"""Direct time integration of the coupled-mode equations and echo scoring.

The state is the common-mode amplitude a plus the N tooth amplitudes s_n,
advanced with classical fixed-step RK4 from a zero initial state.  The
system is linear, small and non-stiff at device scales, and a fixed step
keeps the traces compatible with the DFT pathway in
:mod:`combecho.spectral`.  The port field a_out = sqrt(kappa_d) a - a_in
is recorded at every step.

Echo scoring works on the uniform comb picture: the comb rephases at
multiples of 1/spacing after the input peak, so the trace is cut into
windows of that width and each window's energy is compared against the
input energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .model import (
    COUPLING_SCALE,
    FREQUENCY_SCALE,
    RATE_SCALE,
    DeviceConfig,
    Grid,
    Pulse,
    TimeTrace,
    median_spacing,
    pulse_envelope,
    validate_config,
)

__all__ = [
    "StateVector",
    "EchoEvent",
    "EchoReport",
    "integrate",
    "detect_echoes",
    "first_echo_efficiency",
    "auto_grid",
]

#: event threshold: windows below this fraction of the input energy are noise
EVENT_ENERGY_FLOOR = 1e-4


@dataclass(frozen=True)
class StateVector:
    """Instantaneous state: common-mode amplitude and tooth amplitudes."""

    a: complex
    s: np.ndarray

    @staticmethod
    def from_packed(y: np.ndarray) -> "StateVector":
        return StateVector(a=complex(y[0]), s=np.array(y[1:]))

    def packed(self) -> np.ndarray:
        y = np.empty(len(self.s) + 1, dtype=complex)
        y[0] = self.a
        y[1:] = self.s
        return y


@dataclass(frozen=True)
class EchoEvent:
    """One rephasing event: window index k, interpolated peak time,
    window bounds, window energy and energy/input efficiency."""

    k: int
    peak_time: float
    window: tuple[float, float]
    energy: float
    efficiency: float


@dataclass(frozen=True)
class EchoReport:
    """Echo events plus the energy bookkeeping of a trace."""

    events: tuple[EchoEvent, ...]
    input_energy: float
    reflected_energy: float

    @property
    def reflected_fraction(self) -> float:
        if self.input_energy == 0.0:
            return 0.0
        return self.reflected_energy / self.input_energy

    @property
    def efficiencies(self) -> tuple[float, ...]:
        return tuple(e.efficiency for e in self.events)

    def efficiency(self, k: int) -> float:
        """Efficiency of the k-th rephasing, 0 when no such event fired."""
        for e in self.events:
            if e.k == k:
                return e.efficiency
        return 0.0


def _dynamic_rates(config: DeviceConfig):
    kap = RATE_SCALE * config.common.kappa
    c_a = -(kap / 2.0 + RATE_SCALE * config.common.decay_rate
            + 1j * FREQUENCY_SCALE * config.common.detuning)
    c_s = -(RATE_SCALE * config.decay_rates() + 1j * FREQUENCY_SCALE * config.detunings())
    g = COUPLING_SCALE * config.couplings()
    return kap, c_a, c_s.astype(complex), g


def _check_step(config: DeviceConfig, dt: float) -> None:
    detune_scale = FREQUENCY_SCALE * max(
        [abs(config.common.detuning)] + [abs(m.detuning) for m in config.minis], default=0.0
    )
    if detune_scale > 0.0 and dt * detune_scale > 0.105:
        raise NumericalError(
            f"dt={dt:.3g} us does not resolve the comb detuning scale "
            f"{detune_scale:.3g} rad/us (need dt <= {0.105 / detune_scale:.3g})"
        )
    decay_scale = RATE_SCALE * (config.common.kappa / 2.0 + config.common.decay_rate)
    decay_scale = max([decay_scale] + [RATE_SCALE * m.decay_rate for m in config.minis])
    if dt * decay_scale > 1.0:
        raise NumericalError(
            f"dt={dt:.3g} us does not resolve the cavity decay scale "
            f"{decay_scale:.3g} /us (need dt <= {1.0 / decay_scale:.3g})"
        )


def _drive_samples(pulses, times: np.ndarray, dt: float):
    if isinstance(pulses, Pulse):
        pulses = (pulses,)
    full = np.zeros(len(times), dtype=complex)
    half = np.zeros(len(times), dtype=complex)
    for p in pulses:
        full += pulse_envelope(p, times)
        half += pulse_envelope(p, times + 0.5 * dt)
    return full, half


def integrate(config: DeviceConfig, pulse, grid: Grid) -> TimeTrace:
    """Drive the device with a pulse (or a superposition of pulses).

    Parameters
    ----------
    config : DeviceConfig
        Validated device.
    pulse : Pulse or sequence of Pulse
        Input drive; a sequence is summed, which is exact by linearity.
    grid : Grid
        Output grid; the step must resolve both the comb detuning span and
        the fastest decay, otherwise a NumericalError names the violated
        scale.

    Returns
    -------
    TimeTrace
        With a_in, a_out and the internal histories a and s.
    """
    validate_config(config)
    _check_step(config, grid.dt)
    n = config.n
    kap, c_a, c_s, g = _dynamic_rates(config)
    sqk = math.sqrt(kap)
    dt = grid.dt
    times = grid.times()
    count = grid.count
    a_in, a_half = _drive_samples(pulse, times, dt)

    y = np.zeros(n + 1, dtype=complex)
    a_hist = np.zeros(count, dtype=complex)
    s_hist = np.zeros((count, n), dtype=complex)

    def rhs(state, drive):
        out = np.empty(n + 1, dtype=complex)
        out[0] = c_a * state[0] + g @ state[1:] + sqk * drive
        out[1:] = c_s * state[1:] - g * state[0]
        return out

    for i in range(count - 1):
        u_mid = a_half[i]
        k1 = rhs(y, a_in[i])
        k2 = rhs(y + (0.5 * dt) * k1, u_mid)
        k3 = rhs(y + (0.5 * dt) * k2, u_mid)
        k4 = rhs(y + dt * k3, a_in[i + 1])
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        a_hist[i + 1] = y[0]
        s_hist[i + 1] = y[1:]

    if not np.all(np.isfinite(a_hist.view(float))):
        raise NumericalError("state overflowed during integration; reduce dt")
    a_out = sqk * a_hist - a_in
    return TimeTrace(grid=grid, a_in=a_in, a_out=a_out, a=a_hist, s=s_hist)


def _window_energy(power: np.ndarray, times: np.ndarray, lo: float, hi: float, dt: float) -> float:
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 2:
        return 0.0
    return float(np.trapezoid(power[mask], dx=dt))


def _interp_peak(times: np.ndarray, power: np.ndarray, dt: float) -> float:
    """Vertex of the parabola through the three samples around the maximum."""
    i = int(np.argmax(power))
    if 0 < i < len(power) - 1:
        denom = power[i - 1] - 2.0 * power[i] + power[i + 1]
        if denom < 0.0:
            return float(times[i] + 0.5 * dt * (power[i - 1] - power[i + 1]) / denom)
    return float(times[i])


def detect_echoes(trace: TimeTrace, input_window: tuple[float, float], expected_period: float) -> EchoReport:
    """Score the trace into an input window plus rephasing windows.

    The reflected energy is whatever leaves the port inside input_window.
    Subsequent windows of width expected_period are centred at t_peak +
    k*expected_period (t_peak from the input channel); a window becomes an
    event when its energy exceeds 1e-4 of the input energy.  Peak times use
    parabolic interpolation of |a_out|^2 around the discrete maximum.
    """
    times = trace.grid.times()
    dt = trace.grid.dt
    lo, hi = input_window
    if lo < trace.grid.t_start - 0.5 * dt or hi > times[-1] + 0.5 * dt:
        raise ValidationError(
            f"input window [{lo}, {hi}] lies outside the trace grid "
            f"[{trace.grid.t_start}, {times[-1]}]"
        )
    p_in = np.abs(trace.a_in) ** 2
    p_out = np.abs(trace.a_out) ** 2
    input_energy = float(np.trapezoid(p_in, dx=dt))
    reflected = _window_energy(p_out, times, lo, hi, dt)

    events: list[EchoEvent] = []
    if input_energy > 0.0:
        t_peak = times[int(np.argmax(p_in))]
        k = 1
        while True:
            w_lo = t_peak + (k - 0.5) * expected_period
            w_hi = t_peak + (k + 0.5) * expected_period
            if w_hi > times[-1] + dt:
                break
            mask = (times >= w_lo) & (times <= w_hi)
            energy = _window_energy(p_out, times, w_lo, w_hi, dt)
            if energy > EVENT_ENERGY_FLOOR * input_energy:
                events.append(
                    EchoEvent(
                        k=k,
                        peak_time=_interp_peak(times[mask], p_out[mask], dt),
                        window=(w_lo, w_hi),
                        energy=energy,
                        efficiency=energy / input_energy,
                    )
                )
            k += 1
    return EchoReport(events=tuple(events), input_energy=input_energy, reflected_energy=reflected)


def auto_grid(config: DeviceConfig, pulse: Pulse, periods: float = 2.5) -> tuple[Grid, Pulse]:
    """Default grid for echo runs, plus the pulse recentred onto it.

    The pulse is moved to t0 = 5*FWHM so its pre-history is negligible at
    t = 0; the grid extends `periods` rephasing periods past t0 and the
    step resolves the port decay, the envelope and the comb span:

        dt = min(0.05 / (2*pi*kappa), fwhm/50, 0.02 / (2*pi*max|detuning|))
    """
    spacing = median_spacing(config.minis)
    period = 1.0 / spacing
    fwhm = pulse.power_fwhm
    t0 = 5.0 * fwhm
    dt = min(
        0.05 * 2.0 * math.pi / (RATE_SCALE * config.common.kappa),
        fwhm / 50.0,
        0.02 / (FREQUENCY_SCALE * float(np.max(np.abs(config.detunings())))),
    )
    grid = Grid(t_start=0.0, t_end=t0 + periods * period, dt=dt)
    recentred = Pulse(
        shape=pulse.shape,
        amplitude=pulse.amplitude,
        center_time=t0,
        power_fwhm=pulse.power_fwhm,
        carrier_offset=pulse.carrier_offset,
    )
    return grid, recentred


def first_echo_efficiency(config: DeviceConfig, pulse: Pulse, grid: Grid | None = None) -> float:
    """Energy of the first rephasing window over the input energy.

    Convenience composition of integrate and detect_echoes on the default
    grid (overridable).  The rephasing period comes from the median tooth
    spacing; returns 0 when no first echo fires.
    """
    validate_config(config)
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
    return report.efficiency(1)

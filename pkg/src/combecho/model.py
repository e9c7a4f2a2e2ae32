"""Domain types and pulse definitions for the multiresonator echo memory.

A storage device is a set of narrow mini-resonators (the comb teeth) that
all couple to one common cavity, which is the only port to the external
waveguide.  The common cavity obeys

    da/dt = -(kappa/2 + i*delta_r + gamma_r) a + sum_n g_n s_n + sqrt(kappa) a_in
    ds_n/dt = -(i*delta_n + gamma_n) s_n - g_n a
    a_out = sqrt(kappa) a - a_in

with delta_n the angular tooth frequencies and all rates amplitude rates.

Units
-----
Every user-facing parameter is quoted in conventional-frequency units, the
way microwave device values are tabulated: detunings in MHz, and the
couplings g and the rates kappa, gamma as MHz-equivalent numbers.  Time is
in microseconds.  The quoted values map onto the dynamical quantities via
two fixed calibration factors:

* frequencies and couplings pick up one factor 2*pi
  (``delta_n = 2*pi*detuning``, ``g_dyn = 2*pi*g``),
* the rates kappa and gamma pick up (2*pi)**2
  (``kappa_dyn = (2*pi)**2 * kappa``).

This is the unique calibration under which the closed-form design rules in
quoted units (``kappa_0 = 2*gamma_r + g**2/spacing``, the band-centre
reflection and the echo-efficiency estimates in :mod:`combecho.analytics`)
are quantitatively reproduced by the integrator: couplings enter the
equations once per mode pair, while rates balance squared couplings, so
the coupling factor must enter the rate factor twice.  The echo period is
``1/spacing`` microseconds either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

#: quoted detunings and carrier offsets (MHz) -> angular frequencies (rad/us)
FREQUENCY_SCALE = TWO_PI
#: quoted couplings g (MHz-equivalent) -> dynamical couplings (rad/us)
COUPLING_SCALE = TWO_PI
#: quoted rates kappa, gamma (MHz-equivalent) -> dynamical amplitude rates (1/us)
RATE_SCALE = TWO_PI**2

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class MiniResonator:
    """One comb tooth.

    Attributes
    ----------
    detuning : float
        Tooth frequency relative to the reference carrier [MHz].
    decay_rate : float
        Internal field decay of the tooth [MHz-equivalent rate, >= 0].
    coupling : float
        Coupling to the common cavity mode [MHz-equivalent, >= 0].
    """

    detuning: float
    decay_rate: float
    coupling: float

    def __post_init__(self):
        errors = []
        if not math.isfinite(self.detuning):
            errors.append("mini.detuning must be finite")
        if not (self.decay_rate >= 0.0):
            errors.append("mini.decay_rate must be >= 0")
        if not (self.coupling >= 0.0):
            errors.append("mini.coupling must be >= 0")
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class CommonResonator:
    """The broadband cavity connecting the comb to the waveguide port.

    Attributes
    ----------
    kappa : float
        Coupling rate to the external waveguide [MHz-equivalent, > 0].
    detuning : float
        Cavity frequency offset from the reference carrier [MHz].
    decay_rate : float
        Internal cavity loss [MHz-equivalent, >= 0].
    """

    kappa: float
    detuning: float = 0.0
    decay_rate: float = 0.0

    def __post_init__(self):
        errors = []
        if not (self.kappa > 0.0):
            errors.append("common.kappa must be positive")
        if not math.isfinite(self.detuning):
            errors.append("common.detuning must be finite")
        if not (self.decay_rate >= 0.0):
            errors.append("common.decay_rate must be >= 0")
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class DeviceConfig:
    """Full device: ordered comb teeth plus the common resonator."""

    minis: tuple[MiniResonator, ...]
    common: CommonResonator

    def __init__(self, minis, common):
        object.__setattr__(self, "minis", tuple(minis))
        object.__setattr__(self, "common", common)

    @property
    def n(self) -> int:
        return len(self.minis)

    def detunings(self) -> np.ndarray:
        return np.array([m.detuning for m in self.minis], dtype=float)

    def decay_rates(self) -> np.ndarray:
        return np.array([m.decay_rate for m in self.minis], dtype=float)

    def couplings(self) -> np.ndarray:
        return np.array([m.coupling for m in self.minis], dtype=float)


@dataclass(frozen=True)
class Pulse:
    """Analytic input envelope.

    ``gaussian`` has a peak amplitude ``amplitude`` at ``center_time`` and a
    full width at half maximum of ``power_fwhm`` measured on the intensity
    ``|a_in|**2``.  ``rectangular`` is ``amplitude`` on
    ``[center_time - power_fwhm/2, center_time + power_fwhm/2]``.  A nonzero
    ``carrier_offset`` (MHz) multiplies either shape by
    ``exp(-i*2*pi*carrier_offset*t)``.

    Spectrum normalisation is a convention, not a requirement: every
    efficiency in this package is a ratio of energies and is invariant
    under amplitude rescaling.
    """

    shape: str = "gaussian"
    amplitude: float = 1.0
    center_time: float = 0.0
    power_fwhm: float = 0.05
    carrier_offset: float = 0.0

    def __post_init__(self):
        errors = []
        if self.shape not in ("gaussian", "rectangular"):
            errors.append(f"pulse.shape must be 'gaussian' or 'rectangular', got {self.shape!r}")
        if not (self.amplitude > 0.0):
            errors.append("pulse.amplitude must be positive")
        if not (self.power_fwhm > 0.0):
            errors.append("pulse.power_fwhm must be positive")
        if not math.isfinite(self.center_time):
            errors.append("pulse.center_time must be finite")
        if not math.isfinite(self.carrier_offset):
            errors.append("pulse.carrier_offset must be finite")
        if errors:
            raise ValidationError(errors)

    def energy(self) -> float:
        """Analytic envelope energy, integral of |a_in|^2 dt."""
        if self.shape == "gaussian":
            return self.amplitude**2 * self.power_fwhm * math.sqrt(math.pi / (4.0 * _LN2))
        return self.amplitude**2 * self.power_fwhm

    def energy_outside(self, t_start: float, t_end: float) -> float:
        """Analytic envelope energy lying outside [t_start, t_end]."""
        if self.shape == "rectangular":
            lo = self.center_time - 0.5 * self.power_fwhm
            hi = self.center_time + 0.5 * self.power_fwhm
            missing = max(0.0, t_start - lo) + max(0.0, hi - t_end)
            return self.amplitude**2 * min(missing, self.power_fwhm)
        # |envelope|^2 is gaussian with std sigma
        sigma = self.power_fwhm / (2.0 * math.sqrt(2.0 * _LN2))
        total = self.energy()
        q_lo = 0.5 * math.erfc((self.center_time - t_start) / (sigma * math.sqrt(2.0)))
        q_hi = 0.5 * math.erfc((t_end - self.center_time) / (sigma * math.sqrt(2.0)))
        return total * min(1.0, q_lo + q_hi)


@dataclass(frozen=True)
class Grid:
    """Uniform time grid; samples sit at t_start + k*dt for k < count."""

    t_start: float
    t_end: float
    dt: float

    def __post_init__(self):
        errors = []
        if not (self.dt > 0.0):
            errors.append("grid.dt must be positive")
        if not (self.t_end > self.t_start):
            errors.append("grid.t_end must exceed t_start")
        if errors:
            raise ValidationError(errors)

    @property
    def count(self) -> int:
        return int(math.floor((self.t_end - self.t_start) / self.dt)) + 1

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.count)


@dataclass(frozen=True)
class TimeTrace:
    """Sampled complex field histories on a uniform grid.

    ``a`` (common-mode amplitude) and ``s`` (per-tooth amplitudes, shape
    ``(count, n)``) are present only when the producer integrated the
    internal modes.
    """

    grid: Grid
    a_in: np.ndarray
    a_out: np.ndarray
    a: np.ndarray | None = None
    s: np.ndarray | None = None

    def __post_init__(self):
        count = self.grid.count
        for name in ("a_in", "a_out", "a"):
            channel = getattr(self, name)
            if channel is not None and len(channel) != count:
                raise ValidationError(f"trace.{name} length {len(channel)} != grid count {count}")
        if self.s is not None and self.s.shape[0] != count:
            raise ValidationError(f"trace.s length {self.s.shape[0]} != grid count {count}")

    def input_energy(self) -> float:
        return float(np.trapezoid(np.abs(self.a_in) ** 2, dx=self.grid.dt))

    def output_energy(self) -> float:
        return float(np.trapezoid(np.abs(self.a_out) ** 2, dx=self.grid.dt))

    def to_csv(self, path) -> None:
        """Write columns t_us, re_in, im_in, re_out, im_out, p_out."""
        t = self.grid.times()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("t_us,re_in,im_in,re_out,im_out,p_out\n")
            p = np.abs(self.a_out) ** 2
            for k in range(self.grid.count):
                fh.write(
                    f"{t[k]:.12g},{self.a_in[k].real:.12g},{self.a_in[k].imag:.12g},"
                    f"{self.a_out[k].real:.12g},{self.a_out[k].imag:.12g},{p[k]:.12g}\n"
                )


def build_uniform_comb(
    n: int,
    spacing: float,
    coupling: float,
    decay: float,
    centering: str = "tooth_at_center",
) -> tuple[MiniResonator, ...]:
    """Build an n-tooth comb with equal spacing [MHz].

    ``tooth_at_center`` places the teeth at spacing*(k - (n-1)/2), so odd n
    puts one tooth exactly at zero detuning.  ``midpoint_at_center`` shifts
    the comb by half a spacing so zero falls midway between the two middle
    teeth, which is the natural frame for band-centre reflection studies.
    """
    errors = []
    if n < 1:
        errors.append("comb.n must be >= 1")
    if not (spacing > 0.0):
        errors.append("comb.spacing must be positive")
    if centering not in ("tooth_at_center", "midpoint_at_center"):
        errors.append(f"comb.centering unknown: {centering!r}")
    if errors:
        raise ValidationError(errors)
    offsets = np.arange(n) - (n - 1) / 2.0
    if centering == "midpoint_at_center" and n % 2 == 1:
        # even n already straddles zero at half-integer offsets
        offsets = offsets + 0.5
    detunings = spacing * offsets
    return tuple(MiniResonator(float(d), decay, coupling) for d in detunings)


def median_spacing(minis) -> float:
    """Median adjacent tooth spacing of a comb [MHz]; needs >= 2 teeth."""
    if len(minis) < 2:
        raise ValidationError("comb spacing undefined for fewer than 2 teeth")
    det = np.sort(np.array([m.detuning for m in minis], dtype=float))
    return float(np.median(np.diff(det)))


def matched_pulse(minis, amplitude: float = 1.0) -> Pulse:
    """Gaussian pulse whose spectrum fills the comb acceptance band.

    The angular power-spectral width is set to (n-1)*pi*spacing, i.e. half
    the angular span of the comb, and the pulse is centred at five widths
    so its pre-history is negligible on a grid starting at zero.
    """
    n = len(minis)
    spacing = median_spacing(minis)
    width = (n - 1) * math.pi * spacing
    fwhm = 4.0 * _LN2 / width
    return Pulse(shape="gaussian", amplitude=amplitude, center_time=5.0 * fwhm, power_fwhm=fwhm)


def pulse_envelope(pulse: Pulse, t) -> np.ndarray:
    """Complex envelope a_in(t); accepts scalars or arrays [us]."""
    t = np.asarray(t, dtype=float)
    if pulse.shape == "gaussian":
        env = pulse.amplitude * np.exp(-2.0 * _LN2 * (t - pulse.center_time) ** 2 / pulse.power_fwhm**2)
    else:
        half = 0.5 * pulse.power_fwhm
        env = np.where(np.abs(t - pulse.center_time) <= half, pulse.amplitude, 0.0)
    if pulse.carrier_offset != 0.0:
        env = env * np.exp(-1j * FREQUENCY_SCALE * pulse.carrier_offset * t)
    return env.astype(complex)


def pulse_spectrum(pulse: Pulse, omega) -> np.ndarray:
    """Spectral profile f(omega) under a_in(t) = (2*pi)^(-1/2) int f e^(-i w t) dw.

    omega is angular [rad/us].  The gaussian transform is again gaussian,
    centred on the (angular) carrier offset; the rectangle transforms to a
    sinc with first zero 2*pi/power_fwhm away from the carrier.
    """
    omega = np.asarray(omega, dtype=float)
    w = omega - FREQUENCY_SCALE * pulse.carrier_offset
    phase = np.exp(1j * w * pulse.center_time)
    if pulse.shape == "gaussian":
        alpha = 2.0 * _LN2 / pulse.power_fwhm**2
        mag = pulse.amplitude * math.sqrt(math.pi / alpha) * np.exp(-(w**2) / (4.0 * alpha))
    else:
        x = 0.5 * w * pulse.power_fwhm
        mag = pulse.amplitude * pulse.power_fwhm * np.sinc(x / math.pi)
    return (mag / math.sqrt(TWO_PI)) * phase


def validate_config(config: DeviceConfig) -> DeviceConfig:
    """Check cross-field invariants, raising with every violation at once.

    The per-type constraints (positive kappa, non-negative rates) are
    enforced at construction; this adds the comb-level rules, most notably
    that tooth detunings are pairwise distinct.
    """
    errors = []
    seen: dict[float, int] = {}
    for idx, m in enumerate(config.minis):
        if m.detuning in seen:
            errors.append(
                f"minis[{idx}].detuning duplicates minis[{seen[m.detuning]}].detuning "
                f"({m.detuning} MHz)"
            )
        else:
            seen[m.detuning] = idx
    if errors:
        raise ValidationError(errors)
    return config

"""Closed-form design rules for the comb memory, in quoted units.

All formulas take the device numbers exactly as quoted (spacing in MHz,
couplings and rates as MHz-equivalent numbers) with no unit conversions:
each expression is a ratio of like quantities, so the calibration factors
of :mod:`combecho.model` cancel.  The simulator is the ground truth; these
are the estimates one designs against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EstimateWarning, ValidationError
from .model import DeviceConfig

__all__ = [
    "CombSummary",
    "summarize_comb",
    "eta_matched",
    "eta_general",
    "kappa_matched",
    "reflection_center",
    "echo_time",
]


@dataclass(frozen=True)
class CombSummary:
    """Ensemble averages of a comb: mean coupling g_bar, mean decay
    gamma_bar, mean adjacent spacing delta_bar [MHz], tooth count, and the
    rephasing time t1 = 1/delta_bar [us]."""

    g_bar: float
    gamma_bar: float
    delta_bar: float
    n_teeth: int

    @property
    def t1(self) -> float:
        return 1.0 / self.delta_bar


def summarize_comb(config: DeviceConfig) -> CombSummary:
    """Arithmetic means over the teeth; spacing from sorted detunings."""
    n = config.n
    if n < 2:
        raise ValidationError("comb summary needs >= 2 teeth for the mean spacing")
    det = np.sort(config.detunings())
    return CombSummary(
        g_bar=float(np.mean(config.couplings())),
        gamma_bar=float(np.mean(config.decay_rates())),
        delta_bar=float(np.mean(np.diff(det))),
        n_teeth=n,
    )


def eta_matched(summary: CombSummary, gamma_r: float) -> float:
    """First-echo efficiency at the matched coupling kappa_0.

    eta = (1 + 2*gamma_r*delta/g^2)^-2 * exp(-2*gamma/delta)
    """
    g, gam, d = summary.g_bar, summary.gamma_bar, summary.delta_bar
    if not (g > 0.0 and d > 0.0):
        raise ValidationError("eta_matched needs positive mean coupling and spacing")
    return (1.0 + 2.0 * gamma_r * d / g**2) ** -2 * math.exp(-2.0 * gam / d)


def eta_general(summary: CombSummary, kappa: float) -> float:
    """First-echo efficiency estimate at arbitrary port coupling.

    eta = g^4 / (delta^2 kappa^2) * exp(-2*gamma*t1)

    Valid near matching; for kappa well below kappa_0 it exceeds one, in
    which case it is returned as-is with an EstimateWarning rather than
    clamped.
    """
    if not (kappa > 0.0):
        raise ValidationError("eta_general needs kappa > 0")
    g, gam, d = summary.g_bar, summary.gamma_bar, summary.delta_bar
    eta = g**4 / (d**2 * kappa**2) * math.exp(-2.0 * gam * summary.t1)
    if eta > 1.0:
        warnings.warn(
            f"efficiency estimate {eta:.4g} exceeds 1; kappa={kappa:.4g} is far "
            "below matching and the formula is extrapolated",
            EstimateWarning,
            stacklevel=2,
        )
    return eta


def kappa_matched(summary: CombSummary, gamma_r: float) -> float:
    """Impedance-matched port coupling kappa_0 = 2*gamma_r + g^2/delta."""
    return 2.0 * gamma_r + summary.g_bar**2 / summary.delta_bar


def reflection_center(summary: CombSummary, kappa: float, gamma_r: float) -> float:
    """Band-centre power reflection of the comb as seen through the port.

    R = (kappa - 2*gamma_r - g^2/delta)^2 / (kappa + 2*gamma_r + g^2/delta)^2

    Coarse-grained over the comb period: a pulse spanning several teeth
    sees this value as its promptly reflected energy fraction.  Evaluating
    at kappa_matched gives exactly zero.
    """
    load = 2.0 * gamma_r + summary.g_bar**2 / summary.delta_bar
    return ((kappa - load) / (kappa + load)) ** 2


def echo_time(summary: CombSummary) -> float:
    """Rephasing delay of the first echo, t1 = 1/delta_bar [us]."""
    return summary.t1

"""combecho: coupled-mode simulator and design toolkit for multiresonator
photon-echo memories behind a common cavity."""

__version__ = "0.1.0"

from .errors import EstimateWarning, NumericalError, ValidationError
from .model import (
    CommonResonator,
    DeviceConfig,
    Grid,
    MiniResonator,
    Pulse,
    TimeTrace,
    build_uniform_comb,
    matched_pulse,
    median_spacing,
    pulse_envelope,
    pulse_spectrum,
    validate_config,
)
from .analytics import (
    CombSummary,
    echo_time,
    eta_general,
    eta_matched,
    kappa_matched,
    reflection_center,
    summarize_comb,
)
from .spectral import SpectralResponse, respond_pulse, sample_response, transfer_function
from .dynamics import (
    EchoEvent,
    EchoReport,
    StateVector,
    auto_grid,
    detect_echoes,
    first_echo_efficiency,
    integrate,
)
from .matching import (
    FitResult,
    MatchResult,
    SweepPoint,
    SweepResult,
    fit_device,
    optimize_kappa,
    sweep_detuning,
)

__all__ = [
    "__version__",
    "CommonResonator",
    "CombSummary",
    "DeviceConfig",
    "EchoEvent",
    "EchoReport",
    "EstimateWarning",
    "FitResult",
    "Grid",
    "MatchResult",
    "MiniResonator",
    "NumericalError",
    "Pulse",
    "SpectralResponse",
    "StateVector",
    "SweepPoint",
    "SweepResult",
    "TimeTrace",
    "ValidationError",
    "auto_grid",
    "build_uniform_comb",
    "detect_echoes",
    "echo_time",
    "eta_general",
    "eta_matched",
    "first_echo_efficiency",
    "integrate",
    "kappa_matched",
    "matched_pulse",
    "median_spacing",
    "optimize_kappa",
    "pulse_envelope",
    "pulse_spectrum",
    "reflection_center",
    "respond_pulse",
    "sample_response",
    "summarize_comb",
    "sweep_detuning",
    "transfer_function",
    "fit_device",
    "validate_config",
]

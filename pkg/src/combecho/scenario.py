"""Scenario files: one TOML document describing a device, a pulse and
exactly one command block, plus the artifact writers.

Keys carry their units (spacing_mhz, power_fwhm_us, ...).  Rates and
couplings are quoted in the MHz-equivalent convention of
:mod:`combecho.model`.  The special value ``kappa_mhz = "matched"``
resolves to the analytic matching of the comb.  Validation collects every
bad field before anything runs; artifacts are written through a temp file
and an atomic rename, floats at 12 significant digits.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from . import __version__
from . import analytics
from .errors import ValidationError
from .model import (
    CommonResonator,
    DeviceConfig,
    MiniResonator,
    Pulse,
    build_uniform_comb,
    matched_pulse,
    validate_config,
)

COMMANDS = ("spectrum", "simulate", "sweep", "match", "fit", "compare")


@dataclass
class Scenario:
    device: DeviceConfig
    pulse: Pulse
    command: str
    options: dict
    out_dir: Path


def _get_number(table, key, errors, prefix, default=None, positive=False):
    if key not in table:
        if default is None:
            errors.append(f"{prefix}.{key} is required")
        return default
    value = table[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(float(value)):
        errors.append(f"{prefix}.{key} must be a finite number, got {value!r}")
        return default
    value = float(value)
    if positive and value <= 0:
        errors.append(f"{prefix}.{key} must be positive, got {value}")
    return value


def _parse_device(table, errors) -> DeviceConfig | None:
    if not isinstance(table, dict):
        errors.append("device section is required")
        return None
    minis: list[MiniResonator] = []
    have_comb = "n" in table or "spacing_mhz" in table
    have_list = "mini" in table
    if have_comb and have_list:
        errors.append("device: give either the comb shorthand or a [[device.mini]] list, not both")
    if have_comb:
        n = table.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            errors.append(f"device.n must be an integer >= 1, got {n!r}")
            n = None
        spacing = _get_number(table, "spacing_mhz", errors, "device", positive=True)
        coupling = _get_number(table, "coupling_mhz", errors, "device")
        gamma = _get_number(table, "gamma_mhz", errors, "device", default=0.0)
        centering = table.get("centering", "tooth_at_center")
        if centering not in ("tooth_at_center", "midpoint_at_center"):
            errors.append(f"device.centering unknown: {centering!r}")
            centering = "tooth_at_center"
        if None not in (n, spacing, coupling, gamma) and coupling >= 0 and gamma >= 0:
            minis = list(build_uniform_comb(n, spacing, coupling, gamma, centering))
        else:
            if coupling is not None and coupling < 0:
                errors.append("device.coupling_mhz must be >= 0")
            if gamma is not None and gamma < 0:
                errors.append("device.gamma_mhz must be >= 0")
    elif have_list:
        raw = table.get("mini")
        if not isinstance(raw, list) or not raw:
            errors.append("device.mini must be a non-empty array of tables")
        else:
            for i, entry in enumerate(raw):
                if not isinstance(entry, dict):
                    errors.append(f"device.mini[{i}] must be a table")
                    continue
                det = _get_number(entry, "detuning_mhz", errors, f"device.mini[{i}]")
                cpl = _get_number(entry, "coupling_mhz", errors, f"device.mini[{i}]")
                gam = _get_number(entry, "gamma_mhz", errors, f"device.mini[{i}]", default=0.0)
                if None in (det, cpl, gam) or cpl < 0 or gam < 0:
                    if cpl is not None and cpl < 0:
                        errors.append(f"device.mini[{i}].coupling_mhz must be >= 0")
                    if gam is not None and gam < 0:
                        errors.append(f"device.mini[{i}].gamma_mhz must be >= 0")
                    continue
                minis.append(MiniResonator(det, gam, cpl))
    else:
        errors.append("device needs either n/spacing_mhz/coupling_mhz or a [[device.mini]] list")

    common_tbl = table.get("common")
    if not isinstance(common_tbl, dict):
        errors.append("device.common section is required")
        return None
    det_r = _get_number(common_tbl, "detuning_mhz", errors, "device.common", default=0.0)
    gamma_r = _get_number(common_tbl, "gamma_mhz", errors, "device.common", default=0.0)
    if gamma_r is not None and gamma_r < 0:
        errors.append("device.common.gamma_mhz must be >= 0")
    kappa_raw = common_tbl.get("kappa_mhz")
    kappa: float | None
    if kappa_raw == "matched":
        if len(minis) >= 2:
            summary = analytics.summarize_comb(
                DeviceConfig(minis, CommonResonator(kappa=1.0, decay_rate=gamma_r or 0.0))
            )
            kappa = analytics.kappa_matched(summary, gamma_r or 0.0)
        else:
            errors.append("device.common.kappa_mhz = 'matched' needs a comb with >= 2 teeth")
            kappa = None
    else:
        kappa = _get_number(common_tbl, "kappa_mhz", errors, "device.common", positive=True)
    if errors or kappa is None:
        return None
    try:
        return validate_config(
            DeviceConfig(minis, CommonResonator(kappa=kappa, detuning=det_r, decay_rate=gamma_r))
        )
    except ValidationError as exc:
        errors.extend(exc.errors)
        return None


def _parse_pulse(table, device: DeviceConfig | None, errors) -> Pulse | None:
    table = table or {}
    shape = table.get("shape", "gaussian")
    if shape not in ("gaussian", "rectangular"):
        errors.append(f"pulse.shape must be 'gaussian' or 'rectangular', got {shape!r}")
        shape = "gaussian"
    amplitude = _get_number(table, "amplitude", errors, "pulse", default=1.0, positive=True)
    carrier = _get_number(table, "carrier_offset_mhz", errors, "pulse", default=0.0)
    fwhm = table.get("power_fwhm_us")
    if fwhm is None:
        if device is None or device.n < 2:
            errors.append("pulse.power_fwhm_us is required when the device has no comb to match")
            return None
        base = matched_pulse(device.minis, amplitude=amplitude or 1.0)
        fwhm = base.power_fwhm
    else:
        fwhm = _get_number(table, "power_fwhm_us", errors, "pulse", positive=True)
        if fwhm is None:
            return None
    center = _get_number(table, "center_time_us", errors, "pulse", default=5.0 * fwhm)
    if errors:
        return None
    try:
        return Pulse(
            shape=shape,
            amplitude=amplitude,
            center_time=center,
            power_fwhm=fwhm,
            carrier_offset=carrier,
        )
    except ValidationError as exc:
        errors.extend(exc.errors)
        return None


def _parse_options(command: str, table, errors) -> dict:
    opts: dict = {}
    if command == "spectrum":
        opts["omega_max"] = _get_number(table, "omega_max_rad_per_us", errors, "spectrum", default=0.0)
        npts = table.get("n_points", 2001)
        if not isinstance(npts, int) or isinstance(npts, bool) or npts < 2:
            errors.append(f"spectrum.n_points must be an integer >= 2, got {npts!r}")
            npts = 2001
        opts["n_points"] = npts
    elif command == "simulate":
        opts["t_end"] = _get_number(table, "t_end_us", errors, "simulate", default=0.0)
        opts["dt"] = _get_number(table, "dt_us", errors, "simulate", default=0.0)
    elif command == "sweep":
        deltas = table.get("deltas_mhz")
        if not isinstance(deltas, list) or not deltas or not all(
            isinstance(d, (int, float)) and not isinstance(d, bool) and d > 0 for d in deltas
        ):
            errors.append("sweep.deltas_mhz must be a non-empty list of positive numbers")
            deltas = []
        opts["deltas"] = [float(d) for d in deltas]
        reopt = table.get("reoptimize_kappa", False)
        if not isinstance(reopt, bool):
            errors.append("sweep.reoptimize_kappa must be a boolean")
            reopt = False
        opts["reoptimize_kappa"] = reopt
        opts["dt_per_period"] = _get_number(table, "dt_per_period", errors, "sweep", default=0.0)
    elif command == "match":
        bounds = table.get("bounds_mhz")
        if bounds is not None:
            ok = (
                isinstance(bounds, list)
                and len(bounds) == 2
                and all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds)
                and 0 < bounds[0] < bounds[1]
            )
            if not ok:
                errors.append("match.bounds_mhz must be [lo, hi] with 0 < lo < hi")
                bounds = None
            else:
                bounds = (float(bounds[0]), float(bounds[1]))
        opts["bounds"] = bounds
    elif command == "fit":
        opts["target_eta"] = _get_number(table, "target_eta", errors, "fit")
        opts["target_echo_time"] = _get_number(table, "target_echo_time_us", errors, "fit", positive=True)
        free = table.get("free", ["g", "gamma"])
        if not isinstance(free, list) or not all(isinstance(f, str) for f in free) or not free:
            errors.append("fit.free must be a non-empty list of parameter names")
            free = []
        opts["free"] = free
        budget = table.get("budget", 500)
        if not isinstance(budget, int) or isinstance(budget, bool) or budget < 1:
            errors.append("fit.budget must be a positive integer")
            budget = 500
        opts["budget"] = budget
    elif command == "compare":
        opts["open_multiplier"] = _get_number(
            table, "open_multiplier", errors, "compare", default=10.0, positive=True
        )
    return opts


def load_scenario(path, out_dir=None) -> Scenario:
    """Parse and validate a scenario file, collecting every violation."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"scenario file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"scenario does not parse as TOML: {exc}")

    errors: list[str] = []
    present = [c for c in COMMANDS if c in doc]
    if len(present) != 1:
        errors.append(
            f"scenario must contain exactly one command block out of {COMMANDS}, found {present or 'none'}"
        )
    device = _parse_device(doc.get("device"), errors)
    pulse = _parse_pulse(doc.get("pulse"), device, errors)
    command = present[0] if len(present) == 1 else None
    options = _parse_options(command, doc.get(command, {}), errors) if command else {}

    out_tbl = doc.get("output", {})
    dir_value = out_dir if out_dir is not None else out_tbl.get("dir", "out")
    if not isinstance(dir_value, (str, os.PathLike)):
        errors.append(f"output.dir must be a path, got {dir_value!r}")
        dir_value = "out"

    if errors:
        raise ValidationError(errors)
    return Scenario(
        device=device,
        pulse=pulse,
        command=command,
        options=options,
        out_dir=Path(dir_value),
    )


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict) -> None:
    body = {"version": f"combecho {__version__}"}
    body.update(_round_floats(payload))
    write_atomic(path, json.dumps(body, indent=2) + "\n")


def write_csv_atomic(path: Path, serializer) -> None:
    """Run a to_csv-style serializer into a temp file, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        serializer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

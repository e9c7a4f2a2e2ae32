import pytest

from combecho import (
    CommonResonator,
    DeviceConfig,
    Pulse,
    build_uniform_comb,
    kappa_matched,
    matched_pulse,
    summarize_comb,
)


def make_device(n, spacing, coupling, gamma=0.0, gamma_r=0.0, kappa=None, centering="tooth_at_center"):
    """Uniform-comb device; kappa=None picks the analytic matching."""
    minis = build_uniform_comb(n, spacing, coupling, gamma, centering)
    if kappa is None:
        probe = DeviceConfig(minis, CommonResonator(kappa=1.0, decay_rate=gamma_r))
        kappa = kappa_matched(summarize_comb(probe), gamma_r)
    return DeviceConfig(minis, CommonResonator(kappa=kappa, decay_rate=gamma_r))


@pytest.fixture
def helium_device():
    """The low-temperature design point: g = spacing = 4, losses 1e-3."""
    return make_device(5, 4.0, 4.0, gamma=1e-3, gamma_r=1e-3)


@pytest.fixture
def helium_pulse(helium_device):
    return matched_pulse(helium_device.minis)


@pytest.fixture
def comb13_device():
    """5 teeth at 13 MHz spacing, matched coupling, small losses."""
    return make_device(5, 13.0, 13.0, gamma=1e-3, gamma_r=1e-3)


@pytest.fixture
def comb13_pulse(comb13_device):
    return matched_pulse(comb13_device.minis)


@pytest.fixture
def narrow_pulse():
    return Pulse(shape="gaussian", amplitude=1.0, center_time=0.1, power_fwhm=0.02)

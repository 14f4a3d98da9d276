import numpy as np
import pytest

from pwm_coreloss.signal import TimeSeries


def closed_grid(n_per_period: int, periods: int = 1, period: float = 1.0):
    """Closed-layout sample times: ``periods * n + 1`` samples, last == first + span."""
    dt = period / n_per_period
    return np.arange(periods * n_per_period + 1) * dt, dt


def series(fn, n_per_period=10_000, periods=1, period=1.0, unit=""):
    t, dt = closed_grid(n_per_period, periods, period)
    return TimeSeries(0.0, dt, fn(t), unit)


@pytest.fixture
def sine_1hz():
    return series(lambda t: np.sin(2 * np.pi * t))


def fine_spwm(vdc, f0, ratio, m, n):
    """Independent comparator on its own grid (start-of-cell samples, no mirroring)."""
    t = np.arange(n) / (n * f0)
    phase = np.mod(t * ratio * f0 + 0.75, 1.0)  # triangle rising through 0 at t = 0
    carrier = 4 * np.abs(phase - 0.5) - 1
    return t, np.where(m * np.sin(2 * np.pi * f0 * t) >= carrier, vdc, -vdc)

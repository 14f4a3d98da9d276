"""Excitation waveforms for the no-load full-bridge test and its inductor current."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import NumericError, ValidationError
from .signal import TimeSeries, integrate


@dataclass(frozen=True)
class SpwmConfig:
    """Bipolar sine-triangle PWM with a synchronized carrier (``f_sw = ratio * f0``)."""

    vdc: float
    f0: float
    ratio: int
    m: float = 0.8
    samples_per_sw_cycle: int = 1000

    def __post_init__(self):
        if not self.vdc > 0:
            raise ValidationError(f"excitation.vdc must be positive, got {self.vdc}")
        if not self.f0 > 0:
            raise ValidationError(f"excitation.f0_hz must be positive, got {self.f0}")
        if int(self.ratio) != self.ratio or self.ratio < 2:
            raise ValidationError(f"excitation.ratio must be an integer >= 2, got {self.ratio}")
        if not 0 <= self.m <= 1:
            raise ValidationError(f"excitation.m must lie in [0, 1], got {self.m}")
        if int(self.samples_per_sw_cycle) != self.samples_per_sw_cycle or self.samples_per_sw_cycle < 100:
            raise ValidationError(
                f"excitation.samples_per_sw_cycle must be an integer >= 100, got {self.samples_per_sw_cycle}"
            )
        if (self.ratio * self.samples_per_sw_cycle) % 2:
            # the half-wave mirror below needs an even sample count per period
            raise ValidationError("excitation.ratio * excitation.samples_per_sw_cycle must be even")
        object.__setattr__(self, "ratio", int(self.ratio))
        object.__setattr__(self, "samples_per_sw_cycle", int(self.samples_per_sw_cycle))

    @property
    def f_sw(self) -> float:
        return self.ratio * self.f0

    @property
    def samples_per_period(self) -> int:
        return self.ratio * self.samples_per_sw_cycle

    @property
    def dt(self) -> float:
        return 1.0 / (self.f0 * self.samples_per_period)


@dataclass(frozen=True)
class SineConfig:
    amplitude: float
    f: float
    cycles: int = 1
    samples_per_cycle: int = 10000

    def __post_init__(self):
        if self.amplitude < 0 or not math.isfinite(self.amplitude):
            raise ValidationError(f"sine amplitude must be >= 0, got {self.amplitude}")
        if not self.f > 0:
            raise ValidationError(f"sine frequency must be positive, got {self.f}")
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ValidationError(f"sine cycles must be an integer >= 1, got {self.cycles}")
        if int(self.samples_per_cycle) != self.samples_per_cycle or self.samples_per_cycle < 1000:
            raise ValidationError(f"samples_per_cycle must be an integer >= 1000, got {self.samples_per_cycle}")

    @property
    def dt(self) -> float:
        return 1.0 / (self.f * self.samples_per_cycle)


def triangle_carrier(t: np.ndarray, f_sw: float) -> np.ndarray:
    """Unit triangle with a rising zero crossing at ``t = 0`` (odd in ``t``)."""
    u = np.mod(np.asarray(t) * f_sw, 1.0)
    return np.where(u < 0.25, 4 * u, np.where(u < 0.75, 2 - 4 * u, 4 * u - 4))


def synth_spwm(cfg: SpwmConfig, cycles: int = 1) -> TimeSeries:
    """Two-level full-bridge SPWM voltage over ``cycles`` fundamental periods.

    Samples sit at the cell midpoints ``(k + 1/2) * dt`` so no sample lands on
    the reference zero crossings.  The waveform is odd about ``t = 0``; the
    second half of each period is mirrored from the first, which makes the
    volt-second sum over a period exactly zero.
    """
    if int(cycles) != cycles or cycles < 1:
        raise ValidationError(f"excitation.cycles must be an integer >= 1, got {cycles}")
    n = cfg.samples_per_period
    dt = cfg.dt
    half = n // 2
    t = (np.arange(half) + 0.5) * dt
    ref = cfg.m * np.sin(2 * np.pi * cfg.f0 * t)
    first = np.where(ref >= triangle_carrier(t, cfg.f_sw), cfg.vdc, -cfg.vdc)
    period = np.concatenate([first, -first[::-1]])
    values = np.append(np.tile(period, int(cycles)), period[0])
    return TimeSeries(0.5 * dt, dt, values, "V")


def synth_sine(cfg: SineConfig, phase: float = 0.0) -> TimeSeries:
    """``amplitude * sin(2*pi*f*t + phase)`` sampled closed from ``t = 0``."""
    n = cfg.samples_per_cycle * int(cfg.cycles)
    t = np.arange(n + 1) * cfg.dt
    return TimeSeries(0.0, cfg.dt, cfg.amplitude * np.sin(2 * np.pi * cfg.f * t + phase), "V")


def synth_square(amplitude: float, f: float, cycles: int = 1, samples_per_cycle: int = 1000,
                 duty: float = 0.5) -> TimeSeries:
    """Two-level ``+/-amplitude`` square wave, positive for the first ``duty`` of each period."""
    if not 0 < duty < 1:
        raise ValidationError("duty must lie in (0, 1)")
    dt = 1.0 / (f * samples_per_cycle)
    k = np.arange(samples_per_cycle * int(cycles) + 1)
    frac = np.mod((k + 0.5) / samples_per_cycle, 1.0)
    return TimeSeries(0.5 * dt, dt, np.where(frac < duty, amplitude, -amplitude), "V")


def inductor_current(v: TimeSeries, inductance: float, r_series: float = 0.0,
                     tol: float = 1e-9, max_iter: int = 1000) -> TimeSeries:
    """Periodic steady-state current of ``L di/dt + R i = v``.

    ``R = 0``: the zero-mean integral of the DC-free voltage.  ``R > 0``: the
    trapezoidal (implicit) recurrence over one span, started from the fixed
    point of the period map.  The fixed point is solved in closed form and
    then refined by plain iteration until the period closes within ``tol``.
    """
    if not inductance > 0:
        raise ValidationError(f"inductance must be positive, got {inductance}")
    if r_series < 0:
        raise ValidationError(f"series resistance must be >= 0, got {r_series}")
    if r_series == 0:
        i = integrate(v, remove_dc=True).values / inductance
        i = i - np.trapezoid(i, dx=v.dt) / v.span
        return v.with_values(i, "A")

    a = r_series * v.dt / (2 * inductance)
    r = (1 - a) / (1 + a)
    drive = np.zeros(v.n)
    drive[1:] = v.dt / (2 * inductance * (1 + a)) * (v.values[1:] + v.values[:-1])

    def run(i0: float) -> np.ndarray:
        out, _ = lfilter([1.0], [1.0, -r], drive[1:], zi=[r * i0])
        return np.concatenate([[i0], out])

    steps = v.n - 1
    decay = r ** steps
    zero_start = run(0.0)
    i0 = zero_start[-1] / (1 - decay) if decay < 1 else 0.0
    for _ in range(max_iter):
        i = run(i0)
        scale = max(float(np.max(np.abs(i))), 1e-300)
        if abs(i[-1] - i0) <= tol * scale:
            return v.with_values(i, "A")
        i0 = i[-1]
    raise NumericError(f"periodic inductor current did not converge in {max_iter} period iterations")

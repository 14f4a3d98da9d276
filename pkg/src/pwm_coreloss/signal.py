"""Uniformly sampled signals with trapezoidal calculus and coherent DFT helpers.

Periodic waveforms are stored *closed*: a series covering ``k`` periods of
``N`` samples each holds ``k*N + 1`` samples, the last one repeating the
first.  With that layout the trapezoid rule over the span is the periodic
rectangle rule, which keeps volt-second and energy bookkeeping exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectralLeakageError, ValidationError


def _unit_times_seconds(unit: str) -> str:
    if not unit:
        return "s"
    if unit.endswith("/s"):
        return unit[:-2]
    return f"{unit}*s"


def _unit_per_second(unit: str) -> str:
    if not unit:
        return "1/s"
    if unit.endswith("*s"):
        return unit[:-2]
    return f"{unit}/s"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Immutable uniformly sampled scalar signal.

    ``values`` is stored as a read-only float64 array; ``unit`` is a free-form
    tag ("V", "A", "T", "A/m", "W", ...).
    """

    t0: float
    dt: float
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive and finite, got {self.dt!r}")
        if not math.isfinite(self.t0):
            raise ValidationError("t0 must be finite")
        if arr.size < 2:
            raise ValidationError(f"a time series needs at least 2 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("time series contains non-finite samples")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def span(self) -> float:
        """Duration covered by the samples, ``(n - 1) * dt``."""
        return self.dt * (self.values.size - 1)

    def with_values(self, values, unit: str | None = None) -> "TimeSeries":
        return TimeSeries(self.t0, self.dt, values, self.unit if unit is None else unit)

    def scaled(self, factor: float, unit: str | None = None) -> "TimeSeries":
        return self.with_values(self.values * factor, unit)

    def mean(self) -> float:
        """Trapezoidal time average over the span."""
        return float(np.trapezoid(self.values, dx=self.dt) / self.span)

    def aligned_with(self, other: "TimeSeries") -> bool:
        return (
            self.n == other.n
            and math.isclose(self.dt, other.dt, rel_tol=1e-9)
            and math.isclose(self.t0, other.t0, rel_tol=1e-9, abs_tol=1e-9 * self.dt)
        )


def require_aligned(*series: TimeSeries) -> None:
    first = series[0]
    for other in series[1:]:
        if not first.aligned_with(other):
            raise ValidationError(
                "series are not aligned (t0, dt and length must match): "
                f"({first.t0}, {first.dt}, {first.n}) vs ({other.t0}, {other.dt}, {other.n})"
            )


def integrate(x: TimeSeries, remove_dc: bool = False) -> TimeSeries:
    """Cumulative trapezoidal integral starting at zero.

    With ``remove_dc`` the trapezoidal mean of ``x`` is subtracted first, so a
    series covering whole periods integrates to a result that returns to its
    start value.
    """
    v = x.values
    if remove_dc:
        v = v - x.mean()
    out = np.empty_like(v)
    out[0] = 0.0
    np.cumsum(0.5 * x.dt * (v[1:] + v[:-1]), out=out[1:])
    return x.with_values(out, _unit_times_seconds(x.unit))


def differentiate(x: TimeSeries) -> TimeSeries:
    """Central differences inside, first-order one-sided at both ends."""
    if x.n < 3:
        raise ValidationError("differentiate needs at least 3 samples")
    return x.with_values(np.gradient(x.values, x.dt, edge_order=1), _unit_per_second(x.unit))


def mean_power(v: TimeSeries, i: TimeSeries) -> float:
    """Trapezoidal average of ``v * i`` over the common span."""
    require_aligned(v, i)
    return float(np.trapezoid(v.values * i.values, dx=v.dt) / v.span)


def period_samples(x: TimeSeries, f0: float) -> tuple[np.ndarray, int]:
    """Return the open (non-repeating) samples covering whole periods and the period count.

    Accepts both the closed layout (``(n-1)*dt`` spans the periods) and the open
    layout (``n*dt`` does).  The match must hold within half a sample.
    """
    if f0 <= 0:
        raise ValidationError("f0 must be positive")
    for samples, duration in ((x.values[:-1], x.span), (x.values, x.n * x.dt)):
        periods = duration * f0
        count = round(periods)
        if count >= 1 and abs(periods - count) / f0 <= 0.5 * x.dt * (1 + 1e-9):
            return samples, count
    raise SpectralLeakageError(
        f"series of {x.n} samples at dt={x.dt:g} s does not cover an integer number "
        f"of periods of {f0:g} Hz (spans {x.span * f0:.6f} periods)"
    )


def fft_fundamental(x: TimeSeries, f0: float) -> tuple[float, float]:
    """Peak amplitude and phase of the ``f0`` component.

    Phase follows ``A*cos(2*pi*f0*t + phase)`` with ``t`` the absolute sample
    time, so ``sin`` starting at ``t = 0`` has phase ``-pi/2``.  Rectangular
    window; the series must cover whole periods (see :func:`period_samples`).
    """
    samples, count = period_samples(x, f0)
    spec = np.fft.rfft(samples)
    n = samples.size
    if count >= spec.size:
        raise ValidationError("sample rate too low to resolve f0")
    c = spec[count]
    scale = 1.0 if (n % 2 == 0 and count == n // 2) else 2.0
    amplitude = scale * abs(c) / n
    if amplitude == 0.0:
        return 0.0, 0.0
    phase = math.atan2(c.imag, c.real) - 2 * math.pi * f0 * x.t0
    phase = math.remainder(phase, 2 * math.pi)
    return float(amplitude), float(phase)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided spectrum in peak-amplitude convention.

    ``bins[0]`` is the DC value; ``bins[k]`` for ``k >= 1`` is the complex
    amplitude ``A*exp(i*phase)`` of the component ``A*cos(2*pi*k*f0_bin*t + phase)``
    with ``t`` measured from ``t0``.
    """

    f0_bin: float
    bins: np.ndarray = field(repr=False)
    n_samples: int = 0


def spectrum(x: TimeSeries, f0: float | None = None) -> Spectrum:
    """Spectrum of the open samples; ``f0`` selects whole-period truncation."""
    if f0 is None:
        samples = x.values[:-1]
    else:
        samples, _ = period_samples(x, f0)
    n = samples.size
    raw = np.fft.rfft(samples) / n
    bins = raw.copy()
    bins[1:] *= 2.0
    if n % 2 == 0:
        bins[-1] = raw[-1]
    return Spectrum(f0_bin=1.0 / (n * x.dt), bins=bins, n_samples=n)


def synthesize(s: Spectrum, dt: float, t0: float = 0.0, unit: str = "") -> TimeSeries:
    """Inverse of :func:`spectrum`; returns the closed series (one extra sample)."""
    n = s.n_samples
    raw = s.bins.copy()
    raw[1:] /= 2.0
    if n % 2 == 0:
        raw[-1] = s.bins[-1]
    samples = np.fft.irfft(raw * n, n)
    return TimeSeries(t0, dt, np.append(samples, samples[0]), unit)

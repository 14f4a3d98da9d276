"""Half-loop segmentation of a flux waveform at dB/dt polarity reversals.

Each half-loop is priced as half of the symmetric full loop sharing its
peak-to-peak swing and equivalent frequency ``1 / (2 * duration)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExcitationError, ValidationError
from .signal import TimeSeries

SEGMENTATION_HEADER = ("idx_start", "idx_end", "direction", "delta_b_T", "duration_s", "f_eq_hz", "b_bias_T")


@dataclass(frozen=True)
class HalfLoop:
    """Monotone flux run between two turning points.

    Indices are into the source series; for a periodic source the last loop
    may wrap, in which case ``end_idx`` exceeds the period length and is read
    modulo it.
    """

    start_idx: int
    end_idx: int
    t_start: float
    duration: float
    b_start: float
    b_end: float

    @property
    def delta_b(self) -> float:
        return abs(self.b_end - self.b_start)

    @property
    def direction(self) -> str:
        return "rising" if self.b_end > self.b_start else "falling"

    @property
    def f_eq(self) -> float:
        return 1.0 / (2.0 * self.duration)

    @property
    def b_bias(self) -> float:
        return 0.5 * (self.b_start + self.b_end)


@dataclass(frozen=True)
class Segmentation:
    loops: tuple[HalfLoop, ...]
    source_length: int
    periodic: bool

    def __len__(self) -> int:
        return len(self.loops)

    def __iter__(self):
        return iter(self.loops)

    def boundaries(self) -> list[int]:
        return [lp.start_idx for lp in self.loops] + [self.loops[-1].end_idx]

    def signed_delta_b(self) -> float:
        return float(sum(lp.b_end - lp.b_start for lp in self.loops))

    def rows(self) -> list[tuple]:
        return [(lp.start_idx, lp.end_idx, lp.direction, lp.delta_b, lp.duration, lp.f_eq, lp.b_bias)
                for lp in self.loops]


def loop_coordinates(loop: HalfLoop) -> tuple[float, float, float]:
    """Loss-map coordinates ``(delta_b, f_eq, b_bias)``."""
    return loop.delta_b, loop.f_eq, loop.b_bias


def _is_periodic(v: np.ndarray) -> bool:
    swing = float(np.max(v) - np.min(v))
    return abs(v[-1] - v[0]) <= 1e-9 * max(swing, np.finfo(float).tiny)


def _filled_signs(d: np.ndarray, circular: bool) -> np.ndarray:
    s = np.sign(d)
    nz = np.flatnonzero(s)
    if nz.size == 0:
        return s
    # forward-fill zero slopes with the last non-zero slope
    idx = np.where(s != 0, np.arange(s.size), -1)
    idx = np.maximum.accumulate(idx)
    lead = idx < 0
    idx[lead] = nz[-1] if circular else nz[0]
    return s[idx]


def _turning_points(values: np.ndarray, circular: bool) -> list[int]:
    if circular:
        d = np.roll(values, -1) - values
        s = _filled_signs(d, True)
        change = s != np.roll(s, 1)
        return [int(k) for k in np.flatnonzero(change)]
    d = np.diff(values)
    s = _filled_signs(d, False)
    return [int(k) + 1 for k in np.flatnonzero(s[1:] != s[:-1])]


def segment(b: TimeSeries, min_delta_b: float | None = None, periodic: bool | None = None) -> Segmentation:
    """Split ``b`` into half-loops at strict sign changes of its discrete slope.

    ``periodic`` defaults to auto-detection (last sample repeats the first);
    a periodic source is treated as circular so the run straddling the span
    ends becomes one wrapped half-loop.  Runs whose swing is below
    ``min_delta_b`` (default ``1e-4`` of the total swing) are merged into their
    neighbours.
    """
    values = b.values
    if periodic is None:
        periodic = _is_periodic(values)
    swing = float(np.max(values) - np.min(values))
    if min_delta_b is None:
        min_delta_b = 1e-4 * swing
    if min_delta_b < 0:
        raise ValidationError("min_delta_b must be >= 0")

    if periodic:
        circ = values[:-1]
        period = circ.size
        tps = _turning_points(circ, True)
        if len(tps) < 2:
            raise DegenerateExcitationError("flux has fewer than 2 turning points; nothing to segment")

        def at(j: int) -> float:
            return float(circ[j % period])

        def bounds(points):
            return [(points[k], points[k + 1]) for k in range(len(points) - 1)] + [(points[-1], points[0] + period)]
    else:
        inner = _turning_points(values, False)
        tps = [0] + inner + [values.size - 1]
        if len(tps) < 3:
            raise DegenerateExcitationError("flux has no turning point; nothing to segment")

        def at(j: int) -> float:
            return float(values[j])

        def bounds(points):
            return list(zip(points[:-1], points[1:]))

    while True:
        runs = bounds(tps)
        swings = [abs(at(e) - at(s)) for s, e in runs]
        k = int(np.argmin(swings))
        if swings[k] >= min_delta_b and swings[k] > 0:
            break
        if periodic:
            if len(tps) <= 2:
                raise DegenerateExcitationError("all flux runs are below min_delta_b")
            drop = {k, (k + 1) % len(tps)}
            tps = [p for j, p in enumerate(tps) if j not in drop]
            if len(tps) < 2:
                raise DegenerateExcitationError("all flux runs are below min_delta_b")
        else:
            if len(tps) <= 3:
                raise DegenerateExcitationError("all flux runs are below min_delta_b")
            if k == 0:
                del tps[1]
            elif k == len(runs) - 1:
                del tps[-2]
            else:
                del tps[k:k + 2]

    loops = tuple(
        HalfLoop(start_idx=s, end_idx=e, t_start=b.t0 + s * b.dt, duration=(e - s) * b.dt,
                 b_start=at(s), b_end=at(e))
        for s, e in bounds(tps)
    )
    return Segmentation(loops=loops, source_length=values.size, periodic=periodic)


def reconstruct(seg: Segmentation, b: TimeSeries) -> TimeSeries:
    """Piecewise-linear flux through the turning points, on the source sample grid."""
    idx = np.array(seg.boundaries(), dtype=float)
    vals = np.array([lp.b_start for lp in seg.loops] + [seg.loops[-1].b_end])
    j = np.arange(b.n, dtype=float)
    if seg.periodic:
        period = b.n - 1
        j = np.where(j < idx[0], j + period, j)
    return b.with_values(np.interp(j, idx, vals))

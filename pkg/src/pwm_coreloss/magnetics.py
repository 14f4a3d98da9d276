"""Electrical-to-magnetic mapping for a two-winding component and loop energies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .signal import TimeSeries, integrate, require_aligned

log = logging.getLogger(__name__)

CHARGING = 1
DISCHARGING = -1
NEUTRAL = 0


@dataclass(frozen=True)
class CoreSpec:
    """Winding and effective-geometry data.

    ``n1`` drives the core, ``n2`` is the open sense winding.  Effective
    parameters need not multiply exactly, so an ``ae * le`` vs ``ve`` mismatch
    above 20 % only logs a warning.
    """

    n1: float
    n2: float
    ae: float
    le: float
    ve: float
    name: str = ""

    def __post_init__(self):
        for key, value in (("n1", self.n1), ("n2", self.n2), ("ae_m2", self.ae),
                           ("le_m", self.le), ("ve_m3", self.ve)):
            if not value > 0:
                raise ValidationError(f"core.{key} must be positive, got {value}")
        if abs(self.ae * self.le / self.ve - 1) > 0.2:
            log.warning("core %s: ae*le = %.4g m3 differs from ve = %.4g m3 by more than 20%%",
                        self.name or "?", self.ae * self.le, self.ve)


@dataclass(frozen=True)
class BhTrajectory:
    b: TimeSeries
    h: TimeSeries

    def __post_init__(self):
        require_aligned(self.b, self.h)

    def is_closed(self, tol: float = 1e-6) -> bool:
        return abs(self.b.values[-1] - self.b.values[0]) <= tol


@dataclass(frozen=True)
class LoopEnergyBreakdown:
    """Per-cycle split of a trajectory's loop energy into minor and remaining parts."""

    e_total: float
    e_minor: float
    e_major_plus_reactive: float

    @classmethod
    def from_totals(cls, e_total: float, e_minor: float) -> "LoopEnergyBreakdown":
        return cls(e_total, e_minor, e_total - e_minor)


def flux_density(v_sec: TimeSeries, core: CoreSpec, remove_dc: bool = True) -> TimeSeries:
    """``B(t)`` from the sense-winding voltage; centred on zero when ``remove_dc``."""
    b = integrate(v_sec, remove_dc=remove_dc).values / (core.n2 * core.ae)
    if remove_dc:
        b = b - np.trapezoid(b, dx=v_sec.dt) / v_sec.span
    return v_sec.with_values(b, "T")


def to_bh(v_sec: TimeSeries, i_pri: TimeSeries, core: CoreSpec, remove_dc: bool = True) -> BhTrajectory:
    require_aligned(v_sec, i_pri)
    h = i_pri.with_values(core.n1 * i_pri.values / core.le, "A/m")
    return BhTrajectory(flux_density(v_sec, core, remove_dc), h)


def segment_energy(traj: BhTrajectory, i0: int, i1: int, core: CoreSpec) -> float:
    """``ve * integral(H dB)`` between two sample indices, trapezoid in ``B``.

    Positive when energy flows into the core.
    """
    n = traj.b.n
    if not (0 <= i0 < i1 < n):
        raise ValidationError(f"segment indices must satisfy 0 <= i0 < i1 < {n}, got ({i0}, {i1})")
    b = traj.b.values[i0:i1 + 1]
    h = traj.h.values[i0:i1 + 1]
    return float(core.ve * np.sum(0.5 * (h[1:] + h[:-1]) * np.diff(b)))


def loop_energy(traj: BhTrajectory, core: CoreSpec) -> float:
    """Energy over the whole trajectory (one closed loop for a periodic span)."""
    return segment_energy(traj, 0, traj.b.n - 1, core)


def classify_phase(v: TimeSeries, i: TimeSeries) -> np.ndarray:
    """Per-sample ``+1`` charging (v*i > 0), ``-1`` discharging, ``0`` neutral."""
    require_aligned(v, i)
    return np.sign(v.values * i.values).astype(np.int8)

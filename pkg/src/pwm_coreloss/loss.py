"""Core-loss evaluators: Steinmetz power law, iGSE and tabular loss maps.

All densities are volumetric.  Loop energies are per full symmetric loop in
J/m^3; a half-loop is charged half of the full loop at its ``(f_eq, delta_b)``.
``b_bias`` is accepted everywhere; the Steinmetz backend ignores it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .cwh import HalfLoop
from .errors import OutOfRangeError, ValidationError
from .magnetics import CoreSpec
from .signal import TimeSeries, differentiate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SteinmetzParams:
    """``P = k * f**alpha * B_pk**beta`` with ``f`` in Hz and ``B_pk`` in T."""

    k: float
    alpha: float
    beta: float
    valid_f: tuple[float, float] = (0.0, math.inf)
    valid_b: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"backend.k must be positive, got {self.k}")
        if not 1 <= self.alpha <= 3:
            log.warning("alpha = %g is outside the usual [1, 3] range", self.alpha)
        if not 2 <= self.beta <= 4:
            log.warning("beta = %g is outside the usual [2, 4] range", self.beta)

    def scaled(self, factor: float) -> "SteinmetzParams":
        return SteinmetzParams(self.k * factor, self.alpha, self.beta, self.valid_f, self.valid_b)

    @property
    def ki(self) -> float:
        """iGSE coefficient for the half-swing form ``|dB/dt|**alpha * (dB/2)**(beta-alpha)``."""
        cos_integral = 2 * math.sqrt(math.pi) * math.gamma((self.alpha + 1) / 2) / math.gamma(self.alpha / 2 + 1)
        return self.k / ((2 * math.pi) ** (self.alpha - 1) * cos_integral)

    def _check_range(self, f: float, b: float) -> None:
        if not (self.valid_f[0] <= f <= self.valid_f[1]):
            log.warning("f = %g Hz outside the Steinmetz validity range %s", f, self.valid_f)
        if not (self.valid_b[0] <= b <= self.valid_b[1]):
            log.warning("B = %g T outside the Steinmetz validity range %s", b, self.valid_b)


def se_power_density(p: SteinmetzParams, f: float, b_pk: float) -> float:
    if not (f > 0 and b_pk > 0):
        raise ValidationError(f"frequency and peak flux must be positive, got f={f}, b_pk={b_pk}")
    p._check_range(f, b_pk)
    return p.k * f ** p.alpha * b_pk ** p.beta


def igse_power_density(p: SteinmetzParams, b: TimeSeries) -> float:
    """Time-averaged iGSE density over the span of ``b`` (one loop, global swing)."""
    swing = float(np.max(b.values) - np.min(b.values))
    if swing == 0:
        log.warning("iGSE on a constant flux waveform; returning zero loss")
        return 0.0
    rate = np.abs(differentiate(b).values) ** p.alpha
    return float(p.ki * (swing / 2) ** (p.beta - p.alpha) * np.trapezoid(rate, dx=b.dt) / b.span)


def triangle_loop_energy(p: SteinmetzParams, f: float, delta_b: float) -> float:
    """Closed-form iGSE energy density (J/m^3) of one symmetric triangular loop."""
    if delta_b <= 0:
        return 0.0
    if f <= 0:
        raise ValidationError("loop frequency must be positive")
    rate = 2 * delta_b * f
    return p.ki * rate ** p.alpha * (delta_b / 2) ** (p.beta - p.alpha) / f


class SteinmetzBackend:
    """Loop energies from iGSE on symmetric triangular flux."""

    def __init__(self, params: SteinmetzParams, name: str = "steinmetz"):
        self.params = params
        self.name = name

    def loop_energy_density(self, f_eq: float, delta_b: float, b_bias: float = 0.0) -> float:
        return triangle_loop_energy(self.params, f_eq, delta_b)

    def sine_power_density(self, f: float, b_pk: float) -> float:
        return se_power_density(self.params, f, b_pk)


@dataclass(frozen=True, eq=False)
class LossMapTable:
    """Full-loop energy density on a ``(f_eq, delta_b[, b_bias])`` grid.

    Interpolation is bilinear in ``log f`` and ``log delta_b`` on ``log E``
    (exact for power laws), linear in ``b_bias``.  Queries up to one decade
    outside the grid extrapolate; further out they raise unless ``clamp``.
    """

    f_axis: np.ndarray
    db_axis: np.ndarray
    energy: np.ndarray
    bias_axis: np.ndarray | None = None
    clamp: bool = False
    _interp: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        f = np.asarray(self.f_axis, dtype=float)
        db = np.asarray(self.db_axis, dtype=float)
        e = np.asarray(self.energy, dtype=float)
        axes = [f, db]
        if self.bias_axis is not None:
            axes.append(np.asarray(self.bias_axis, dtype=float))
        for name, ax in zip(("f_hz", "delta_b_T", "b_bias_T"), axes):
            if ax.ndim != 1 or ax.size < 1 or np.any(np.diff(ax) <= 0):
                raise ValidationError(f"loss-map axis {name} must be strictly increasing")
        if np.any(f <= 0) or np.any(db <= 0):
            raise ValidationError("loss-map f and delta_b axes must be positive")
        shape = tuple(ax.size for ax in axes)
        if e.shape != shape:
            raise ValidationError(f"loss-map grid has shape {e.shape}, expected {shape}")
        if np.any(e <= 0) or not np.all(np.isfinite(e)):
            raise ValidationError("loss-map energy densities must be positive and finite")
        object.__setattr__(self, "f_axis", f)
        object.__setattr__(self, "db_axis", db)
        object.__setattr__(self, "energy", e)
        if self.bias_axis is not None:
            object.__setattr__(self, "bias_axis", axes[2])
        # size-1 axes are dropped: the surface is constant along them
        live = [k for k, ax in enumerate(axes) if ax.size > 1]
        logs = [np.log(ax) if k < 2 else ax for k, ax in enumerate(axes)]
        values = np.log(e).reshape([ax.size for ax in axes])
        if live:
            squeezed = values.reshape([axes[k].size for k in live])
            interp = RegularGridInterpolator([logs[k] for k in live], squeezed,
                                             bounds_error=False, fill_value=None)
        else:
            interp = None
        object.__setattr__(self, "_interp", (interp, live, float(e.reshape(-1)[0])))

    def lookup(self, f_eq: float, delta_b: float, b_bias: float = 0.0) -> float:
        if not (f_eq > 0 and delta_b > 0):
            raise ValidationError("loss-map queries need positive f_eq and delta_b")
        interp, live, constant = self._interp
        if interp is None:
            return constant
        point = []
        for k in live:
            if k == 0:
                point.append(self._log_coord(math.log(f_eq), np.log(self.f_axis), "f_eq"))
            elif k == 1:
                point.append(self._log_coord(math.log(delta_b), np.log(self.db_axis), "delta_b"))
            else:
                point.append(float(np.clip(b_bias, self.bias_axis[0], self.bias_axis[-1])))
        return float(np.exp(interp([point])[0]))

    def _log_coord(self, x: float, axis: np.ndarray, name: str) -> float:
        lo, hi = axis[0], axis[-1]
        if lo <= x <= hi:
            return x
        if self.clamp:
            return float(min(max(x, lo), hi))
        if x < lo - math.log(10) or x > hi + math.log(10):
            raise OutOfRangeError(
                f"{name} = {math.exp(x):.6g} is more than one decade outside the loss map "
                f"[{math.exp(lo):.6g}, {math.exp(hi):.6g}]"
            )
        return x

    def scaled(self, factor: float) -> "LossMapTable":
        return LossMapTable(self.f_axis, self.db_axis, self.energy * factor, self.bias_axis, self.clamp)


class LossMapBackend:
    def __init__(self, table: LossMapTable, name: str = "lossmap"):
        self.table = table
        self.name = name

    def loop_energy_density(self, f_eq: float, delta_b: float, b_bias: float = 0.0) -> float:
        return self.table.lookup(f_eq, delta_b, b_bias)


def half_loop_loss(backend, loop: HalfLoop, core: CoreSpec) -> float:
    """Energy (J) of one half-loop: half the symmetric full loop at its coordinates."""
    return 0.5 * backend.loop_energy_density(loop.f_eq, loop.delta_b, loop.b_bias) * core.ve


def synth_loss_map(p: SteinmetzParams, f_axis, db_axis) -> LossMapTable:
    """Loss map filled with closed-form iGSE triangular-loop energies."""
    f = np.asarray(f_axis, dtype=float)
    db = np.asarray(db_axis, dtype=float)
    grid = np.array([[triangle_loop_energy(p, fi, dbj) for dbj in db] for fi in f])
    return LossMapTable(f, db, grid)

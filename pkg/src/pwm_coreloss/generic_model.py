"""Normalized instantaneous core-loss model: a truncated Fourier series over one cycle.

One excitation cycle maps onto one model period, so the model is evaluated
on phase ``theta`` in ``[0, 2*pi)`` and is independent of the excitation
frequency.  ``w`` is kept only as the fitted angular frequency in the
source's own time units (``t = theta / w``).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .signal import TimeSeries

log = logging.getLogger(__name__)

N_HARMONICS = 6


@dataclass(frozen=True)
class GenericLossModel:
    a0: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    w: float = 1.0
    phase_offset: float = 0.0
    material: str = ""
    normalized: bool = False
    r_squared: float | None = None

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValidationError("model a and b coefficient lists must have equal length")
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))

    @property
    def n_harmonics(self) -> int:
        return len(self.a)

    def raw(self, theta) -> np.ndarray:
        """Pre-clamp series value at phase ``theta``."""
        th = np.asarray(theta, dtype=float) + self.phase_offset
        out = np.full(th.shape, self.a0)
        for n, (an, bn) in enumerate(zip(self.a, self.b), start=1):
            out = out + an * np.cos(n * th) + bn * np.sin(n * th)
        return out

    def rescaled(self) -> "GenericLossModel":
        """Coefficients divided by ``a0`` so the period mean is exactly 1."""
        if self.a0 <= 0:
            raise ValidationError("cannot rescale a model with non-positive a0")
        s = 1.0 / self.a0
        return GenericLossModel(1.0, tuple(x * s for x in self.a), tuple(x * s for x in self.b),
                                self.w, self.phase_offset, self.material, True, self.r_squared)

    def with_phase(self, phase_offset: float) -> "GenericLossModel":
        return GenericLossModel(self.a0, self.a, self.b, self.w, phase_offset, self.material,
                                self.normalized, self.r_squared)

    def to_dict(self) -> dict:
        d = {"material": self.material, "a0": self.a0, "a": list(self.a), "b": list(self.b),
             "w": self.w, "phase_offset": self.phase_offset, "normalized": self.normalized}
        if self.r_squared is not None:
            d["r_squared"] = self.r_squared
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenericLossModel":
        try:
            return cls(float(d["a0"]), tuple(d["a"]), tuple(d["b"]), float(d.get("w", 1.0)),
                       float(d.get("phase_offset", 0.0)), str(d.get("material", "")),
                       bool(d.get("normalized", False)), d.get("r_squared"))
        except KeyError as exc:
            raise ValidationError(f"model file is missing key {exc.args[0]!r}") from None

    def check_material(self, material: str) -> None:
        if self.material and material and material.lower() != self.material.lower():
            log.warning("generic model was fitted for %s but is applied to %s", self.material, material)


# Mix-26 (T300-26D) sinusoidal-excitation fit
TABLE_VII = GenericLossModel(
    a0=0.98,
    a=(-0.25, 0.51, 0.038, -0.63, 0.017, -0.21),
    b=(-0.018, 0.54, -0.0438, 0.43, -0.029, 0.041),
    w=0.61,
    material="Mix-26",
)

PRESETS = {"mix26": TABLE_VII, "table-vii": TABLE_VII}


def load_model(path) -> GenericLossModel:
    with open(path, encoding="utf-8") as fh:
        return GenericLossModel.from_dict(json.load(fh))


def save_model(model: GenericLossModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def evaluate(m: GenericLossModel, theta) -> tuple[np.ndarray, np.ndarray]:
    """``(clamped, raw)`` model values; clamping floors negative dips at zero."""
    raw = m.raw(theta)
    return np.maximum(raw, 0.0), raw


def clamp_fraction(m: GenericLossModel, samples: int = 4096) -> float:
    """Share of the period where the raw series is negative."""
    theta = 2 * np.pi * np.arange(samples) / samples
    return float(np.mean(m.raw(theta) < 0))


def normalize(p: TimeSeries) -> TimeSeries:
    """Divide by the period mean so the result averages to one."""
    mean = p.mean()
    if not mean > 0:
        raise ValidationError(
            f"loss trace has non-positive mean {mean:g} W; reactive power is leaking into the measurement"
        )
    return p.with_values(p.values / mean, "")


@dataclass(frozen=True)
class NormalizedLossSet:
    """Unit-mean loss traces, each covering exactly one excitation cycle from its zero crossing."""

    members: tuple[tuple[str, TimeSeries], ...] = field(default_factory=tuple)

    @classmethod
    def from_traces(cls, traces) -> "NormalizedLossSet":
        return cls(tuple((label, normalize(p)) for label, p in traces))

    def __len__(self) -> int:
        return len(self.members)


def _phase_grid(p: TimeSeries) -> np.ndarray:
    n = p.n - 1
    return 2 * np.pi * np.arange(n) / n


def fit(sets: NormalizedLossSet, n_harmonics: int = N_HARMONICS, material: str = "",
        w: float = 1.0) -> tuple[GenericLossModel, float]:
    """Average the traces on a common phase grid, then least-squares fit the Fourier series.

    The common grid is the first member's; members sampled differently are
    resampled by periodic linear interpolation.
    """
    if len(sets) == 0:
        raise ValidationError("fit needs at least one operating point")
    grid = _phase_grid(sets.members[0][1])
    if grid.size < 2 * n_harmonics + 1:
        raise ValidationError(f"need at least {2 * n_harmonics + 1} samples per cycle to fit {n_harmonics} harmonics")
    acc = np.zeros(grid.size)
    for _, p in sets.members:
        vals = p.values[:-1]
        if vals.size == grid.size:
            acc += vals
        else:
            acc += np.interp(grid, _phase_grid(p), vals, period=2 * np.pi)
    y = acc / len(sets)

    cols = [np.ones_like(grid)]
    for n in range(1, n_harmonics + 1):
        cols += [np.cos(n * grid), np.sin(n * grid)]
    basis = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    resid = y - basis @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    if r2 < 0.9:
        log.warning("generic model fit quality is poor: r^2 = %.4f", r2)
    model = GenericLossModel(float(coef[0]), tuple(coef[1::2]), tuple(coef[2::2]), w, 0.0, material,
                             False, r2)
    return model, r2


def _cycle_weights(m: GenericLossModel, n_cycles: int, points_per_cycle: int) -> np.ndarray:
    # composite Simpson on the clamped series, per switching cycle
    k = points_per_cycle + (points_per_cycle % 2)
    edges = np.linspace(0.0, 2 * np.pi, n_cycles + 1)
    out = np.empty(n_cycles)
    for j in range(n_cycles):
        th = np.linspace(edges[j], edges[j + 1], k + 1)
        y = np.maximum(m.raw(th), 0.0)
        h = (edges[j + 1] - edges[j]) / k
        out[j] = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
    return out


def distribute(m: GenericLossModel, q_total: float, n_cycles: int, points_per_cycle: int = 512) -> list[float]:
    """Split ``q_total`` over ``n_cycles`` equal slices of the cycle in proportion to the clamped model."""
    if q_total < 0:
        raise ValidationError("q_total must be >= 0")
    if int(n_cycles) != n_cycles or n_cycles < 1:
        raise ValidationError("n_cycles must be an integer >= 1")
    n_cycles = int(n_cycles)
    if q_total == 0:
        return [0.0] * n_cycles
    w = _cycle_weights(m, n_cycles, points_per_cycle)
    total = w.sum()
    if not total > 0:
        log.warning("clamped generic model is zero everywhere; distributing uniformly")
        w = np.ones(n_cycles)
        total = float(n_cycles)
    parts = [float(q_total * x / total) for x in w]
    # absorb rounding in the largest entry so the sum is exact
    big = int(np.argmax(parts))
    parts[big] = q_total - math.fsum(parts[:big] + parts[big + 1:])
    return parts

"""Virtual full-reactive-cancellation testbench.

The device under test (core-loss resistance ``r_c`` in series with its
magnetizing inductance ``l_m1``) is driven in series with an air-core
reference coil ``l_m2``; both are sensed through 1:1 open secondaries, so
winding resistance and leakage never appear in the sensed voltages.

Sign convention: ``v_diff = v_iut - v_ref = r_c*i + (l_m1 - l_m2)*di/dt``,
which makes the matched case purely resistive with ``p = v_diff * i >= 0``.

A constant ``r_c`` can only produce a ``sin**2``-shaped loss under sine
drive; asymmetric charge/discharge shapes come from the generic model, not
from this circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .excitation import SineConfig, inductor_current, synth_sine
from .magnetics import CoreSpec, classify_phase
from .signal import TimeSeries, differentiate, require_aligned


@dataclass(frozen=True)
class CancellationCircuit:
    r_c: float
    l_m1: float
    l_m2: float
    r_cu1: float = 0.0
    r_cu2: float = 0.0
    l_p: float = 0.0

    def __post_init__(self):
        if self.r_c < 0:
            raise ValidationError(f"cancel.r_c_ohm must be >= 0, got {self.r_c}")
        if not (self.l_m1 > 0 and self.l_m2 > 0):
            raise ValidationError("cancel.l_m1_h and cancel.l_m2_h must be positive")

    @property
    def mismatch(self) -> float:
        return self.l_m2 - self.l_m1

    def matched(self) -> "CancellationCircuit":
        return CancellationCircuit(self.r_c, self.l_m1, self.l_m1, self.r_cu1, self.r_cu2, self.l_p)


@dataclass(frozen=True)
class CancellationTrace:
    i_pri: TimeSeries
    v_iut_m2: TimeSeries
    v_ref_m2: TimeSeries
    v_diff: TimeSeries
    p_inst: TimeSeries
    e_total: float
    e_charge: float
    e_discharge: float
    # split by flux direction (di/dt sign): rising vs falling half of the loop
    e_pos_half: float
    e_neg_half: float

    @property
    def peak_power(self) -> float:
        return float(np.max(np.abs(self.p_inst.values)))


def _weights(x: TimeSeries) -> np.ndarray:
    w = np.full(x.n, x.dt)
    w[0] = w[-1] = 0.5 * x.dt
    return w


def _split(p: np.ndarray, w: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    """Exact two-way split of the trapezoid sum; neutral samples go half to each side."""
    e = p * w
    pos = float(np.sum(e[mask > 0]) + 0.5 * np.sum(e[mask == 0]))
    neg = float(np.sum(e[mask < 0]) + 0.5 * np.sum(e[mask == 0]))
    return pos, neg


def trace_from_voltages(i_pri: TimeSeries, v_iut: TimeSeries, v_ref: TimeSeries,
                        v_diff: TimeSeries | None = None) -> CancellationTrace:
    """Assemble a trace from sensed voltages (simulated or measured)."""
    require_aligned(i_pri, v_iut, v_ref)
    if v_diff is None:
        v_diff = v_iut.with_values(v_iut.values - v_ref.values, "V")
    require_aligned(i_pri, v_diff)
    p = v_diff.values * i_pri.values
    w = _weights(i_pri)
    e_total = float(np.sum(p * w))
    e_charge, e_discharge = _split(p, w, classify_phase(v_iut, i_pri))
    direction = np.sign(differentiate(i_pri).values) if i_pri.n >= 3 else np.zeros(i_pri.n)
    e_pos, e_neg = _split(p, w, direction)
    return CancellationTrace(i_pri, v_iut, v_ref, v_diff, i_pri.with_values(p, "W"),
                             e_total, e_charge, e_discharge, e_pos, e_neg)


def post_process(i_pri: TimeSeries, v_diff: TimeSeries, v_iut: TimeSeries | None = None) -> CancellationTrace:
    """Measured mode: ``p = v_diff * i`` straight from a captured difference channel.

    Without a ``v_iut`` channel the charge/discharge split uses ``v_diff``.
    """
    require_aligned(i_pri, v_diff)
    if v_iut is None:
        v_iut = v_diff
    v_ref = v_iut.with_values(v_iut.values - v_diff.values, "V")
    return trace_from_voltages(i_pri, v_iut, v_ref, v_diff)


def run(c: CancellationCircuit, i_pri: TimeSeries) -> CancellationTrace:
    di = differentiate(i_pri).values
    i = i_pri.values
    v_iut = i_pri.with_values(c.r_c * i + c.l_m1 * di, "V")
    v_ref = i_pri.with_values(c.l_m2 * di, "V")
    return trace_from_voltages(i_pri, v_iut, v_ref)


def error_bound(c: CancellationCircuit, i_pri: TimeSeries) -> TimeSeries:
    """Instantaneous power error caused by inductance mismatch.

    Equal to ``run(c).p_inst - run(c.matched()).p_inst``; its magnitude is
    ``|l_m2 - l_m1| * |di/dt * i|``.
    """
    di = differentiate(i_pri).values
    return i_pri.with_values((c.l_m1 - c.l_m2) * di * i_pri.values, "W")


def mismatch_sweep(c: CancellationCircuit, i_pri: TimeSeries, delta_l) -> list[tuple[float, float]]:
    """Peak ``|error|`` for each reference-coil offset ``l_m2 = l_m1 + dl``."""
    out = []
    for dl in delta_l:
        trial = CancellationCircuit(c.r_c, c.l_m1, c.l_m1 + dl, c.r_cu1, c.r_cu2, c.l_p)
        out.append((float(dl), float(np.max(np.abs(error_bound(trial, i_pri).values)))))
    return out


def drive_amplitude(core: CoreSpec, f: float, b_pk: float) -> float:
    """Primary sine voltage amplitude that produces peak flux ``b_pk``."""
    return 2 * math.pi * f * core.n1 * core.ae * b_pk


def calibrate_circuit(sine: SineConfig, power_w: float, l_m1: float, l_m2: float | None = None) -> CancellationCircuit:
    """Pick ``r_c = 2 * P / I_pk**2`` so the circuit dissipates ``power_w`` at this operating point."""
    if power_w < 0:
        raise ValidationError("calibration power must be >= 0")
    i_pk = sine.amplitude / (2 * math.pi * sine.f * l_m1)
    r_c = 0.0 if i_pk == 0 else 2 * power_w / i_pk ** 2
    return CancellationCircuit(r_c, l_m1, l_m1 if l_m2 is None else l_m2)


def emulate_major_loop(core: CoreSpec, c: CancellationCircuit, sine: SineConfig) -> float:
    """Per-cycle loss energy of the equivalent sinusoid, read from the cancellation ``p(t)``."""
    v = synth_sine(sine)
    if sine.amplitude == 0:
        return 0.0
    i = inductor_current(v, c.l_m1, c.r_c)
    return run(c, i).e_total / sine.cycles


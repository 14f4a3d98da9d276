import logging
import math

import numpy as np
import pytest

from pwm_coreloss import pipeline as pl
from pwm_coreloss.errors import DegenerateExcitationError, ValidationError
from pwm_coreloss.excitation import SineConfig, SpwmConfig, synth_spwm, synth_square
from pwm_coreloss.generic_model import TABLE_VII, GenericLossModel
from pwm_coreloss.loss import SteinmetzBackend, se_power_density, triangle_loop_energy
from pwm_coreloss.magnetics import flux_density
from pwm_coreloss.presets import (SYNTHETIC_MIX26, TABLE_V, TABLE_V_DENSITY_MW_PER_CM3, TABLE_V_INDUCTANCE,
                                  core_preset)
from pwm_coreloss.signal import TimeSeries

T300 = core_preset("T300-26D")
BACKEND = SteinmetzBackend(SYNTHETIC_MIX26)
FLAT = GenericLossModel(1.0, (0.0,) * 6, (0.0,) * 6)


class TestMethod1:
    def test_table_vi_difference(self):
        assert pl.method1_major(5637e-6, 2905e-6) == pytest.approx(2732e-6, abs=1e-15)

    def test_equal_inputs(self):
        assert pl.method1_major(1.0, 1.0) == 0.0

    def test_negative_result_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert pl.method1_major(1.0, 2.0) == -1.0
        assert "exceeds total" in caplog.text

    def test_rejects_negative_inputs(self):
        with pytest.raises(ValidationError):
            pl.method1_major(-1.0, 0.0)


def test_cycle_index_uses_carrier_edges():
    assert pl.cycle_index(0.0, 0.0, 1.0, 4) == 0
    assert pl.cycle_index(3.999, 0.0, 1.0, 4) == 3
    assert pl.cycle_index(4.2, 0.0, 1.0, 4) == 0
    assert pl.cycle_index(1.2, 0.5, 1.0, 4) == 1


class TestMinorFlow:
    def test_square_wave_cycle_is_one_full_loop(self):
        f = 1e4
        v = synth_square(20.0, f, 1, 2000)
        per_cycle, seg = pl.minor_flow(v, T300, BACKEND, 1)
        db = float(np.ptp(flux_density(v, T300).values))
        assert len(seg) == 2
        assert per_cycle[0] == pytest.approx(triangle_loop_energy(SYNTHETIC_MIX26, f, db) * T300.ve, rel=1e-6)

    def test_table_v_profile(self):
        per_cycle, seg = pl.minor_flow(synth_spwm(TABLE_V), T300, BACKEND, 16)
        assert len(per_cycle) == 16 and len(seg) == 32
        assert all(x > 0 for x in per_cycle)
        x = np.array(per_cycle)
        peaks = np.flatnonzero((x > np.roll(x, 1)) & (x > np.roll(x, -1)))
        assert len(peaks) == 2
        # the two peaks sit half a fundamental period apart
        assert (peaks[1] - peaks[0]) % 16 in (7, 8, 9)

    def test_zero_excitation_is_degenerate(self):
        v = TimeSeries(0.0, 1e-6, np.zeros(1001), "V")
        with pytest.raises(DegenerateExcitationError):
            pl.minor_flow(v, T300, BACKEND, 4)


class TestMajorFlow:
    def test_datasheet_density(self):
        src = pl.DatasheetDensity.from_mw_per_cm3(109.3)
        core = core_preset("T300-26D")
        mf = pl.major_flow(synth_spwm(TABLE_V), 2500.0, core, src, TABLE_VII, 16)
        assert mf.q_total == pytest.approx(2.61e-3, rel=1e-3)
        assert math.fsum(mf.per_cycle) == pytest.approx(mf.q_total, rel=1e-12)

    def test_constant_model_is_uniform(self):
        mf = pl.major_flow(synth_spwm(TABLE_V), 2500.0, T300, SYNTHETIC_MIX26, FLAT, 16)
        assert np.allclose(mf.per_cycle, mf.q_total / 16, rtol=1e-12)

    def test_se_definition_chain(self):
        v = synth_spwm(TABLE_V)
        mf = pl.major_flow(v, 2500.0, T300, SYNTHETIC_MIX26, TABLE_VII, 16)
        vals, t = v.values[:-1], v.times[:-1]
        amp = abs(2 / vals.size * np.sum(vals * np.exp(-2j * np.pi * 2500.0 * t)))
        b_pk = amp / (2 * np.pi * 2500.0 * T300.n2 * T300.ae)
        assert mf.q_total == pytest.approx(se_power_density(SYNTHETIC_MIX26, 2500.0, b_pk) * T300.ve / 2500.0,
                                           rel=1e-9)


class TestWorkflow:
    def test_table_v_end_to_end(self):
        src = pl.DatasheetDensity.from_mw_per_cm3(TABLE_V_DENSITY_MW_PER_CM3)
        report, cmp = pl.run_workflow(TABLE_V, T300, BACKEND, TABLE_VII, src, inductance=TABLE_V_INDUCTANCE)
        assert len(report.rows) == 16
        assert all(r.e_minor > 0 and r.e_major > 0 for r in report.rows)
        assert report.e_grand_total == math.fsum(r.e_minor + r.e_major for r in report.rows)
        assert report.e_major_total == pytest.approx(report.metadata["q_total_J"], rel=1e-15)
        assert cmp.method2_emulated_J == pytest.approx(cmp.method2_datasheet_J, rel=0.01)
        assert report.metadata["leakage_flag"] is False

    def test_fixture_comparison(self):
        cmp = pl.fixture_comparison(5637e-6, 2905e-6, 2614e-6, 2658e-6)
        assert cmp.method1_J == pytest.approx(2732e-6, abs=1e-15)
        assert cmp.spread() < 0.05

    def test_measured_total_overrides_reference(self):
        _, cmp = pl.run_workflow(TABLE_V, T300, BACKEND, TABLE_VII, SYNTHETIC_MIX26, measured_total_J=5637e-6)
        assert cmp.method1_J > 0

    def test_pure_sine(self):
        b_pk = 0.1
        amp = 2 * np.pi * 2500.0 * T300.n2 * T300.ae * b_pk
        report, cmp = pl.run_workflow(SineConfig(amp, 2500.0), T300, BACKEND, TABLE_VII, SYNTHETIC_MIX26)
        assert len(report.rows) == 1 and report.rows[0].e_minor == 0.0
        assert report.metadata["half_loops"] == 0
        expected = se_power_density(SYNTHETIC_MIX26, 2500.0, b_pk) * T300.ve / 2500.0
        assert report.metadata["q_total_J"] == pytest.approx(expected, rel=1e-6)
        assert cmp.method1_J == pytest.approx(expected, rel=1e-6)

    def test_low_ratio_is_flagged(self, caplog):
        cfg = SpwmConfig(35.0, 2500.0, 4, 0.8, 1000)
        with caplog.at_level(logging.WARNING):
            report, _ = pl.run_workflow(cfg, T300, BACKEND, TABLE_VII, SYNTHETIC_MIX26)
        assert report.metadata["leakage_flag"] is True
        assert "sidebands" in caplog.text

    def test_discrepancy_shrinks_with_ratio(self):
        d = {}
        for ratio in (4, 16):
            cfg = SpwmConfig(35.0, 2500.0, ratio, 0.8, 1000)
            _, cmp = pl.run_workflow(cfg, T300, BACKEND, TABLE_VII, SYNTHETIC_MIX26)
            d[ratio] = cmp.discrepancy()
        assert d[16] < d[4]


def test_switching_average_of_constant_and_ripple():
    b = TimeSeries(0.0, 1.0, np.append(np.tile([1.0, -1.0], 50), 1.0))
    avg = pl.switching_average(b, 2)
    assert np.allclose(avg.values, 0.0)


def test_leakage_flag_rule():
    assert pl.leakage_flag(4) and pl.leakage_flag(7)
    assert not pl.leakage_flag(8) and not pl.leakage_flag(16)

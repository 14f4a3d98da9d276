import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from pwm_coreloss.cli import main
from pwm_coreloss.generic_model import TABLE_VII


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSynth:
    def test_table_i_row_count(self, tmp_path):
        assert main(["synth", "--preset", "table-i", "--out-dir", str(tmp_path)]) == 0
        assert len(rows(tmp_path / "waveform.csv")) - 1 == 8 * 1000

    def test_cycles_doubles_rows(self, tmp_path):
        main(["synth", "--preset", "table-i", "--out-dir", str(tmp_path / "a")])
        main(["synth", "--preset", "table-i", "--cycles", "2", "--out-dir", str(tmp_path / "b")])
        n1 = len(rows(tmp_path / "a" / "waveform.csv")) - 1
        n2 = len(rows(tmp_path / "b" / "waveform.csv")) - 1
        assert n2 == 2 * n1

    def test_invalid_ratio(self, tmp_path, capsys):
        assert main(["synth", "--ratio", "1", "--out-dir", str(tmp_path)]) == 2
        assert "excitation.ratio" in capsys.readouterr().err

    def test_optional_columns(self, tmp_path):
        main(["synth", "--preset", "table-v", "--set", "output.current=true", "--set", "output.flux=true",
              "--out-dir", str(tmp_path)])
        assert rows(tmp_path / "waveform.csv")[0] == ["time_s", "v_V", "i_A", "b_T"]


class TestEstimate:
    def test_table_v_preset(self, tmp_path):
        assert main(["estimate", "--preset", "table-v", "--out-dir", str(tmp_path)]) == 0
        report = rows(tmp_path / "report.csv")
        assert report[0] == ["cycle", "t_start_s", "e_minor_J", "e_major_J", "e_total_J"]
        assert len(report) - 1 == 16
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert all(summary["checks"].values())
        assert not list(tmp_path.glob("*.svg"))

    def test_plots_flag(self, tmp_path):
        main(["estimate", "--preset", "table-v", "--plots", "--out-dir", str(tmp_path)])
        assert sorted(p.name for p in tmp_path.glob("*.svg")) == ["bh.svg", "cycles.svg", "p_major.svg"]

    def test_missing_backend_file(self, tmp_path, capsys):
        code = main(["estimate", "--preset", "table-v", "--set", "backend.kind=lossmap",
                     "--set", f"backend.path={tmp_path / 'nope.csv'}", "--out-dir", str(tmp_path)])
        assert code == 4
        assert "backend.path" in capsys.readouterr().err

    def test_fixture_mode(self, tmp_path):
        main(["estimate", "--preset", "table-v", "--out-dir", str(tmp_path)] +
             [x for k, v in (("total_J", 5637e-6), ("minor_J", 2905e-6), ("datasheet_J", 2614e-6),
                             ("emulated_J", 2658e-6)) for x in ("--set", f"measured.{k}={v}")])
        cmp = json.loads((tmp_path / "summary.json").read_text())["comparison"]
        assert cmp["fixture_mode"] is True
        assert cmp["method1_J"] == pytest.approx(2732e-6, rel=1e-9)

    def test_loss_map_backend(self, tmp_path):
        main(["lossmap-gen", "--preset", "table-v", "--out-dir", str(tmp_path)])
        code = main(["estimate", "--preset", "table-v", "--set", "backend.kind=lossmap",
                     "--set", f"backend.path={tmp_path / 'lossmap.csv'}", "--out-dir", str(tmp_path / "o")])
        assert code == 0
        steinmetz = tmp_path / "s"
        main(["estimate", "--preset", "table-v", "--out-dir", str(steinmetz)])
        a = json.loads((tmp_path / "o" / "summary.json").read_text())["totals"]["e_minor_total_J"]
        b = json.loads((steinmetz / "summary.json").read_text())["totals"]["e_minor_total_J"]
        assert a == pytest.approx(b, rel=0.02)

    def test_config_file_and_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("[excitation]\nratio = 8\n[backend]\nk = 221.0\nalpha = 1.3\nbeta = 2.1\n")
        assert main(["estimate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
        assert len(rows(tmp_path / "report.csv")) - 1 == 8
        cfg.write_text("[excitation]\nratoi = 8\n")
        assert main(["estimate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
        assert "excitation.ratoi" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["estimate", "--config", str(tmp_path / "none.toml")]) == 4


class TestCancel:
    def test_matched_sine_identity(self, tmp_path):
        assert main(["cancel-sim", "--preset", "matched-sine", "--out-dir", str(tmp_path)]) == 0
        s = json.loads((tmp_path / "summary.json").read_text())
        assert s["e_charge_J"] + s["e_discharge_J"] == pytest.approx(s["e_total_J"], rel=1e-8)
        assert rows(tmp_path / "trace.csv")[0] == ["time_s", "i_pri_A", "v_iut_V", "v_ref_V", "v_diff_V", "p_W"]

    def test_sweep_monotone(self, tmp_path):
        main(["cancel-sim", "--preset", "matched-sine", "--sweep", "0,0.4e-6,4e-6", "--out-dir", str(tmp_path)])
        peak = [float(r[1]) for r in rows(tmp_path / "sweep.csv")[1:]]
        assert peak == sorted(peak) and peak[0] < peak[1] < peak[2]

    def test_ingest_round_trip(self, tmp_path):
        main(["cancel-sim", "--preset", "matched-sine", "--out-dir", str(tmp_path / "a")])
        assert main(["cancel-sim", "--input", str(tmp_path / "a" / "trace.csv"), "--out-dir", str(tmp_path / "b")]) == 0
        a = json.loads((tmp_path / "a" / "summary.json").read_text())
        b = json.loads((tmp_path / "b" / "summary.json").read_text())
        assert b["e_total_J"] == pytest.approx(a["e_total_J"], rel=1e-6)

    def test_ingest_mismatched_lengths(self, tmp_path):
        bad = tmp_path / "vi.csv"
        bad.write_text("time_s,v_V,i_A\n0,1,2\n1e-6,2\n")
        assert main(["cancel-sim", "--input", str(bad), "--out-dir", str(tmp_path)]) == 2


class TestFit:
    def write_trace(self, path, fn, n=1000):
        t = np.arange(n + 1) / n / 2500.0
        theta = 2 * np.pi * np.arange(n + 1) / n
        with open(path, "w") as fh:
            fh.write("time_s,p_W\n")
            for a, b in zip(t, fn(theta)):
                fh.write(f"{float(a)!r},{float(b)!r}\n")

    def test_six_harmonic_input(self, tmp_path):
        src = tmp_path / "p.csv"
        self.write_trace(src, lambda th: 2.0 * TABLE_VII.rescaled().raw(th))
        assert main(["fit-model", str(src), "--out-dir", str(tmp_path)]) == 0
        model = json.loads((tmp_path / "model.json").read_text())
        assert model["r_squared"] == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(model["a"], TABLE_VII.rescaled().a, atol=1e-8)

    def test_preset_regeneration(self, tmp_path):
        assert main(["fit-model", "--set", "fit.preset=table-vii", "--out-dir", str(tmp_path)]) == 0
        model = json.loads((tmp_path / "model.json").read_text())
        assert model["a0"] == pytest.approx(TABLE_VII.a0, abs=1e-6)
        assert np.allclose(model["a"], TABLE_VII.a, atol=1e-6)
        assert np.allclose(model["b"], TABLE_VII.b, atol=1e-6)

    def test_low_r2_warns_but_succeeds(self, tmp_path, caplog):
        src = tmp_path / "p.csv"
        self.write_trace(src, lambda th: np.where(np.sin(th) >= 0, 2.0, 0.5))
        assert main(["fit-model", str(src), "--set", "fit.n_harmonics=1", "--out-dir", str(tmp_path)]) == 0
        assert "below the threshold" in caplog.text
        assert "below the threshold" in json.loads((tmp_path / "model.json").read_text())["warning"]

    def test_empty_inputs(self, tmp_path):
        assert main(["fit-model", "--out-dir", str(tmp_path)]) == 2


def test_segment_subcommand(tmp_path):
    main(["synth", "--preset", "table-v", "--out-dir", str(tmp_path)])
    assert main(["segment", "--input", str(tmp_path / "waveform.csv"), "--out-dir", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "segments.csv")) - 1 == 32


def test_lossmap_gen(tmp_path):
    assert main(["lossmap-gen", "--preset", "table-v", "--set", "lossmap.n_f=3", "--set", "lossmap.n_db=4",
                 "--out-dir", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "lossmap.csv")) - 1 == 12


def test_lossmap_gen_without_material(tmp_path, capsys):
    assert main(["lossmap-gen", "--out-dir", str(tmp_path)]) == 2
    assert "backend.k" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "pwm_coreloss.cli", "synth", "--ratio", "1", "--out-dir",
                          str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 2

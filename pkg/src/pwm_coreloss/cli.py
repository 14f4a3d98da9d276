"""Command-line entry point: ``pwm-coreloss <subcommand> [options]``.

Exit codes: 0 success, 2 validation, 3 numeric failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import cancellation, cwh, generic_model, io, pipeline, svg
from .config import RunConfig, build_config
from .errors import NumericError, ValidationError
from .excitation import SineConfig, SpwmConfig, inductor_current, synth_sine, synth_spwm
from .loss import LossMapBackend, SteinmetzBackend, synth_loss_map
from .magnetics import flux_density
from .presets import core_preset
from .signal import TimeSeries

log = logging.getLogger("pwm_coreloss")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _open_input(key: str, path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{key}: file not found: {p}")
    return p


# --- builders -----------------------------------------------------------------

def build_core(cfg: RunConfig):
    if cfg.get("core.path"):
        return io.core_from_mapping(io.read_mapping(_open_input("core.path", cfg["core.path"])), "core.path")
    explicit = {k: cfg.get(f"core.{k}") for k in ("n1", "n2", "ae_m2", "le_m", "ve_m3")}
    if all(v is not None for v in explicit.values()):
        return io.core_from_mapping({**explicit, "name": cfg.get("core.name", "custom")})
    if any(v is not None for v in explicit.values()):
        missing = [f"core.{k}" for k, v in explicit.items() if v is None]
        raise ValidationError(f"incomplete core definition, missing {', '.join(missing)}")
    return core_preset(cfg["core.preset"])


def build_excitation(cfg: RunConfig):
    kind = cfg["excitation.kind"]
    if kind == "spwm":
        return SpwmConfig(vdc=cfg["excitation.vdc"], f0=cfg["excitation.f0_hz"], ratio=cfg["excitation.ratio"],
                          m=cfg["excitation.m"], samples_per_sw_cycle=cfg["excitation.samples_per_sw_cycle"])
    if kind == "sine":
        if cfg.get("excitation.amplitude_v") is None:
            raise ValidationError("excitation.amplitude_v is required for a sine excitation")
        return SineConfig(cfg["excitation.amplitude_v"], cfg["excitation.f0_hz"], cfg["excitation.cycles"],
                          cfg["excitation.samples_per_cycle"])
    raise ValidationError(f"excitation.kind must be 'spwm' or 'sine', got {kind!r}")


def build_steinmetz(cfg: RunConfig):
    if cfg.get("backend.path"):
        d = io.read_mapping(_open_input("backend.path", cfg["backend.path"]))
        return io.steinmetz_from_mapping(d, "backend.path")
    d = {k: v for k, v in cfg.section("backend").items() if k in
         ("k", "alpha", "beta", "f_min_hz", "f_max_hz", "b_min_T", "b_max_T")}
    for key in ("k", "alpha", "beta"):
        if key not in d:
            raise ValidationError(f"backend.{key} is required (or point backend.path at a parameter file)")
    return io.steinmetz_from_mapping(d)


def build_backend(cfg: RunConfig):
    kind = cfg["backend.kind"]
    if kind == "steinmetz":
        return SteinmetzBackend(build_steinmetz(cfg))
    if kind == "lossmap":
        if not cfg.get("backend.path"):
            raise ValidationError("backend.path is required for backend.kind = 'lossmap'")
        table = io.read_loss_map_csv(_open_input("backend.path", cfg["backend.path"]), cfg["backend.clamp"])
        return LossMapBackend(table, name=Path(cfg["backend.path"]).name)
    raise ValidationError(f"backend.kind must be 'steinmetz' or 'lossmap', got {kind!r}")


def build_model(cfg: RunConfig) -> generic_model.GenericLossModel:
    if cfg.get("model.path"):
        model = generic_model.load_model(_open_input("model.path", cfg["model.path"]))
    else:
        name = cfg["model.preset"]
        if name not in generic_model.PRESETS:
            raise ValidationError(f"model.preset {name!r} is unknown; choose from {sorted(generic_model.PRESETS)}")
        model = generic_model.PRESETS[name]
    if cfg.get("model.phase_offset") is not None:
        model = model.with_phase(cfg["model.phase_offset"])
    if cfg["model.rescale"]:
        model = model.rescaled()
    return model


def build_loss_source(cfg: RunConfig, backend):
    if cfg.get("backend.datasheet_mw_per_cm3") is not None:
        return pipeline.DatasheetDensity.from_mw_per_cm3(cfg["backend.datasheet_mw_per_cm3"])
    if isinstance(backend, SteinmetzBackend):
        return backend.params
    raise ValidationError("backend.datasheet_mw_per_cm3 is required when the backend is a loss map")


# --- subcommands --------------------------------------------------------------

def cmd_synth(cfg: RunConfig, out: Path, plots: bool) -> None:
    exc = build_excitation(cfg)
    if isinstance(exc, SpwmConfig):
        v = synth_spwm(exc, cfg["excitation.cycles"])
    else:
        v = synth_sine(exc)
    columns = {"v_V": v}
    if cfg["output.current"]:
        columns["i_A"] = inductor_current(v, cfg["excitation.inductance_h"], cfg["excitation.r_series_ohm"])
    if cfg["output.flux"]:
        columns["b_T"] = flux_density(v, build_core(cfg))
    io.write_waveform_csv(out / cfg["output.waveform"], columns, drop_closing=True)
    if plots:
        t = v.times
        svg.line_plot(out / "waveform.svg", [(t, s.values, name) for name, s in columns.items()],
                      "Excitation", "time (s)", "value")


def cmd_estimate(cfg: RunConfig, out: Path, plots: bool) -> None:
    exc = build_excitation(cfg)
    core = build_core(cfg)
    backend = build_backend(cfg)
    model = build_model(cfg)
    source = build_loss_source(cfg, backend)
    measured = {k: cfg.get(f"measured.{k}") for k in ("total_J", "minor_J", "datasheet_J", "emulated_J")}

    report, comparison = pipeline.run_workflow(exc, core, backend, model, source,
                                               inductance=cfg["excitation.inductance_h"],
                                               measured_total_J=measured["total_J"])
    fixture = all(v is not None for v in measured.values())
    if fixture:
        comparison = pipeline.fixture_comparison(measured["total_J"], measured["minor_J"],
                                                 measured["datasheet_J"], measured["emulated_J"])

    io.write_csv(out / cfg["output.report"], pipeline.REPORT_HEADER, report.table())
    rows = report.rows
    summary = {
        "totals": {"e_minor_total_J": report.e_minor_total, "e_major_total_J": report.e_major_total,
                   "e_grand_total_J": report.e_grand_total},
        "comparison": {"method1_J": comparison.method1_J,
                       "method2_datasheet_J": comparison.method2_datasheet_J,
                       "method2_emulated_J": comparison.method2_emulated_J,
                       "fixture_mode": fixture},
        "checks": {
            "report_conservation": math.isclose(report.e_grand_total, report.e_minor_total + report.e_major_total,
                                                rel_tol=1e-12),
            "major_conservation": math.isclose(report.e_major_total, report.metadata["q_total_J"],
                                               rel_tol=1e-12, abs_tol=1e-300),
            "all_non_negative": all(r.e_minor >= 0 and r.e_major >= 0 for r in rows),
        },
        "diagnostics": report.metadata,
    }
    io.write_json(out / cfg["output.summary"], summary)
    if plots:
        _estimate_plots(out, exc, core, model, report, cfg)


def _estimate_plots(out: Path, exc, core, model, report, cfg) -> None:
    rows = report.rows
    svg.stacked_bars(out / "cycles.svg", [r.cycle for r in rows],
                     [[r.e_minor * 1e6 for r in rows], [r.e_major * 1e6 for r in rows]],
                     ["minor", "major"], "Core loss per switching cycle", "switching cycle", "energy (uJ)")
    theta = np.linspace(0, 2 * np.pi, 721)
    clamped, _ = generic_model.evaluate(model, theta)
    f0 = report.metadata["f0_hz"]
    mean = float(np.trapezoid(clamped, theta) / (2 * np.pi))
    p = report.metadata["q_total_J"] * f0 * clamped / mean if mean > 0 else clamped * 0
    svg.line_plot(out / "p_major.svg", [(theta / (2 * np.pi * f0), p, "P_major(t)")],
                  "Instantaneous major-loop loss", "time (s)", "power (W)")
    v = synth_spwm(exc, 1) if isinstance(exc, SpwmConfig) else synth_sine(exc)
    i = inductor_current(v, cfg["excitation.inductance_h"], cfg["excitation.r_series_ohm"])
    b = flux_density(v, core)
    svg.line_plot(out / "bh.svg", [(core.n1 * i.values / core.le, b.values, "B-H")],
                  "B-H trajectory", "H (A/m)", "B (T)")


def _read_cancel_input(path: Path):
    cols = io.read_waveform_csv(path)
    if "i_pri_A" in cols and "v_diff_V" in cols:
        return cols["i_pri_A"], cols["v_diff_V"], cols.get("v_iut_V")
    if len(cols) == 2:
        v, i = cols.values()
        return i, v, None
    raise ValidationError(f"{path}: need columns i_pri_A and v_diff_V (optional v_iut_V), or exactly two v,i columns")


def cmd_cancel(cfg: RunConfig, out: Path, plots: bool) -> None:
    peak_error = None
    circuit = None
    if cfg.get("cancel.input"):
        i, v_diff, v_iut = _read_cancel_input(_open_input("cancel.input", cfg["cancel.input"]))
        trace = cancellation.post_process(i, v_diff, v_iut)
    else:
        l_m1 = cfg["cancel.l_m1_h"]
        circuit = cancellation.CancellationCircuit(cfg["cancel.r_c_ohm"], l_m1, cfg.get("cancel.l_m2_h", l_m1))
        sine = SineConfig(cfg["cancel.i_pk_a"], cfg["cancel.f_hz"], cfg["cancel.cycles"], cfg["cancel.samples_per_cycle"])
        i = synth_sine(sine).scaled(1.0, "A")
        trace = cancellation.run(circuit, i)
        peak_error = float(np.max(np.abs(cancellation.error_bound(circuit, i).values)))

    io.write_waveform_csv(out / cfg["output.trace"], {
        "i_pri_A": trace.i_pri, "v_iut_V": trace.v_iut_m2, "v_ref_V": trace.v_ref_m2,
        "v_diff_V": trace.v_diff, "p_W": trace.p_inst})
    io.write_json(out / cfg["output.summary"], {
        "e_total_J": trace.e_total, "e_charge_J": trace.e_charge, "e_discharge_J": trace.e_discharge,
        "e_pos_half_J": trace.e_pos_half, "e_neg_half_J": trace.e_neg_half, "peak_error_W": peak_error})

    sweep = cfg.get("cancel.sweep_dl_h")
    if sweep:
        if circuit is None:
            raise ValidationError("cancel.sweep_dl_h needs the synthetic mode (no cancel.input)")
        rows = cancellation.mismatch_sweep(circuit, trace.i_pri, [float(x) for x in sweep])
        io.write_csv(out / cfg["output.sweep"], ("delta_l_H", "peak_error_W"), rows)
    if plots:
        t = trace.p_inst.times
        svg.line_plot(out / "p_inst.svg", [(t, trace.p_inst.values, "p(t)")],
                      "Instantaneous loss", "time (s)", "power (W)")


def cmd_fit(cfg: RunConfig, out: Path, plots: bool) -> None:
    members = []
    material, w = cfg.get("fit.material", ""), cfg.get("fit.w", 1.0)
    if cfg.get("fit.preset"):
        name = cfg["fit.preset"]
        if name not in generic_model.PRESETS:
            raise ValidationError(f"fit.preset {name!r} is unknown; choose from {sorted(generic_model.PRESETS)}")
        n = cfg["fit.samples_per_cycle"]
        theta = 2 * np.pi * np.arange(n + 1) / n
        preset = generic_model.PRESETS[name]
        members.append((name, TimeSeries(0.0, 1.0 / n, preset.raw(theta))))
        material, w = cfg.get("fit.material", preset.material), cfg.get("fit.w", preset.w)
    for path in cfg.get("fit.inputs") or []:
        cols = io.read_waveform_csv(_open_input("fit.inputs", path))
        column = cfg.get("fit.column") or next(iter(cols))
        if column not in cols:
            raise ValidationError(f"fit.column {column!r} not found in {path}")
        members.append((str(path), generic_model.normalize(cols[column])))
    if not members:
        raise ValidationError("fit.inputs is empty; give at least one P(t) CSV or fit.preset")

    model, r2 = generic_model.fit(generic_model.NormalizedLossSet(tuple(members)), cfg["fit.n_harmonics"],
                                  material, w)
    if cfg["fit.rescale"]:
        model = model.rescaled()
    data = model.to_dict()
    data["r_squared"] = r2
    if r2 < cfg["fit.r2_threshold"]:
        data["warning"] = f"fit quality r^2 = {r2:.4f} is below the threshold {cfg['fit.r2_threshold']:.4f}"
        log.warning(data["warning"])
    data["n_operating_points"] = len(members)
    io.write_json(out / cfg["output.model"], data)
    if plots:
        theta = np.linspace(0, 2 * np.pi, 721)
        svg.line_plot(out / "model.svg", [(theta, model.raw(theta), "fit")],
                      "Normalized instantaneous loss", "phase (rad)", "P / P_avg")


def cmd_segment(cfg: RunConfig, out: Path, plots: bool) -> None:
    path = _open_input("segment.input", cfg["segment.input"]) if cfg.get("segment.input") else None
    if path is None:
        raise ValidationError("segment.input is required")
    cols = io.read_waveform_csv(path, close_period=True)
    column = cfg.get("segment.column") or next(iter(cols))
    if column not in cols:
        raise ValidationError(f"segment.column {column!r} not found in {path}")
    kind = cfg["segment.kind"]
    if kind == "voltage":
        b = flux_density(cols[column], build_core(cfg))
    elif kind == "flux":
        b = cols[column]
    else:
        raise ValidationError(f"segment.kind must be 'voltage' or 'flux', got {kind!r}")
    seg = cwh.segment(b, cfg.get("segment.min_delta_b_T"))
    io.write_csv(out / cfg["output.segments"], cwh.SEGMENTATION_HEADER, seg.rows())
    if plots:
        svg.line_plot(out / "flux.svg", [(b.times, b.values, "B(t)")], "Flux density", "time (s)", "B (T)")


def cmd_lossmap(cfg: RunConfig, out: Path, plots: bool) -> None:
    params = build_steinmetz(cfg)
    f_axis = np.geomspace(cfg["lossmap.f_min_hz"], cfg["lossmap.f_max_hz"], cfg["lossmap.n_f"])
    db_axis = np.geomspace(cfg["lossmap.db_min_T"], cfg["lossmap.db_max_T"], cfg["lossmap.n_db"])
    io.write_loss_map_csv(out / cfg["output.lossmap"], synth_loss_map(params, f_axis, db_axis))


COMMANDS = {
    "synth": cmd_synth,
    "estimate": cmd_estimate,
    "cancel-sim": cmd_cancel,
    "fit-model": cmd_fit,
    "segment": cmd_segment,
    "lossmap-gen": cmd_lossmap,
}

# convenience flags -> config keys
SHORTCUTS = {
    "synth": {"cycles": "excitation.cycles", "ratio": "excitation.ratio", "m": "excitation.m",
              "vdc": "excitation.vdc", "f0_hz": "excitation.f0_hz"},
    "estimate": {"ratio": "excitation.ratio", "m": "excitation.m", "vdc": "excitation.vdc",
                 "f0_hz": "excitation.f0_hz"},
    "cancel-sim": {"input": "cancel.input", "sweep": "cancel.sweep_dl_h"},
    "fit-model": {"inputs": "fit.inputs"},
    "segment": {"input": "segment.input"},
    "lossmap-gen": {},
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--plots", action="store_true", help="also write SVG plots")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--preset", help="named preset applied before the config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")

    parser = argparse.ArgumentParser(prog="pwm-coreloss", description="Cycle-by-cycle core loss under PWM excitation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        for flag in SHORTCUTS[name]:
            if flag == "inputs":
                p.add_argument("inputs", nargs="*", help="P(t) CSV files, one cycle each")
            else:
                p.add_argument("--" + flag.replace("_", "-"), dest=flag)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value
        for flag, key in SHORTCUTS[args.command].items():
            value = getattr(args, flag, None)
            if value not in (None, []):
                overrides[key] = value
        config_path = _open_input("--config", args.config) if args.config else None
        cfg = build_config(args.command, config_path, args.preset, overrides)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, args.plots)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
